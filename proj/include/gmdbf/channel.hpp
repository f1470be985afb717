// SPDX-License-Identifier: Apache-2.0
//
// gmdbf: hybrid beamforming link-level simulation for RIS-assisted mmWave MIMO-OFDM
// Copyright (C) 2026 The gmdbf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef GMDBF_CHANNEL_HPP
#define GMDBF_CHANNEL_HPP

#include "types.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gmdbf {

enum class PulseShape { raised_cosine, sinc, rectangular };

inline const char* to_string(PulseShape p)
{
    switch (p) {
    case PulseShape::raised_cosine: return "raised_cosine";
    case PulseShape::sinc: return "sinc";
    case PulseShape::rectangular: return "rectangular";
    }
    return "?";
}

/// System dimensions and channel statistics. Defaults are the 28 GHz reference setup:
/// 8x8 BS, 4x4 UE, 16x16 RIS, 3 streams over 3 RF chains, 64 subcarriers.
struct SystemConfig {
    int n_t_y = 8, n_t_z = 8; // BS UPA
    int n_r_y = 4, n_r_z = 4; // UE UPA
    int n_u_y = 16, n_u_z = 16; // RIS
    int m_t = 3, m_r = 3; // RF chains
    int n_s = 3; // data streams
    int k_sc = 64; // subcarriers
    int d_l = 64; // CP length = number of delay taps
    int n_c = 7; // NLoS clusters
    int n_p = 10; // paths per cluster
    double mu = 2.3; // LoS-to-NLoS power ratio exponent
    double angle_spread = 7.5 * pi / 180.0; // per-cluster angular standard deviation [rad]
    int rho = 3; // codebook oversampling factor
    double carrier_hz = 28e9;
    double spacing_wavelengths = 0.5;
    PulseShape pulse = PulseShape::raised_cosine;
    double rolloff = 0.8;

    int n_t() const { return n_t_y * n_t_z; }
    int n_r() const { return n_r_y * n_r_z; }
    int n_u() const { return n_u_y * n_u_z; }
    int num_paths() const { return n_c * n_p + 1; }

    /// Throws ErrorKind::config on the first violated constraint.
    void validate() const
    {
        auto fail = [](const std::string& m) { throw Error(ErrorKind::config, m); };
        for (int v : {n_t_y, n_t_z, n_r_y, n_r_z, n_u_y, n_u_z, m_t, m_r, n_s, k_sc, d_l})
            if (v < 1)
                fail("array dimensions, RF chains, streams, subcarriers and taps must be >= 1");
        if (n_c < 0 || n_p < 1)
            fail("n_c must be >= 0 and n_p >= 1");
        if (n_s > m_r || m_r > n_r())
            fail("need n_s <= m_r <= n_r");
        if (n_s > m_t || m_t > n_t())
            fail("need n_s <= m_t <= n_t");
        if (d_l > k_sc)
            fail("d_l must not exceed k_sc");
        if (rho < 1)
            fail("rho must be >= 1");
        if (!(angle_spread >= 0.0) || !std::isfinite(mu) || !(spacing_wavelengths > 0.0))
            fail("angle_spread >= 0, finite mu and spacing_wavelengths > 0 required");
        if (!(rolloff >= 0.0 && rolloff <= 1.0))
            fail("rolloff must be in [0, 1]");
    }
};

/// Normalized UPA response. Element (n, m), n along y and m along z, sits at index n * n_z + m
/// and has phase 2 pi d (n sin(theta) cos(phi) + m sin(phi)).
inline ComplexVector upa_steering(double theta, double phi, int n_y, int n_z, double spacing_wavelengths = 0.5)
{
    if (n_y < 1 || n_z < 1)
        throw Error(ErrorKind::invalid_argument, "upa_steering: array dimensions must be >= 1");
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_y) * n_z);
    const double py = two_pi * spacing_wavelengths * std::sin(theta) * std::cos(phi);
    const double pz = two_pi * spacing_wavelengths * std::sin(phi);
    ComplexVector a(n_y * n_z);
    for (int n = 0; n < n_y; ++n)
        for (int m = 0; m < n_z; ++m)
            a(n * n_z + m) = std::polar(norm, n * py + m * pz);
    return a;
}

struct PathComponent {
    cplx alpha;
    double tau = 0.0; // in sampling intervals
    double aoa_az = 0.0, aoa_el = 0.0;
    double aod_az = 0.0, aod_el = 0.0;
    bool is_los = false;
};

enum class LinkKind { bs_to_ris, ris_to_ue, bs_to_ue };

inline const char* to_string(LinkKind l)
{
    switch (l) {
    case LinkKind::bs_to_ris: return "bs_to_ris";
    case LinkKind::ris_to_ue: return "ris_to_ue";
    case LinkKind::bs_to_ue: return "bs_to_ue";
    }
    return "?";
}

struct ArrayDims {
    int n_y = 1, n_z = 1;
    int count() const { return n_y * n_z; }
};

struct LinkArrays {
    ArrayDims tx, rx;
};

inline LinkArrays link_arrays(const SystemConfig& cfg, LinkKind link)
{
    const ArrayDims bs{cfg.n_t_y, cfg.n_t_z}, ue{cfg.n_r_y, cfg.n_r_z}, ris{cfg.n_u_y, cfg.n_u_z};
    switch (link) {
    case LinkKind::bs_to_ris: return {bs, ris};
    case LinkKind::ris_to_ue: return {ris, ue};
    case LinkKind::bs_to_ue: return {bs, ue};
    }
    return {};
}

/// Delay taps, per-subcarrier responses, and the rays behind them for one link.
/// Matrices are (receive antennas) x (transmit antennas).
struct ChannelRealization {
    MatrixList taps; // empty for perturbed copies; see perturb_channel
    MatrixList freq;
    std::vector<PathComponent> paths;
    LinkArrays arrays;

    Eigen::Index rows() const { return freq.empty() ? 0 : freq.front().rows(); }
    Eigen::Index cols() const { return freq.empty() ? 0 : freq.front().cols(); }
    std::size_t subcarriers() const { return freq.size(); }
};

inline double sinc(double t)
{
    if (t == std::round(t))
        return t == 0.0 ? 1.0 : 0.0;
    return std::sin(pi * t) / (pi * t);
}

inline double pulse_value(PulseShape shape, double rolloff, double t)
{
    switch (shape) {
    case PulseShape::sinc: return sinc(t);
    case PulseShape::rectangular: return (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
    case PulseShape::raised_cosine: {
        if (rolloff > 0.0) {
            const double x = 2.0 * rolloff * t;
            if (std::abs(1.0 - x * x) < 1e-10)
                return pi / 4.0 * sinc(1.0 / (2.0 * rolloff));
            return sinc(t) * std::cos(pi * rolloff * t) / (1.0 - x * x);
        }
        return sinc(t);
    }
    }
    return 0.0;
}

/// exp(-j 2 pi k d / K) with the exponent reduced modulo K.
inline cplx dft_twiddle(long k, long d, long n)
{
    const long r = (k * d) % n;
    return std::polar(1.0, -two_pi * static_cast<double>(r) / static_cast<double>(n));
}

/// H[k] = sum_d taps[d] exp(-j 2 pi k d / K) for k = 0..K-1.
inline MatrixList frequency_response(const MatrixList& taps, int k_sc)
{
    if (taps.empty())
        throw Error(ErrorKind::invalid_argument, "frequency_response: no taps");
    MatrixList out(k_sc, ComplexMatrix::Zero(taps[0].rows(), taps[0].cols()));
    for (int k = 0; k < k_sc; ++k)
        for (std::size_t d = 0; d < taps.size(); ++d)
            out[k] += dft_twiddle(k, static_cast<long>(d), k_sc) * taps[d];
    return out;
}

namespace detail {

    inline void assemble_channel(const SystemConfig& cfg, ChannelRealization& h)
    {
        const ArrayDims tx = h.arrays.tx, rx = h.arrays.rx;
        const auto n_paths = static_cast<Eigen::Index>(h.paths.size());
        const double scale = std::sqrt(static_cast<double>(tx.count()) * rx.count() / cfg.num_paths());

        ComplexMatrix a_r(rx.count(), n_paths), a_t(tx.count(), n_paths);
        ComplexMatrix beta(n_paths, cfg.d_l);
        for (Eigen::Index l = 0; l < n_paths; ++l) {
            const PathComponent& p = h.paths[l];
            a_r.col(l) = upa_steering(p.aoa_az, p.aoa_el, rx.n_y, rx.n_z, cfg.spacing_wavelengths);
            a_t.col(l) = upa_steering(p.aod_az, p.aod_el, tx.n_y, tx.n_z, cfg.spacing_wavelengths);
            for (int d = 0; d < cfg.d_l; ++d)
                beta(l, d) = scale * p.alpha * pulse_value(cfg.pulse, cfg.rolloff, d - p.tau);
        }
        const ComplexMatrix a_t_h = a_t.adjoint();

        h.taps.resize(cfg.d_l);
        for (int d = 0; d < cfg.d_l; ++d)
            h.taps[d] = a_r * beta.col(d).asDiagonal() * a_t_h;

        ComplexMatrix twiddle(cfg.d_l, cfg.k_sc);
        for (int d = 0; d < cfg.d_l; ++d)
            for (int k = 0; k < cfg.k_sc; ++k)
                twiddle(d, k) = dft_twiddle(k, d, cfg.k_sc);
        const ComplexMatrix gains = beta * twiddle; // per-path frequency response
        h.freq.resize(cfg.k_sc);
        for (int k = 0; k < cfg.k_sc; ++k)
            h.freq[k] = a_r * gains.col(k).asDiagonal() * a_t_h;
    }

} // namespace detail

/// Draws one clustered wideband realization: a LoS ray (unless `include_los` is false) plus
/// n_c clusters of n_p rays each. Identical arguments give bit-identical output.
inline ChannelRealization draw_channel(const SystemConfig& cfg, LinkKind link, std::uint64_t seed, bool include_los = true)
{
    cfg.validate();
    Rng rng(seed);
    ChannelRealization h;
    h.arrays = link_arrays(cfg, link);

    auto angle = [&] { return rng.uniform(-pi / 2.0, pi / 2.0); };

    PathComponent los;
    los.is_los = true;
    los.alpha = rng.complex_normal(1.0);
    los.aoa_az = angle();
    los.aoa_el = angle();
    los.aod_az = angle();
    los.aod_el = angle();
    if (include_los)
        h.paths.push_back(los);

    const double half_width = std::sqrt(3.0) * cfg.angle_spread;
    const double nlos_var = std::pow(10.0, -cfg.mu);
    auto jitter = [&](double center) { return center + rng.uniform(-half_width, half_width); };
    for (int c = 0; c < cfg.n_c; ++c) {
        const double aoa_az = angle(), aoa_el = angle(), aod_az = angle(), aod_el = angle();
        for (int p = 0; p < cfg.n_p; ++p) {
            PathComponent path;
            path.aoa_az = jitter(aoa_az);
            path.aoa_el = jitter(aoa_el);
            path.aod_az = jitter(aod_az);
            path.aod_el = jitter(aod_el);
            path.alpha = rng.complex_normal(nlos_var);
            path.tau = rng.uniform(0.0, static_cast<double>(cfg.d_l));
            h.paths.push_back(path);
        }
    }
    detail::assemble_channel(cfg, h);
    return h;
}

/// Diagonal reflection operator of the RIS, stored as phases in [0, 2 pi).
struct RisPhases {
    RealVector phases;

    Eigen::Index size() const { return phases.size(); }
    ComplexVector diagonal() const
    {
        ComplexVector d(phases.size());
        for (Eigen::Index j = 0; j < phases.size(); ++j)
            d(j) = std::polar(1.0, phases(j));
        return d;
    }
};

/// Wraps an angle into [0, 2 pi).
inline double wrap_phase(double a)
{
    double w = std::fmod(a, two_pi);
    if (w < 0.0)
        w += two_pi;
    if (w >= two_pi)
        w = 0.0;
    return w;
}

/// H_eff[k] = H2[k] diag(e^{j phi}) H1[k] for every subcarrier.
inline MatrixList effective_channel(const MatrixList& h1, const MatrixList& h2, const ComplexVector& ris_diagonal)
{
    if (h1.size() != h2.size() || h1.empty())
        throw Error(ErrorKind::dimension_mismatch, "effective_channel: subcarrier counts differ or are zero");
    MatrixList out(h1.size());
    for (std::size_t k = 0; k < h1.size(); ++k) {
        if (h1[k].rows() != ris_diagonal.size() || h2[k].cols() != ris_diagonal.size())
            throw Error(ErrorKind::dimension_mismatch,
                        "effective_channel: H1 rows (" + std::to_string(h1[k].rows()) + "), H2 cols ("
                            + std::to_string(h2[k].cols()) + ") and RIS size ("
                            + std::to_string(ris_diagonal.size()) + ") must agree");
        out[k] = h2[k] * (ris_diagonal.asDiagonal() * h1[k]);
    }
    return out;
}

inline MatrixList effective_channel(const ChannelRealization& h1, const ChannelRealization& h2, const RisPhases& phi)
{
    return effective_channel(h1.freq, h2.freq, phi.diagonal());
}

struct PerturbationSpec {
    double sigma_e_sq = 0.0;
};

struct PerturbedChannel {
    ChannelRealization channel;
    double ncpe_db = -std::numeric_limits<double>::infinity();
};

inline double total_energy(const MatrixList& hs)
{
    double e = 0.0;
    for (const auto& h : hs)
        e += h.squaredNorm();
    return e;
}

/// Per-entry perturbation variance that yields the requested NCPE in expectation.
inline double sigma_sq_for_ncpe(const ChannelRealization& h, double ncpe_db)
{
    const double entries = static_cast<double>(h.subcarriers()) * h.rows() * h.cols();
    return std::pow(10.0, ncpe_db / 10.0) * total_energy(h.freq) / entries;
}

/// Adds i.i.d. CN(0, sigma_e^2) to every frequency-domain entry. The copy carries no taps since
/// the perturbation is defined on H[k] only. The returned NCPE is measured on (perturbed - input).
inline PerturbedChannel perturb_channel(const ChannelRealization& h, const PerturbationSpec& spec, std::uint64_t seed)
{
    if (!(spec.sigma_e_sq >= 0.0))
        throw Error(ErrorKind::invalid_argument, "perturb_channel: sigma_e_sq must be >= 0");
    PerturbedChannel out;
    out.channel.arrays = h.arrays;
    out.channel.paths = h.paths;
    out.channel.freq = h.freq;
    if (spec.sigma_e_sq == 0.0) {
        out.channel.taps = h.taps;
        return out;
    }
    Rng rng(seed);
    for (auto& m : out.channel.freq)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                m(i, j) += rng.complex_normal(spec.sigma_e_sq);
    double err = 0.0;
    for (std::size_t k = 0; k < h.freq.size(); ++k)
        err += (out.channel.freq[k] - h.freq[k]).squaredNorm();
    out.ncpe_db = 10.0 * std::log10(err / total_energy(h.freq));
    return out;
}

// Plain-text channel dump: header lines, one "path" line per ray, then one
// "d row col re im" record per tap entry. Numbers use shortest round-trip formatting.

inline void write_channel_dump(std::ostream& os, const ChannelRealization& h)
{
    if (h.taps.empty())
        throw Error(ErrorKind::invalid_argument, "channel dump needs delay taps");
    os << "# gmdbf channel dump v1\n";
    os << "arrays " << h.arrays.tx.n_y << ' ' << h.arrays.tx.n_z << ' ' << h.arrays.rx.n_y << ' '
       << h.arrays.rx.n_z << '\n';
    os << "dims " << h.taps.front().rows() << ' ' << h.taps.front().cols() << ' ' << h.taps.size() << ' '
       << h.freq.size() << '\n';
    os << "paths " << h.paths.size() << '\n';
    for (const auto& p : h.paths)
        os << "path " << (p.is_los ? 1 : 0) << ' ' << format_double(p.alpha.real()) << ' '
           << format_double(p.alpha.imag()) << ' ' << format_double(p.tau) << ' ' << format_double(p.aoa_az)
           << ' ' << format_double(p.aoa_el) << ' ' << format_double(p.aod_az) << ' '
           << format_double(p.aod_el) << '\n';
    os << "taps\n";
    for (std::size_t d = 0; d < h.taps.size(); ++d)
        for (Eigen::Index r = 0; r < h.taps[d].rows(); ++r)
            for (Eigen::Index c = 0; c < h.taps[d].cols(); ++c)
                os << d << ' ' << r << ' ' << c << ' ' << format_double(h.taps[d](r, c).real()) << ' '
                   << format_double(h.taps[d](r, c).imag()) << '\n';
}

inline void write_channel_dump(const std::string& path, const ChannelRealization& h)
{
    std::ofstream os(path);
    if (!os)
        throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    write_channel_dump(os, h);
    if (!os)
        throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

/// Reads a dump back; freq is rebuilt from the taps.
inline ChannelRealization read_channel_dump(std::istream& is)
{
    auto fail = [](const std::string& m) -> void { throw Error(ErrorKind::io, "channel dump: " + m); };
    std::string line, word;
    ChannelRealization h;
    long rows = 0, cols = 0, n_taps = 0, n_sc = 0;
    std::size_t n_paths = 0;
    bool in_taps = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        if (in_taps) {
            long d, r, c;
            double re, im;
            if (!(ls >> d >> r >> c >> re >> im) || d < 0 || d >= n_taps || r < 0 || r >= rows || c < 0 || c >= cols)
                fail("bad tap record '" + line + "'");
            h.taps[d](r, c) = cplx(re, im);
            continue;
        }
        ls >> word;
        if (word == "arrays") {
            if (!(ls >> h.arrays.tx.n_y >> h.arrays.tx.n_z >> h.arrays.rx.n_y >> h.arrays.rx.n_z))
                fail("bad arrays line");
        } else if (word == "dims") {
            if (!(ls >> rows >> cols >> n_taps >> n_sc) || rows < 1 || cols < 1 || n_taps < 1 || n_sc < 1)
                fail("bad dims line");
            h.taps.assign(n_taps, ComplexMatrix::Zero(rows, cols));
        } else if (word == "paths") {
            if (!(ls >> n_paths))
                fail("bad paths line");
        } else if (word == "path") {
            PathComponent p;
            int los = 0;
            double re = 0, im = 0;
            if (!(ls >> los >> re >> im >> p.tau >> p.aoa_az >> p.aoa_el >> p.aod_az >> p.aod_el))
                fail("bad path line '" + line + "'");
            p.is_los = los != 0;
            p.alpha = cplx(re, im);
            h.paths.push_back(p);
        } else if (word == "taps") {
            if (h.taps.empty())
                fail("taps section before dims");
            in_taps = true;
        } else {
            fail("unknown line '" + line + "'");
        }
    }
    if (!in_taps || h.paths.size() != n_paths)
        fail("truncated dump");
    h.freq = frequency_response(h.taps, static_cast<int>(n_sc));
    return h;
}

} // namespace gmdbf

#endif // GMDBF_CHANNEL_HPP
