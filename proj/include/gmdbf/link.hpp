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

#ifndef GMDBF_LINK_HPP
#define GMDBF_LINK_HPP

#include "beamforming.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <span>

namespace gmdbf {

// ---- 16-QAM -------------------------------------------------------------

/// Gray-coded levels per axis, indexed by the two bits (b_hi b_lo): 00 -> -3, 01 -> -1,
/// 11 -> +1, 10 -> +3, scaled by 1/sqrt(10) for unit average symbol energy.
inline constexpr std::array<double, 4> qam16_axis_levels = {-3.0, -1.0, 3.0, 1.0};
inline const double qam16_norm = 1.0 / std::sqrt(10.0);

/// Symbol for a nibble: bits 3..2 pick the in-phase level, bits 1..0 the quadrature level.
inline cplx qam16_symbol(unsigned nibble)
{
    return {qam16_axis_levels[(nibble >> 2) & 3u] * qam16_norm, qam16_axis_levels[nibble & 3u] * qam16_norm};
}

namespace detail {

    /// Nearest axis level index in Gray-bit order.
    inline unsigned slice_axis(double v)
    {
        const double t = v / qam16_norm;
        if (t < -2.0)
            return 0u;
        if (t < 0.0)
            return 1u;
        if (t < 2.0)
            return 3u;
        return 2u;
    }

} // namespace detail

/// Hard decision: the nibble of the nearest constellation point.
inline unsigned qam16_slice(cplx y)
{
    return (detail::slice_axis(y.real()) << 2) | detail::slice_axis(y.imag());
}

inline cplx qam16_nearest(cplx y) { return qam16_symbol(qam16_slice(y)); }

/// K x N_s symbols backed by 4 K N_s bits (one bit per byte, MSB of each nibble first).
struct QamSymbolFrame {
    ComplexMatrix symbols;
    std::vector<std::uint8_t> bits;
};

inline std::vector<cplx> qam16_modulate(std::span<const std::uint8_t> bits)
{
    if (bits.size() % 4 != 0)
        throw Error(ErrorKind::invalid_argument, "qam16_modulate: bit count must be a multiple of 4");
    std::vector<cplx> out(bits.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const unsigned nib = (bits[4 * i] << 3) | (bits[4 * i + 1] << 2) | (bits[4 * i + 2] << 1) | bits[4 * i + 3];
        out[i] = qam16_symbol(nib & 15u);
    }
    return out;
}

inline std::vector<std::uint8_t> qam16_demodulate_hard(std::span<const cplx> symbols)
{
    std::vector<std::uint8_t> bits(4 * symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const unsigned nib = qam16_slice(symbols[i]);
        for (int b = 0; b < 4; ++b)
            bits[4 * i + b] = static_cast<std::uint8_t>((nib >> (3 - b)) & 1u);
    }
    return bits;
}

/// Frame of k_sc x n_s symbols; symbol (k, s) uses bits [4 (k n_s + s), +4).
inline QamSymbolFrame qam16_frame(std::vector<std::uint8_t> bits, int k_sc, int n_s)
{
    if (bits.size() != static_cast<std::size_t>(4) * k_sc * n_s)
        throw Error(ErrorKind::invalid_argument, "qam16_frame: need 4 * K * N_s bits");
    QamSymbolFrame f;
    const auto sym = qam16_modulate(bits);
    f.symbols.resize(k_sc, n_s);
    for (int k = 0; k < k_sc; ++k)
        for (int s = 0; s < n_s; ++s)
            f.symbols(k, s) = sym[static_cast<std::size_t>(k) * n_s + s];
    f.bits = std::move(bits);
    return f;
}

inline QamSymbolFrame random_qam16_frame(Rng& rng, int k_sc, int n_s)
{
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(4) * k_sc * n_s);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i % 64 == 0)
            word = rng.bits();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return qam16_frame(std::move(bits), k_sc, n_s);
}

// ---- signal chain -------------------------------------------------------

/// y[k] = W_BB^H[k] W_RF^H (H_eff[k] F_RF F_BB[k] x[k] + n[k]).
inline ComplexVector transmit_subcarrier(const ComplexVector& x, const BeamformerSet& bf, std::size_t k,
                                         const ComplexMatrix& h_eff_k, const ComplexVector& noise)
{
    if (k >= bf.f_bb.size() || k >= bf.w_bb.size())
        throw Error(ErrorKind::invalid_argument, "transmit_subcarrier: subcarrier index out of range");
    const auto& f_bb = bf.f_bb[k];
    const auto& w_bb = bf.w_bb[k];
    if (x.size() != f_bb.cols() || bf.f_rf.cols() != f_bb.rows() || h_eff_k.cols() != bf.f_rf.rows()
        || h_eff_k.rows() != bf.w_rf.rows() || noise.size() != h_eff_k.rows() || bf.w_rf.cols() != w_bb.rows())
        throw Error(ErrorKind::dimension_mismatch, "transmit_subcarrier: inconsistent dimensions");
    return w_bb.adjoint() * (bf.w_rf.adjoint() * (h_eff_k * (bf.f_rf * (f_bb * x)) + noise));
}

/// Successive interference cancellation on an upper-triangular channel, last stream first.
inline ComplexVector sic_detect(const ComplexVector& y, const ComplexMatrix& r1)
{
    const Eigen::Index n = r1.rows();
    if (r1.cols() != n || y.size() != n)
        throw Error(ErrorKind::dimension_mismatch, "sic_detect: R must be square and match y");
    ComplexVector x_hat(n);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        cplx acc = y(i);
        for (Eigen::Index j = i + 1; j < n; ++j)
            acc -= r1(i, j) * x_hat(j);
        x_hat(i) = qam16_nearest(acc / r1(i, i));
    }
    return x_hat;
}

/// Per-stream scalar equalization for a diagonalized channel. Streams with zero gain are
/// sliced as received.
inline ComplexVector linear_detect(const ComplexVector& y, const RealVector& amplitude)
{
    ComplexVector x_hat(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        x_hat(i) = qam16_nearest(amplitude(i) > 0.0 ? y(i) / amplitude(i) : y(i));
    return x_hat;
}

/// Noise variance per receive antenna for a transmit-referenced SNR and total power n_s.
inline double noise_variance(double snr_db, int n_s) { return n_s / std::pow(10.0, snr_db / 10.0); }

inline ComplexVector awgn(double snr_db, int n_s, Eigen::Index n_r, Rng& rng)
{
    const double var = noise_variance(snr_db, n_s);
    ComplexVector n(n_r);
    for (Eigen::Index i = 0; i < n_r; ++i)
        n(i) = rng.complex_normal(var);
    return n;
}

inline ComplexVector awgn(double snr_db, int n_s, Eigen::Index n_r, std::uint64_t seed)
{
    Rng rng(seed);
    return awgn(snr_db, n_s, n_r, rng);
}

// ---- spectral efficiency --------------------------------------------------

struct SpectralEfficiency {
    double bits_per_hz = 0.0;
    bool pinv_fallback = false; // combiner noise covariance was singular somewhere
};

/// (1/K) sum_k log2 det(I + R_n^{-1} Hb Hb^H), Hb = W^H H_eff F, R_n = sigma^2 W^H W, with
/// W = W_RF W_BB[k] and F = F_RF F_BB[k].
inline SpectralEfficiency spectral_efficiency(const MatrixList& h_eff, const BeamformerSet& bf, double noise_var)
{
    if (h_eff.size() != bf.f_bb.size() || h_eff.size() != bf.w_bb.size() || h_eff.empty())
        throw Error(ErrorKind::dimension_mismatch, "spectral_efficiency: subcarrier counts differ");
    if (!(noise_var > 0.0))
        throw Error(ErrorKind::invalid_argument, "spectral_efficiency: noise variance must be > 0");
    SpectralEfficiency out;
    double total = 0.0;
    for (std::size_t k = 0; k < h_eff.size(); ++k) {
        const ComplexMatrix w = bf.w_rf * bf.w_bb[k];
        const ComplexMatrix f = bf.f_rf * bf.f_bb[k];
        const ComplexMatrix hb = w.adjoint() * h_eff[k] * f;
        const ComplexMatrix gram = w.adjoint() * w;
        const ComplexMatrix signal = hb * hb.adjoint();
        const Eigen::Index n = gram.rows();
        Eigen::LLT<ComplexMatrix> llt(gram);
        // Treat the Gram matrix as singular once its condition number passes ~1e14.
        bool pd = llt.info() == Eigen::Success;
        if (pd) {
            const RealVector l = llt.matrixL().toDenseMatrix().diagonal().real();
            pd = l.minCoeff() > 1e-7 * l.maxCoeff();
        }
        if (pd) {
            // det(I + L^{-1} S L^{-H} / sigma^2) via a second Cholesky of a Hermitian PD matrix.
            ComplexMatrix m = llt.matrixL().solve(signal);
            m = llt.matrixL().solve(m.adjoint()).adjoint();
            ComplexMatrix a = ComplexMatrix::Identity(n, n) + m / noise_var;
            a = 0.5 * (a + a.adjoint()).eval();
            Eigen::LLT<ComplexMatrix> llt2(a);
            const RealVector d = llt2.matrixL().toDenseMatrix().diagonal().real();
            total += 2.0 * d.array().log2().sum();
        } else {
            out.pinv_fallback = true;
            Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(gram);
            const ComplexMatrix a = ComplexMatrix::Identity(n, n) + cod.pseudoInverse() * signal / noise_var;
            Eigen::PartialPivLU<ComplexMatrix> lu(a);
            const ComplexMatrix u = lu.matrixLU();
            double ld = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                ld += std::log2(std::abs(u(i, i)));
            total += ld;
        }
    }
    out.bits_per_hz = total / static_cast<double>(h_eff.size());
    return out;
}

// ---- frame simulation -----------------------------------------------------

/// Detector side information, fixed at design time.
struct Detector {
    BasebandScheme kind = BasebandScheme::gmd;
    MatrixList triangular;         // gmd: scale * R_1 per subcarrier
    std::vector<RealVector> amplitude; // svd: per-stream amplitude per subcarrier
};

struct LinkResult {
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_total = 0;
    double se_bits_per_hz = 0.0;

    double ber() const { return bits_total ? static_cast<double>(bit_errors) / static_cast<double>(bits_total) : 0.0; }
};

/// Per-subcarrier end-to-end maps: y = signal_map x + noise_map n.
struct LinkMaps {
    MatrixList signal_map; // W^H H_eff F, N_s x N_s
    MatrixList noise_map;  // W^H, N_s x N_r
};

inline LinkMaps link_maps(const MatrixList& h_eff, const BeamformerSet& bf)
{
    LinkMaps m;
    for (std::size_t k = 0; k < h_eff.size(); ++k) {
        const ComplexMatrix w_h = (bf.w_rf * bf.w_bb[k]).adjoint();
        m.signal_map.push_back(w_h * h_eff[k] * bf.f_rf * bf.f_bb[k]);
        m.noise_map.push_back(w_h);
    }
    return m;
}

/// Sends `frames` random 16-QAM OFDM symbols through the precomputed maps and counts bit
/// errors. Bits and unit-variance noise come from `seed` only, so runs at different SNRs
/// (or with different beamformers) see the same data and the same noise shape.
inline LinkResult simulate_frames(const LinkMaps& maps, const Detector& det, double noise_var, int frames, std::uint64_t seed)
{
    LinkResult res;
    if (maps.signal_map.empty())
        return res;
    const int k_sc = static_cast<int>(maps.signal_map.size());
    const Eigen::Index n_s = maps.signal_map.front().cols();
    const Eigen::Index n_r = maps.noise_map.front().cols();
    const double sigma = std::sqrt(noise_var);
    Rng rng(seed);
    ComplexVector noise(n_r), y(n_s), x_hat(n_s);
    for (int f = 0; f < frames; ++f) {
        const QamSymbolFrame frame = random_qam16_frame(rng, k_sc, static_cast<int>(n_s));
        for (int k = 0; k < k_sc; ++k) {
            for (Eigen::Index i = 0; i < n_r; ++i)
                noise(i) = sigma * rng.complex_normal(1.0);
            const ComplexVector x = frame.symbols.row(k).transpose();
            y.noalias() = maps.signal_map[k] * x;
            y.noalias() += maps.noise_map[k] * noise;
            x_hat = det.kind == BasebandScheme::gmd ? sic_detect(y, det.triangular[k]) : linear_detect(y, det.amplitude[k]);
            for (Eigen::Index s = 0; s < n_s; ++s) {
                const unsigned sent = qam16_slice(x(s));
                const unsigned got = qam16_slice(x_hat(s));
                res.bit_errors += static_cast<std::uint64_t>(std::popcount((sent ^ got) & 15u));
            }
        }
        res.bits_total += static_cast<std::uint64_t>(4) * k_sc * n_s;
    }
    return res;
}

} // namespace gmdbf

#endif // GMDBF_LINK_HPP
