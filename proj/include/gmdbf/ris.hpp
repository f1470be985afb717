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

#ifndef GMDBF_RIS_HPP
#define GMDBF_RIS_HPP

#include "channel.hpp"

#include <optional>

namespace gmdbf {

struct AnglePair {
    double azimuth = 0.0;
    double elevation = 0.0;
};

/// LoS angles seen from the RIS: arrival of the BS->RIS ray, departure of the RIS->UE ray.
struct LosGeometry {
    AnglePair arrival;
    AnglePair departure;
    // Per-subcarrier LoS gains of each hop; diagnostics only.
    std::optional<std::vector<cplx>> zeta1, zeta2;
};

namespace detail {

    inline const PathComponent& los_path(const ChannelRealization& h)
    {
        for (const auto& p : h.paths)
            if (p.is_los)
                return p;
        throw Error(ErrorKind::invalid_argument, "channel realization has no LoS ray");
    }

    /// sum_d beta_0(d) exp(-j 2 pi k d / K), recovered from the LoS entry of the tap gains.
    inline std::vector<cplx> los_gain(const SystemConfig& cfg, const ChannelRealization& h)
    {
        const auto& p = los_path(h);
        const double scale = std::sqrt(static_cast<double>(h.arrays.tx.count()) * h.arrays.rx.count() / cfg.num_paths());
        std::vector<cplx> zeta(cfg.k_sc, cplx(0.0));
        for (int k = 0; k < cfg.k_sc; ++k)
            for (int d = 0; d < cfg.d_l; ++d)
                zeta[k] += scale * p.alpha * pulse_value(cfg.pulse, cfg.rolloff, d - p.tau) * dft_twiddle(k, d, cfg.k_sc);
        return zeta;
    }

} // namespace detail

/// Reads the LoS geometry off the two hops. A non-zero `angle_jitter` adds uniform errors with
/// that standard deviation (radians) to each angle, modelling imperfect angle estimates.
inline LosGeometry los_geometry(const ChannelRealization& bs_to_ris, const ChannelRealization& ris_to_ue,
                                double angle_jitter = 0.0, std::uint64_t seed = 0)
{
    const auto& p1 = detail::los_path(bs_to_ris);
    const auto& p2 = detail::los_path(ris_to_ue);
    LosGeometry g{{p1.aoa_az, p1.aoa_el}, {p2.aod_az, p2.aod_el}, std::nullopt, std::nullopt};
    if (angle_jitter > 0.0) {
        Rng rng(seed);
        const double w = std::sqrt(3.0) * angle_jitter;
        for (double* a : {&g.arrival.azimuth, &g.arrival.elevation, &g.departure.azimuth, &g.departure.elevation})
            *a += rng.uniform(-w, w);
    }
    return g;
}

inline LosGeometry los_geometry_with_gains(const SystemConfig& cfg, const ChannelRealization& bs_to_ris,
                                           const ChannelRealization& ris_to_ue)
{
    LosGeometry g = los_geometry(bs_to_ris, ris_to_ue);
    g.zeta1 = detail::los_gain(cfg, bs_to_ris);
    g.zeta2 = detail::los_gain(cfg, ris_to_ue);
    return g;
}

struct RisSteering {
    ComplexVector arrival;   // a_r of the BS->RIS hop
    ComplexVector departure; // a_t of the RIS->UE hop
};

inline RisSteering ris_steering(const LosGeometry& g, ArrayDims ris, double spacing_wavelengths = 0.5)
{
    return {upa_steering(g.arrival.azimuth, g.arrival.elevation, ris.n_y, ris.n_z, spacing_wavelengths),
            upa_steering(g.departure.azimuth, g.departure.elevation, ris.n_y, ris.n_z, spacing_wavelengths)};
}

/// Phase-only closed form maximizing |gamma|: element j gets the phase of
/// (a_t)_j (a_r)_j^*, which lines up every term of gamma at phase zero.
inline RisPhases los_phase_design(const LosGeometry& g, ArrayDims ris, double spacing_wavelengths = 0.5)
{
    const RisSteering s = ris_steering(g, ris, spacing_wavelengths);
    RisPhases out;
    out.phases.resize(s.arrival.size());
    for (Eigen::Index j = 0; j < s.arrival.size(); ++j)
        out.phases(j) = wrap_phase(std::arg(s.departure(j) * std::conj(s.arrival(j))));
    return out;
}

inline RisPhases full_reflection(int n_u)
{
    if (n_u < 1)
        throw Error(ErrorKind::invalid_argument, "full_reflection: n_u must be >= 1");
    return {RealVector::Zero(n_u)};
}

inline RisPhases random_phases(int n_u, std::uint64_t seed)
{
    if (n_u < 1)
        throw Error(ErrorKind::invalid_argument, "random_phases: n_u must be >= 1");
    Rng rng(seed);
    RisPhases out{RealVector(n_u)};
    for (int j = 0; j < n_u; ++j)
        out.phases(j) = rng.uniform(0.0, two_pi);
    return out;
}

/// gamma = a_t^H diag(e^{j phi}) a_r.
inline cplx array_gain(const RisPhases& phi, const LosGeometry& g, ArrayDims ris, double spacing_wavelengths = 0.5)
{
    if (phi.size() != ris.count())
        throw Error(ErrorKind::dimension_mismatch, "array_gain: phase vector length does not match the RIS");
    const RisSteering s = ris_steering(g, ris, spacing_wavelengths);
    cplx gamma(0.0);
    for (Eigen::Index j = 0; j < phi.size(); ++j)
        gamma += std::conj(s.departure(j)) * std::polar(1.0, phi.phases(j)) * s.arrival(j);
    return gamma;
}

} // namespace gmdbf

#endif // GMDBF_RIS_HPP
