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

#ifndef GMDBF_BEAMFORMING_HPP
#define GMDBF_BEAMFORMING_HPP

#include "codebook.hpp"
#include "factorizations.hpp"

#include <numeric>
#include <string>

namespace gmdbf {

struct DigitalBeamformers {
    MatrixList f_opt; // top-n_s right singular vectors per subcarrier
    MatrixList w_opt; // top-n_s left singular vectors per subcarrier
};

inline DigitalBeamformers optimal_digital_beamformers(const MatrixList& h_eff, int n_s)
{
    DigitalBeamformers out;
    out.f_opt.reserve(h_eff.size());
    out.w_opt.reserve(h_eff.size());
    for (const auto& h : h_eff) {
        if (n_s < 1 || n_s > std::min(h.rows(), h.cols()))
            throw Error(ErrorKind::invalid_argument, "optimal_digital_beamformers: n_s out of range");
        const SvdFactors f = svd(h);
        out.f_opt.push_back(f.V.leftCols(n_s));
        out.w_opt.push_back(f.U.leftCols(n_s));
    }
    return out;
}

struct SompResult {
    ComplexMatrix rf;                    // selected atoms, in selection order
    std::vector<Eigen::Index> indices;   // dictionary column of each RF chain
    std::vector<double> residual_energy; // sum_k ||F_opt[k] - RF RF^+ F_opt[k]||_F^2 after each pick
    int duplicate_warnings = 0;
    bool early_stop = false; // residual vanished before m atoms were chosen
};

namespace detail {

    /// diag(sum_k D^H F[k] F[k]^H D) without forming the atom-by-atom matrix.
    inline RealVector somp_scores(const ComplexMatrix& dict_h, const MatrixList& f)
    {
        RealVector s = RealVector::Zero(dict_h.rows());
        for (const auto& fk : f)
            s += (dict_h * fk).rowwise().squaredNorm();
        return s;
    }

    inline Eigen::Index best_unused(const RealVector& scores, const std::vector<Eigen::Index>& used)
    {
        Eigen::Index best = -1;
        for (Eigen::Index l = 0; l < scores.size(); ++l) {
            if (std::find(used.begin(), used.end(), l) != used.end())
                continue;
            if (best < 0 || scores(l) > scores(best))
                best = l;
        }
        return best;
    }

} // namespace detail

/// Simultaneous OMP over all subcarriers: picks m dictionary atoms whose span jointly best
/// approximates every F_opt[k].
///
/// Each iteration scores the atoms against the normalized residuals, appends the best one,
/// refits all subcarriers by least squares and renormalizes each residual to unit Frobenius
/// norm. If the winning atom is already selected the best unused atom is taken instead and a
/// warning is counted. Once every residual is numerically zero, the remaining chains are filled
/// with the best unused atoms by correlation with F_opt.
inline SompResult somp_select(const MatrixList& f_opt, const Codebook& dictionary, int m)
{
    if (f_opt.empty())
        throw Error(ErrorKind::invalid_argument, "somp_select: no subcarriers");
    if (m < 1 || m > dictionary.size())
        throw Error(ErrorKind::invalid_argument, "somp_select: m must be in [1, dictionary size]");
    const Eigen::Index n = dictionary.atoms.rows();
    for (const auto& f : f_opt)
        if (f.rows() != n)
            throw Error(ErrorKind::dimension_mismatch, "somp_select: F_opt rows differ from atom length");

    const ComplexMatrix dict_h = dictionary.atoms.adjoint();
    const RealVector fill_scores = detail::somp_scores(dict_h, f_opt);

    SompResult out;
    out.rf.resize(n, 0);
    MatrixList residual = f_opt;
    bool exhausted = false;
    for (int it = 0; it < m; ++it) {
        Eigen::Index pick;
        if (exhausted) {
            pick = detail::best_unused(fill_scores, out.indices);
        } else {
            const RealVector scores = detail::somp_scores(dict_h, residual);
            scores.maxCoeff(&pick);
            if (std::find(out.indices.begin(), out.indices.end(), pick) != out.indices.end()) {
                ++out.duplicate_warnings;
                pick = detail::best_unused(scores, out.indices);
            }
        }
        out.indices.push_back(pick);
        out.rf.conservativeResize(n, it + 1);
        out.rf.col(it) = dictionary.atoms.col(pick);

        Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(out.rf);
        double energy = 0.0;
        bool all_zero = true;
        for (std::size_t k = 0; k < f_opt.size(); ++k) {
            const ComplexMatrix diff = f_opt[k] - out.rf * cod.solve(f_opt[k]);
            const double norm = diff.norm();
            energy += norm * norm;
            if (norm > 1e-12 * std::max(1.0, f_opt[k].norm())) {
                residual[k] = diff / norm;
                all_zero = false;
            } else {
                residual[k].setZero();
            }
        }
        out.residual_energy.push_back(energy);
        if (all_zero && !exhausted) {
            exhausted = true;
            out.early_stop = it + 1 < m;
        }
    }
    return out;
}

/// Hybrid beamformer set for one link. The selection matrix is kept as atom index lists.
struct BeamformerSet {
    ComplexMatrix f_rf; // N_t x M_t
    ComplexMatrix w_rf; // N_r x M_r
    MatrixList f_bb;    // per subcarrier, M_t x N_s
    MatrixList w_bb;    // per subcarrier, M_r x N_s
    std::vector<Eigen::Index> selected_tx_atoms;
    std::vector<Eigen::Index> selected_rx_atoms;
    std::string scheme_tag;
};

/// h_hat[k] = W_RF^H H_eff[k] F_RF.
inline MatrixList effective_baseband(const MatrixList& h_eff, const ComplexMatrix& w_rf, const ComplexMatrix& f_rf)
{
    MatrixList out;
    out.reserve(h_eff.size());
    const ComplexMatrix w_rf_h = w_rf.adjoint();
    for (const auto& h : h_eff) {
        if (h.rows() != w_rf.rows() || h.cols() != f_rf.rows())
            throw Error(ErrorKind::dimension_mismatch, "effective_baseband: RF stage does not match H_eff");
        out.push_back(w_rf_h * h * f_rf);
    }
    return out;
}

/// Scale that makes ||F_RF F_BB||_F^2 = n_s.
inline double power_scale(const ComplexMatrix& f_rf, const ComplexMatrix& f_bb, int n_s)
{
    const double p = (f_rf * f_bb).squaredNorm();
    if (!(p > 0.0))
        throw Error(ErrorKind::degenerate_input, "baseband precoder has zero transmit power");
    return std::sqrt(n_s / p);
}

struct GmdBaseband {
    MatrixList f_bb; // power-normalized Q_1
    MatrixList w_bb; // G_1
    MatrixList r1;   // R_1 of the unnormalized decomposition
    std::vector<double> scale; // f_bb[k] = scale[k] * Q_1[k]

    /// Upper-triangular channel seen by the SIC detector at subcarrier k.
    ComplexMatrix detector_matrix(std::size_t k) const { return scale[k] * r1[k]; }
};

inline GmdBaseband gmd_baseband(const MatrixList& h_hat, const ComplexMatrix& f_rf, int n_s)
{
    GmdBaseband out;
    for (const auto& h : h_hat) {
        if (n_s > std::min(h.rows(), h.cols()))
            throw Error(ErrorKind::invalid_argument, "gmd_baseband: n_s exceeds min(M_r, M_t)");
        GmdFactors g = gmd(h, n_s);
        const double c = power_scale(f_rf, g.Q, n_s);
        out.f_bb.push_back(c * g.Q);
        out.w_bb.push_back(std::move(g.G));
        out.r1.push_back(std::move(g.R));
        out.scale.push_back(c);
    }
    return out;
}

/// Water-filling: p_i = max(0, level - inv_gain_i) with sum p_i = total.
inline RealVector waterfill(const RealVector& inv_gain, double total)
{
    const Eigen::Index n = inv_gain.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return inv_gain(a) < inv_gain(b); });
    // Largest active set whose water level clears its weakest member.
    double level = 0.0;
    Eigen::Index active = 0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        acc += inv_gain(order[i]);
        const double candidate = (total + acc) / static_cast<double>(i + 1);
        if (candidate > inv_gain(order[i])) {
            level = candidate;
            active = i + 1;
        } else {
            break;
        }
    }
    RealVector p = RealVector::Zero(n);
    for (Eigen::Index i = 0; i < active; ++i)
        p(order[i]) = level - inv_gain(order[i]);
    return p;
}

struct SvdBaseband {
    MatrixList f_bb; // scale * V_1 diag(sqrt(p))
    MatrixList w_bb; // U_1
    std::vector<RealVector> powers; // p_i, sum = n_s
    std::vector<RealVector> gains;  // sigma_i^2 p_i
    std::vector<double> scale;
    std::vector<bool> fallback; // water-filling cut every stream; strongest kept

    /// Diagonal (real, non-negative) amplitude of stream i after combining at subcarrier k.
    RealVector stream_amplitude(std::size_t k) const { return gains[k].cwiseSqrt() * scale[k]; }
};

/// SVD precoding with water-filling over the n_s strongest modes.
inline SvdBaseband svd_baseband_waterfilling(const MatrixList& h_hat, const ComplexMatrix& f_rf, int n_s, double snr_linear)
{
    if (!(snr_linear > 0.0))
        throw Error(ErrorKind::invalid_argument, "svd_baseband_waterfilling: snr_linear must be > 0");
    const double noise_var = n_s / snr_linear;
    SvdBaseband out;
    for (const auto& h : h_hat) {
        if (n_s > std::min(h.rows(), h.cols()))
            throw Error(ErrorKind::invalid_argument, "svd_baseband_waterfilling: n_s exceeds min(M_r, M_t)");
        const SvdFactors f = svd(h);
        const RealVector sigma = f.singular_values.head(n_s);
        RealVector inv_gain(n_s);
        for (int i = 0; i < n_s; ++i)
            inv_gain(i) = sigma(i) > 0.0 ? n_s * noise_var / (sigma(i) * sigma(i)) : std::numeric_limits<double>::infinity();
        RealVector p = waterfill(inv_gain, n_s);
        bool flagged = false;
        if (!(p.sum() > 0.0) || !p.allFinite()) {
            p = RealVector::Zero(n_s);
            p(0) = n_s;
            flagged = true;
        }
        const ComplexMatrix f_bb = f.V.leftCols(n_s) * p.cwiseSqrt().cast<cplx>().asDiagonal();
        const double c = power_scale(f_rf, f_bb, n_s);
        out.f_bb.push_back(c * f_bb);
        out.w_bb.push_back(f.U.leftCols(n_s));
        out.powers.push_back(p);
        out.gains.push_back(sigma.cwiseAbs2().cwiseProduct(p));
        out.scale.push_back(c);
        out.fallback.push_back(flagged);
    }
    return out;
}

enum class AnalogScheme { fully_digital, ideal_somp, codebook_somp };
enum class BasebandScheme { gmd, svd_waterfilling };

inline const char* to_string(AnalogScheme a)
{
    switch (a) {
    case AnalogScheme::fully_digital: return "fully_digital";
    case AnalogScheme::ideal_somp: return "ideal_somp";
    case AnalogScheme::codebook_somp: return "codebook_somp";
    }
    return "?";
}

inline const char* to_string(BasebandScheme b)
{
    switch (b) {
    case BasebandScheme::gmd: return "gmd";
    case BasebandScheme::svd_waterfilling: return "svd_waterfilling";
    }
    return "?";
}

struct AnalogStage {
    ComplexMatrix f_rf, w_rf;
    std::vector<Eigen::Index> tx_atoms, rx_atoms;
    int duplicate_warnings = 0;
};

/// Fully digital: identity RF stages.
inline AnalogStage identity_analog(Eigen::Index n_t, Eigen::Index n_r)
{
    return {ComplexMatrix::Identity(n_t, n_t), ComplexMatrix::Identity(n_r, n_r), {}, {}, 0};
}

/// F_RF from the transmit dictionary against F_opt; W_RF the same way on W_opt at the receiver.
inline AnalogStage somp_analog(const MatrixList& h_eff, int n_s, int m_t, int m_r, const Codebook& tx_dict, const Codebook& rx_dict)
{
    const DigitalBeamformers opt = optimal_digital_beamformers(h_eff, n_s);
    SompResult tx = somp_select(opt.f_opt, tx_dict, m_t);
    SompResult rx = somp_select(opt.w_opt, rx_dict, m_r);
    return {std::move(tx.rf), std::move(rx.rf), std::move(tx.indices), std::move(rx.indices),
            tx.duplicate_warnings + rx.duplicate_warnings};
}

} // namespace gmdbf

#endif // GMDBF_BEAMFORMING_HPP
