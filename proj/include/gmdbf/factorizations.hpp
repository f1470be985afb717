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

#ifndef GMDBF_FACTORIZATIONS_HPP
#define GMDBF_FACTORIZATIONS_HPP

#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace gmdbf {

/// Thin SVD  A = U diag(singular_values) V^H, singular values descending.
struct SvdFactors {
    ComplexMatrix U;
    RealVector singular_values;
    ComplexMatrix V;
};

/// Geometric mean decomposition of the rank-n_s part of a matrix: A_{n_s} = G R Q^H.
///
/// G and Q are semi-unitary with n_s columns, R is n_s x n_s upper triangular and every
/// diagonal entry of R equals r_bar, the geometric mean of the n_s largest singular values.
struct GmdFactors {
    ComplexMatrix G;
    ComplexMatrix R;
    ComplexMatrix Q;
    double r_bar = 0.0;
};

struct LeastSquaresSolution {
    ComplexMatrix X;
    Eigen::Index rank = 0;
    bool rank_deficient = false;
};

inline SvdFactors svd(const ComplexMatrix& a)
{
    require_finite(a, "svd input");
    Eigen::JacobiSVD<ComplexMatrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw Error(ErrorKind::factorization_failure, "SVD iteration did not converge");
    SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV()};
    if (!all_finite(f.U) || !all_finite(f.V) || !f.singular_values.allFinite())
        throw Error(ErrorKind::factorization_failure, "SVD produced non-finite factors");
    return f;
}

/// Upper bound below which a singular value is treated as numerically zero.
inline double numerical_rank_tolerance(const ComplexMatrix& a, double sigma_max)
{
    return static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon()
        * sigma_max;
}

namespace detail {

    /// Equalizes the diagonal of R = diag(sigma) in place with permutations and 2x2 Givens
    /// rotations. Left rotations accumulate into `left`, right rotations into `right`.
    inline void gmd_sweep(ComplexMatrix& r, ComplexMatrix& left, ComplexMatrix& right, double r_bar)
    {
        const Eigen::Index n = r.rows();
        for (Eigen::Index k = 0; k + 1 < n; ++k) {
            // Trailing block r(k:, k:) is still diagonal here.
            const double dk = r(k, k).real();
            Eigen::Index p = k + 1;
            for (Eigen::Index j = k + 2; j < n; ++j) {
                const double dj = r(j, j).real();
                const double dp = r(p, p).real();
                if (dk >= r_bar ? dj < dp : dj > dp)
                    p = j;
            }
            if (p != k + 1) {
                r.row(k + 1).swap(r.row(p));
                r.col(k + 1).swap(r.col(p));
                left.col(k + 1).swap(left.col(p));
                right.col(k + 1).swap(right.col(p));
            }

            const double d1 = r(k, k).real();
            const double d2 = r(k + 1, k + 1).real();
            double c = 1.0;
            double s = 0.0;
            const double denom = d1 * d1 - d2 * d2;
            if (std::abs(denom) > std::numeric_limits<double>::epsilon() * (d1 * d1 + d2 * d2)) {
                c = std::sqrt(std::clamp((r_bar * r_bar - d2 * d2) / denom, 0.0, 1.0));
                s = std::sqrt(std::max(0.0, 1.0 - c * c));
            }

            Eigen::Matrix2cd rot_right;
            rot_right << c, -s, s, c;
            Eigen::Matrix2cd rot_left;
            rot_left << c * d1 / r_bar, -s * d2 / r_bar, s * d2 / r_bar, c * d1 / r_bar;

            r.middleCols(k, 2) = (r.middleCols(k, 2) * rot_right).eval();
            r.middleRows(k, 2) = (rot_left.transpose() * r.middleRows(k, 2)).eval();
            left.middleCols(k, 2) = (left.middleCols(k, 2) * rot_left).eval();
            right.middleCols(k, 2) = (right.middleCols(k, 2) * rot_right).eval();
            r(k + 1, k) = 0.0;
        }
    }

} // namespace detail

/// GMD of the rank-n_s truncation of `a`, built from its SVD.
///
/// Throws rank_deficient when n_s exceeds the (numerical) rank and degenerate_input when a
/// singular value among the top n_s is exactly zero.
inline GmdFactors gmd(const ComplexMatrix& a, Eigen::Index n_s)
{
    require_finite(a, "gmd input");
    if (n_s < 1)
        throw Error(ErrorKind::invalid_argument, "gmd needs n_s >= 1");
    if (n_s > std::min(a.rows(), a.cols()))
        throw Error(ErrorKind::rank_deficient,
                    "n_s = " + std::to_string(n_s) + " exceeds min(rows, cols) of a "
                        + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " matrix");

    const SvdFactors f = svd(a);
    const RealVector sigma = f.singular_values.head(n_s);
    if (sigma(n_s - 1) == 0.0)
        throw Error(ErrorKind::degenerate_input, "zero singular value among the top n_s");
    if (sigma(n_s - 1) <= numerical_rank_tolerance(a, sigma(0)))
        throw Error(ErrorKind::rank_deficient, "n_s exceeds the numerical rank");

    GmdFactors out;
    out.r_bar = std::exp(sigma.array().log().mean());
    out.R = sigma.cast<cplx>().asDiagonal();
    out.G = f.U.leftCols(n_s);
    out.Q = f.V.leftCols(n_s);
    detail::gmd_sweep(out.R, out.G, out.Q, out.r_bar);

    // Diagonal of R real positive; any phase goes into G.
    for (Eigen::Index i = 0; i < n_s; ++i) {
        const cplx d = out.R(i, i);
        if (d.imag() != 0.0 || d.real() < 0.0) {
            const cplx ph = d / std::abs(d);
            out.R.row(i) *= std::conj(ph);
            out.G.col(i) *= ph;
            out.R(i, i) = std::abs(d);
        }
    }
    return out;
}

/// Least-squares solution of A X = B (least-norm when A is rank deficient).
inline LeastSquaresSolution pinv_solve(const ComplexMatrix& a, const ComplexMatrix& b)
{
    require_finite(a, "pinv_solve lhs");
    require_finite(b, "pinv_solve rhs");
    if (a.rows() != b.rows())
        throw Error(ErrorKind::dimension_mismatch, "pinv_solve: A and B row counts differ");
    Eigen::CompleteOrthogonalDecomposition<ComplexMatrix> cod(a);
    LeastSquaresSolution out;
    out.X = cod.solve(b);
    out.rank = cod.rank();
    out.rank_deficient = out.rank < a.cols();
    return out;
}

} // namespace gmdbf

#endif // GMDBF_FACTORIZATIONS_HPP
