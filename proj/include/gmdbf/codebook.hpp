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

#ifndef GMDBF_CODEBOOK_HPP
#define GMDBF_CODEBOOK_HPP

#include "channel.hpp"

namespace gmdbf {

/// Beam dictionary: one unit-norm, constant-modulus atom per column.
struct Codebook {
    ComplexMatrix atoms;
    int rho = 1;
    int n_y = 1, n_z = 1;

    Eigen::Index size() const { return atoms.cols(); }
};

/// Oversampled 2D-DFT codebook on the phase grid.
///
/// Atom (p, q), stored in column p * (rho n_z) + q, has element (n, m) equal to
/// exp(j (n 2 pi p / (rho n_y) + m 2 pi q / (rho n_z))) / sqrt(n_y n_z), with the same element
/// ordering as upa_steering.
inline Codebook build_dft_codebook(int n_y, int n_z, int rho)
{
    if (n_y < 1 || n_z < 1 || rho < 1)
        throw Error(ErrorKind::invalid_argument, "build_dft_codebook: n_y, n_z, rho must be >= 1");
    const int grid_y = rho * n_y, grid_z = rho * n_z;
    const double norm = 1.0 / std::sqrt(static_cast<double>(n_y) * n_z);
    Codebook cb;
    cb.rho = rho;
    cb.n_y = n_y;
    cb.n_z = n_z;
    cb.atoms.resize(n_y * n_z, grid_y * grid_z);
    for (int p = 0; p < grid_y; ++p)
        for (int q = 0; q < grid_z; ++q) {
            const Eigen::Index col = static_cast<Eigen::Index>(p) * grid_z + q;
            for (int n = 0; n < n_y; ++n)
                for (int m = 0; m < n_z; ++m) {
                    // Reduce the phase index on the integer grid so nested grids give identical bits.
                    const long iy = (static_cast<long>(n) * p) % grid_y;
                    const long iz = (static_cast<long>(m) * q) % grid_z;
                    const double ph = two_pi * (static_cast<double>(iy) / grid_y + static_cast<double>(iz) / grid_z);
                    cb.atoms(n * n_z + m, col) = std::polar(norm, ph);
                }
        }
    return cb;
}

enum class ArraySide { transmit, receive };

/// Dictionary of the true steering vectors of every ray: AoD for the transmit side, AoA for
/// the receive side.
inline Codebook build_steering_dictionary(const std::vector<PathComponent>& paths, ArraySide side, int n_y, int n_z,
                                          double spacing_wavelengths = 0.5)
{
    if (paths.empty())
        throw Error(ErrorKind::invalid_argument, "build_steering_dictionary: empty path list");
    Codebook cb;
    cb.n_y = n_y;
    cb.n_z = n_z;
    cb.atoms.resize(static_cast<Eigen::Index>(n_y) * n_z, static_cast<Eigen::Index>(paths.size()));
    for (std::size_t l = 0; l < paths.size(); ++l) {
        const auto& p = paths[l];
        cb.atoms.col(l) = side == ArraySide::transmit
            ? upa_steering(p.aod_az, p.aod_el, n_y, n_z, spacing_wavelengths)
            : upa_steering(p.aoa_az, p.aoa_el, n_y, n_z, spacing_wavelengths);
    }
    return cb;
}

} // namespace gmdbf

#endif // GMDBF_CODEBOOK_HPP
