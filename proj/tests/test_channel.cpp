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

#include "test_util.hpp"

#include <gmdbf/channel.hpp>

#include <gtest/gtest.h>

#include <sstream>

namespace gmdbf {
namespace {

SystemConfig small_config()
{
    SystemConfig c;
    c.n_t_y = 4;
    c.n_t_z = 2;
    c.n_r_y = 2;
    c.n_r_z = 2;
    c.n_u_y = 4;
    c.n_u_z = 4;
    c.m_t = c.m_r = c.n_s = 2;
    c.k_sc = 16;
    c.d_l = 8;
    c.n_c = 3;
    c.n_p = 4;
    return c;
}

TEST(UpaSteering, ZeroAnglesAllOnes)
{
    const ComplexVector a = upa_steering(0.0, 0.0, 2, 2);
    for (Eigen::Index i = 0; i < 4; ++i)
        EXPECT_EQ(a(i), cplx(0.5, 0.0));
}

TEST(UpaSteering, HalfPiAzimuth)
{
    // theta = pi/2, phi = 0, spacing 1/2: element n has phase pi n.
    const ComplexVector a = upa_steering(pi / 2.0, 0.0, 2, 1, 0.5);
    EXPECT_NEAR(std::abs(a(0) - cplx(1.0 / std::sqrt(2.0), 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1) - std::polar(1.0 / std::sqrt(2.0), pi)), 0.0, 1e-15);
}

TEST(UpaSteering, ElementOrderingZFastest)
{
    // theta = 0 removes the y term; index n * n_z + m carries phase pi m sin(phi).
    const double phi = 0.3;
    const ComplexVector a = upa_steering(0.0, phi, 3, 2, 0.5);
    for (int n = 0; n < 3; ++n)
        for (int m = 0; m < 2; ++m)
            EXPECT_NEAR(std::arg(a(n * 2 + m) / a(0)), pi * m * std::sin(phi), 1e-14);
}

TEST(UpaSteering, UnitNormForAllAngles)
{
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const ComplexVector a = upa_steering(rng.uniform(-pi, pi), rng.uniform(-pi, pi), 1 + rng.bits() % 9, 1 + rng.bits() % 9);
        EXPECT_NEAR(a.norm(), 1.0, 1e-14);
    }
    EXPECT_THROW(upa_steering(0.0, 0.0, 0, 2), Error);
}

TEST(Pulse, RaisedCosine)
{
    EXPECT_EQ(pulse_value(PulseShape::raised_cosine, 0.8, 0.0), 1.0);
    for (int d = 1; d < 10; ++d) {
        EXPECT_EQ(pulse_value(PulseShape::raised_cosine, 0.8, d), 0.0);
        EXPECT_EQ(pulse_value(PulseShape::sinc, 0.8, -d), 0.0);
    }
    // removable singularity at t = 1 / (2 beta)
    const double t0 = 1.0 / 1.6;
    EXPECT_NEAR(pulse_value(PulseShape::raised_cosine, 0.8, t0), pulse_value(PulseShape::raised_cosine, 0.8, t0 + 1e-7), 1e-6);
    EXPECT_EQ(pulse_value(PulseShape::rectangular, 0.8, 0.49), 1.0);
    EXPECT_EQ(pulse_value(PulseShape::rectangular, 0.8, 0.5), 0.0);
}

TEST(DrawChannel, LosOnlyIsRankOneSingleTap)
{
    SystemConfig c = small_config();
    c.n_c = 0;
    const ChannelRealization h = draw_channel(c, LinkKind::bs_to_ris, 7);
    ASSERT_EQ(h.paths.size(), 1u);
    EXPECT_TRUE(h.paths[0].is_los);
    EXPECT_EQ(h.paths[0].tau, 0.0);
    const RealVector s = Eigen::JacobiSVD<ComplexMatrix>(h.taps[0]).singularValues();
    EXPECT_GT(s(0), 0.0);
    EXPECT_LT(s(1), 1e-12 * s(0));
    for (int d = 1; d < c.d_l; ++d)
        EXPECT_LT(h.taps[d].norm(), 1e-12 * h.taps[0].norm());
}

TEST(DrawChannel, DimensionsAndPathCount)
{
    const SystemConfig c = small_config();
    const auto h1 = draw_channel(c, LinkKind::bs_to_ris, 1);
    const auto h2 = draw_channel(c, LinkKind::ris_to_ue, 2);
    const auto hd = draw_channel(c, LinkKind::bs_to_ue, 3, false);
    EXPECT_EQ(h1.rows(), c.n_u());
    EXPECT_EQ(h1.cols(), c.n_t());
    EXPECT_EQ(h2.rows(), c.n_r());
    EXPECT_EQ(h2.cols(), c.n_u());
    EXPECT_EQ(hd.rows(), c.n_r());
    EXPECT_EQ(hd.cols(), c.n_t());
    EXPECT_EQ(h1.paths.size(), static_cast<std::size_t>(c.num_paths()));
    EXPECT_EQ(hd.paths.size(), static_cast<std::size_t>(c.num_paths() - 1));
    for (const auto& p : hd.paths)
        EXPECT_FALSE(p.is_los);
    EXPECT_EQ(h1.taps.size(), static_cast<std::size_t>(c.d_l));
    EXPECT_EQ(h1.freq.size(), static_cast<std::size_t>(c.k_sc));
    for (const auto& p : h1.paths) {
        EXPECT_GE(p.tau, 0.0);
        EXPECT_LE(p.tau, c.d_l);
    }
}

TEST(DrawChannel, DftConsistency)
{
    const SystemConfig c = small_config();
    for (auto link : {LinkKind::bs_to_ris, LinkKind::ris_to_ue}) {
        const auto h = draw_channel(c, link, 99);
        double max_tap = 0.0;
        for (const auto& t : h.taps)
            max_tap = std::max(max_tap, t.norm());
        // independent naive DFT with unreduced exponent
        for (int k = 0; k < c.k_sc; ++k) {
            ComplexMatrix acc = ComplexMatrix::Zero(h.rows(), h.cols());
            for (int d = 0; d < c.d_l; ++d)
                acc += std::exp(cplx(0.0, -2.0 * pi * k * d / c.k_sc)) * h.taps[d];
            EXPECT_LE((h.freq[k] - acc).norm(), 1e-10 * max_tap);
        }
    }
}

TEST(DrawChannel, SeededReproducibility)
{
    const SystemConfig c = small_config();
    const auto a = draw_channel(c, LinkKind::bs_to_ris, 42);
    const auto b = draw_channel(c, LinkKind::bs_to_ris, 42);
    const auto d = draw_channel(c, LinkKind::bs_to_ris, 43);
    for (std::size_t k = 0; k < a.freq.size(); ++k)
        EXPECT_TRUE(a.freq[k] == b.freq[k]);
    EXPECT_FALSE(a.freq[0] == d.freq[0]);
}

TEST(DrawChannel, AngleJitterWithinSpread)
{
    SystemConfig c = small_config();
    c.n_c = 2;
    c.n_p = 200;
    const auto h = draw_channel(c, LinkKind::bs_to_ris, 5);
    const double hw = std::sqrt(3.0) * c.angle_spread;
    for (int cl = 0; cl < c.n_c; ++cl) {
        double mean = 0.0, sq = 0.0, lo = 1e9, hi = -1e9;
        for (int p = 0; p < c.n_p; ++p) {
            const double v = h.paths[1 + cl * c.n_p + p].aoa_az;
            mean += v;
            sq += v * v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        mean /= c.n_p;
        const double sd = std::sqrt(sq / c.n_p - mean * mean);
        EXPECT_LE(hi - lo, 2.0 * hw + 1e-12);
        EXPECT_NEAR(sd / c.angle_spread, 1.0, 0.15);
    }
}

TEST(DrawChannel, LosToNlosPowerRatio)
{
    // E|alpha_0|^2 / E|alpha_cp|^2 = 1 / 10^-mu = 10^2.3 = 199.5
    const SystemConfig c; // reference configuration: n_c = 7, n_p = 10, mu = 2.3
    double los = 0.0, nlos = 0.0;
    std::size_t n_nlos = 0;
    const int draws = 200;
    for (int i = 0; i < draws; ++i) {
        SystemConfig small = c;
        small.n_t_y = small.n_t_z = 2;
        small.n_u_y = small.n_u_z = 2;
        small.m_t = small.m_r = small.n_s = 1;
        small.n_r_y = small.n_r_z = 1;
        const auto h = draw_channel(small, LinkKind::bs_to_ris, 1000 + i);
        for (const auto& p : h.paths) {
            if (p.is_los) {
                los += std::norm(p.alpha);
            } else {
                nlos += std::norm(p.alpha);
                ++n_nlos;
            }
        }
    }
    const double ratio = (los / draws) / (nlos / n_nlos);
    EXPECT_NEAR(ratio / std::pow(10.0, 2.3), 1.0, 0.2);
}

TEST(EffectiveChannel, IdentityComposition)
{
    const MatrixList h1{ComplexMatrix::Identity(3, 3)}, h2{ComplexMatrix::Identity(3, 3)};
    const auto out = effective_channel(h1, h2, ComplexVector::Ones(3));
    EXPECT_TRUE(out[0] == ComplexMatrix::Identity(3, 3));
}

TEST(EffectiveChannel, GlobalPhaseScalesExactly)
{
    Rng rng(3);
    const MatrixList h1{test::random_matrix(rng, 4, 3)}, h2{test::random_matrix(rng, 2, 4)};
    RisPhases phi{RealVector::Zero(4)};
    const auto base = effective_channel(h1, h2, phi.diagonal());
    const cplx g = std::polar(1.0, 0.7);
    const auto rotated = effective_channel(h1, h2, (g * phi.diagonal()).eval());
    EXPECT_LT((rotated[0] - g * base[0]).norm(), 1e-14);
}

TEST(EffectiveChannel, MatchesNaiveTripleProduct)
{
    Rng rng(4);
    const int n_t = 3, n_u = 5, n_r = 2;
    MatrixList h1, h2;
    for (int k = 0; k < 3; ++k) {
        h1.push_back(test::random_matrix(rng, n_u, n_t));
        h2.push_back(test::random_matrix(rng, n_r, n_u));
    }
    RisPhases phi{RealVector(n_u)};
    for (int j = 0; j < n_u; ++j)
        phi.phases(j) = rng.uniform(0.0, two_pi);
    const auto out = effective_channel(h1, h2, phi.diagonal());
    for (int k = 0; k < 3; ++k)
        for (int r = 0; r < n_r; ++r)
            for (int t = 0; t < n_t; ++t) {
                cplx acc = 0.0;
                for (int u = 0; u < n_u; ++u)
                    acc += h2[k](r, u) * std::exp(cplx(0.0, phi.phases(u))) * h1[k](u, t);
                EXPECT_NEAR(std::abs(out[k](r, t) - acc), 0.0, 1e-12);
            }
}

TEST(EffectiveChannel, DimensionMismatch)
{
    const MatrixList h1{ComplexMatrix::Identity(3, 3)}, h2{ComplexMatrix::Identity(2, 2)};
    EXPECT_THROW(effective_channel(h1, h2, ComplexVector::Ones(3)), Error);
    EXPECT_THROW(effective_channel(h1, MatrixList{}, ComplexVector::Ones(3)), Error);
}

TEST(PerturbChannel, ZeroVarianceIsIdentity)
{
    const auto h = draw_channel(small_config(), LinkKind::ris_to_ue, 1);
    const PerturbedChannel p = perturb_channel(h, {0.0}, 5);
    EXPECT_TRUE(std::isinf(p.ncpe_db) && p.ncpe_db < 0);
    for (std::size_t k = 0; k < h.freq.size(); ++k)
        EXPECT_TRUE(p.channel.freq[k] == h.freq[k]);
    EXPECT_THROW(perturb_channel(h, {-1.0}, 5), Error);
}

TEST(PerturbChannel, ReportedNcpeMatchesDefinition)
{
    const auto h = draw_channel(small_config(), LinkKind::bs_to_ris, 2);
    const PerturbedChannel p = perturb_channel(h, {sigma_sq_for_ncpe(h, -10.0)}, 9);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < h.freq.size(); ++k) {
        num += (p.channel.freq[k] - h.freq[k]).squaredNorm();
        den += h.freq[k].squaredNorm();
    }
    EXPECT_EQ(p.ncpe_db, 10.0 * std::log10(num / den));
    EXPECT_NEAR(p.ncpe_db, -10.0, 0.3);
    EXPECT_TRUE(p.channel.taps.empty());
}

TEST(PerturbChannel, FourfoldVarianceAddsSixDb)
{
    const auto h = draw_channel(small_config(), LinkKind::bs_to_ris, 3);
    const double base = sigma_sq_for_ncpe(h, -20.0);
    double sum1 = 0.0, sum4 = 0.0;
    for (int i = 0; i < 100; ++i) {
        sum1 += perturb_channel(h, {base}, 100 + i).ncpe_db;
        sum4 += perturb_channel(h, {4.0 * base}, 500 + i).ncpe_db;
    }
    EXPECT_NEAR((sum4 - sum1) / 100.0, 10.0 * std::log10(4.0), 0.5);
}

TEST(ChannelDump, RoundTrip)
{
    const auto h = draw_channel(small_config(), LinkKind::ris_to_ue, 17);
    std::stringstream ss;
    write_channel_dump(ss, h);
    const auto back = read_channel_dump(ss);
    ASSERT_EQ(back.paths.size(), h.paths.size());
    for (std::size_t l = 0; l < h.paths.size(); ++l) {
        EXPECT_EQ(back.paths[l].alpha, h.paths[l].alpha);
        EXPECT_EQ(back.paths[l].aod_el, h.paths[l].aod_el);
        EXPECT_EQ(back.paths[l].is_los, h.paths[l].is_los);
    }
    for (std::size_t d = 0; d < h.taps.size(); ++d)
        EXPECT_TRUE(back.taps[d] == h.taps[d]);
    for (std::size_t k = 0; k < h.freq.size(); ++k)
        EXPECT_LT((back.freq[k] - h.freq[k]).norm(), 1e-10 * h.freq[k].norm());

    std::stringstream bad("# gmdbf channel dump v1\nbogus 1 2\n");
    EXPECT_THROW(read_channel_dump(bad), Error);
}

TEST(SystemConfig, Validation)
{
    SystemConfig c;
    EXPECT_NO_THROW(c.validate());
    c.n_s = 4;
    EXPECT_THROW(c.validate(), Error);
    c = SystemConfig{};
    c.d_l = 65;
    EXPECT_THROW(c.validate(), Error);
    c = SystemConfig{};
    c.rho = 0;
    EXPECT_THROW(c.validate(), Error);
}

} // namespace
} // namespace gmdbf
