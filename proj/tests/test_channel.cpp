// SPDX-License-Identifier: Apache-2.0
//
// fimest - tensor channel estimation for morphing-surface MIMO links
// Copyright (C) 2026 The fimest authors
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
#include <gtest/gtest.h>

#include <random>

#include <Eigen/SVD>

#include "fimest/channel.hpp"
#include "oracles.hpp"

using namespace fimest;

namespace
{
    FimConfig aperture(int nx, int nz, Orientation o, double y_max = 1.0)
    {
        FimConfig c;
        c.nx = nx;
        c.nz = nz;
        c.orientation = o;
        c.y_max = y_max;
        return c;
    }

    Orientation random_orientation(Rng &rng)
    {
        std::uniform_real_distribution<double> th(0.0, kPi), ang(0.0, 2 * kPi);
        return Orientation::make(th(rng), ang(rng), ang(rng));
    }

    Vec3 random_direction(Rng &rng)
    {
        std::uniform_real_distribution<double> ang(0.0, kPi);
        return direction_vector(ang(rng), ang(rng));
    }
}

TEST(Steering, NormalDirectionGivesOnes)
{
    const FimConfig c = aperture(4, 3, Orientation::make(0.7, 1.3, 0.4));
    const Basis b = basis_from_orientation(c.orientation);
    const CVector s = steering_unmorphed(c, b, b.k);
    EXPECT_NEAR((s - CVector::Ones(12)).norm(), 0.0, 1e-12);
}

TEST(Steering, TwoElementHandCase)
{
    const FimConfig c = aperture(2, 1, Orientation::make(0, 0, 0));
    const Basis b = basis_from_orientation(c.orientation);
    const Vec3 dir(1, 0, 0);
    const CVector s = steering_unmorphed(c, b, dir);
    ASSERT_EQ(s.size(), 2);
    EXPECT_NEAR(std::abs(s(0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s(1) - std::polar(1.0, kPi * b.i.dot(dir))), 0.0, 1e-12);
    EXPECT_NEAR((s - oracle::phases(element_positions(c), c.origin, dir)).norm(), 0.0, 1e-12);
}

TEST(Steering, UnmorphedMatchesPositionOracle)
{
    Rng rng(4);
    for (int t = 0; t < 50; ++t)
    {
        FimConfig c = aperture(1 + t % 4, 1 + (t / 4) % 4, random_orientation(rng));
        c.origin = Vec3(0.3, -1.0, 2.0);
        const Basis b = basis_from_orientation(c.orientation);
        const Vec3 dir = random_direction(rng);
        const CVector s = steering_unmorphed(c, b, dir);
        EXPECT_NEAR((s - oracle::phases(element_positions(c), c.origin, dir)).norm(), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(s(0) - 1.0), 0.0, 1e-15);
        EXPECT_NEAR((s.cwiseAbs() - RVector::Ones(s.size())).norm(), 0.0, 1e-12);
    }
}

TEST(MorphResponse, TrivialCases)
{
    Rng rng(8);
    const FimConfig c = aperture(4, 4, Orientation::make(0.9, 0.3, 1.7));
    const Basis b = basis_from_orientation(c.orientation);
    const Vec3 dir = random_direction(rng);
    EXPECT_NEAR((morph_response(c, b, MorphPattern::zero(c), dir) - CVector::Ones(16)).norm(), 0.0, 1e-15);
    const Vec3 in_plane = (0.6 * b.i + 0.8 * b.j).normalized();
    const MorphPattern p = sample_morph_pattern(c, rng);
    EXPECT_NEAR((morph_response(c, b, p, in_plane) - CVector::Ones(16)).norm(), 0.0, 1e-12);
}

TEST(MorphedSteering, ConsistencyAndPositionOracle)
{
    Rng rng(12);
    for (int t = 0; t < 100; ++t)
    {
        const FimConfig c = aperture(1 + t % 5, 1 + (t / 5) % 5, random_orientation(rng), 0.2 + 0.02 * t);
        const Basis b = basis_from_orientation(c.orientation);
        const Vec3 dir = random_direction(rng);
        const MorphPattern p = sample_morph_pattern(c, rng);
        const CVector full = morphed_steering(c, b, p, dir);
        const CVector plain = steering_unmorphed(c, b, dir);
        const CVector resp = morph_response(c, b, p, dir);
        EXPECT_NEAR((full - plain.cwiseProduct(resp)).norm(), 0.0, 1e-12);
        EXPECT_NEAR((resp - full.cwiseQuotient(plain)).norm(), 0.0, 1e-12);
        EXPECT_NEAR((full - oracle::phases(morphed_positions(c, p), c.origin, dir)).norm(), 0.0, 1e-12);
        EXPECT_NEAR((full.cwiseAbs() - RVector::Ones(full.size())).norm(), 0.0, 1e-12);
    }
    const FimConfig c = aperture(3, 3, Orientation::make(0.2, 0.2, 0.2));
    const Basis b = basis_from_orientation(c.orientation);
    const Vec3 dir = random_direction(rng);
    EXPECT_NEAR((morphed_steering(c, b, MorphPattern::zero(c), dir) - steering_unmorphed(c, b, dir)).norm(), 0.0,
                1e-15);
}

TEST(AxisFactors, KroneckerReconstruction)
{
    Rng rng(21);
    for (int t = 0; t < 100; ++t)
    {
        const FimConfig c = aperture(1 + t % 6, 1 + (t / 6) % 6, random_orientation(rng), 1.0);
        const Basis b = basis_from_orientation(c.orientation);
        const Vec3 dir = random_direction(rng);
        const MorphPattern p = sample_morph_pattern(c, rng);
        const AxisFactors f = steering_factors_xz(c, b, p, dir);
        ASSERT_EQ(f.x.size(), c.nx);
        ASSERT_EQ(f.z.size(), c.nz);
        EXPECT_NEAR((kron(f.z, f.x) - morphed_steering(c, b, p, dir)).norm(), 0.0, 1e-12);
        if (c.nx == 1)
        {
            EXPECT_NEAR(std::abs(f.x(0) - 1.0), 0.0, 1e-15);
            EXPECT_NEAR((f.z - morphed_steering(c, b, p, dir)).norm(), 0.0, 1e-12);
        }
    }
    const FimConfig c = aperture(3, 2, Orientation::make(0.5, 0.1, 0.0));
    const Basis b = basis_from_orientation(c.orientation);
    const AxisFactors f = steering_factors_xz(c, b, MorphPattern::zero(c), b.k);
    EXPECT_NEAR((f.x - CVector::Ones(3)).norm() + (f.z - CVector::Ones(2)).norm(), 0.0, 1e-12);
}

TEST(Kron, RightOperandFastest)
{
    CVector a(2), b(2);
    a << 1.0, 2.0;
    b << 3.0, 4.0;
    CVector expect(4);
    expect << 3.0, 4.0, 6.0, 8.0;
    EXPECT_EQ(kron(a, b), expect);
}

namespace
{
    // Direct sum of alpha_l a_l b_l^T from per-element phases.
    CMatrix channel_by_summation(const FimConfig &tx, const FimConfig &rx, const MorphPattern &tp,
                                 const MorphPattern &rp, const PathSet &paths)
    {
        const auto qt = morphed_positions(tx, tp);
        const auto qr = morphed_positions(rx, rp);
        CMatrix h = CMatrix::Zero(rx.size(), tx.size());
        for (const auto &p : paths.paths)
        {
            const CVector a = oracle::phases(qr, rx.origin, p.rx_direction());
            const CVector b = oracle::phases(qt, tx.origin, p.tx_direction());
            h += p.gain * a * b.transpose();
        }
        return h;
    }
}

TEST(Channel, MatchesSummationAndKhatriRaoForm)
{
    Rng rng(31);
    for (int t = 0; t < 30; ++t)
    {
        const FimConfig tc = aperture(2 + t % 3, 2 + t % 2, random_orientation(rng), 1.0);
        const FimConfig rc = aperture(3, 2 + t % 3, random_orientation(rng), 0.5);
        const Fim tx(tc), rx(rc);
        const PathSet paths = sample_paths(1 + t % 4, rng);
        const MorphPattern tp = sample_morph_pattern(tc, rng), rp = sample_morph_pattern(rc, rng);
        const CMatrix h = channel_matrix(tx, rx, tp, rp, paths);
        EXPECT_LE(oracle::rel_err(h, channel_by_summation(tc, rc, tp, rp, paths)), 1e-10);

        const CMatrix a = steering_matrix(rx, rp, paths, Side::Receive);
        const CMatrix b = steering_matrix(tx, tp, paths, Side::Transmit);
        const CVector vec_h = oracle::khatri_rao(b, a) * paths.gains();
        EXPECT_LE(oracle::rel_err(Eigen::Map<const CVector>(h.data(), h.size()), vec_h), 1e-10);
    }
}

TEST(Channel, SinglePathIsRankOne)
{
    Rng rng(41);
    const FimConfig c = aperture(4, 4, Orientation::make(kPi / 4, kPi / 3, kPi / 6));
    const Fim f(c);
    PathSet one = sample_paths(1, rng);
    one.paths[0].gain = 1.0;
    const MorphPattern z = MorphPattern::zero(c);
    const CMatrix h = channel_matrix(f, f, z, z, one);
    const CVector a = steering_unmorphed(c, f.basis, one.paths[0].rx_direction());
    const CVector b = steering_unmorphed(c, f.basis, one.paths[0].tx_direction());
    EXPECT_LE(oracle::rel_err(h, a * b.transpose()), 1e-12);
    Eigen::JacobiSVD<CMatrix> svd(h);
    EXPECT_LE(svd.singularValues()(1), 1e-10 * svd.singularValues()(0));
}

TEST(Channel, RankAtMostPathCount)
{
    Rng rng(43);
    const Fim tx(aperture(4, 4, Orientation::make(kPi / 4, kPi / 3, kPi / 6)));
    const Fim rx(aperture(4, 4, Orientation::make(kPi / 3, kPi / 6, -kPi / 4)));
    for (int t = 0; t < 20; ++t)
    {
        const PathSet paths = sample_paths(3, rng);
        const CMatrix h = channel_matrix(tx, rx, sample_morph_pattern(tx.config, rng),
                                         sample_morph_pattern(rx.config, rng), paths);
        Eigen::JacobiSVD<CMatrix> svd(h);
        EXPECT_LE(svd.singularValues()(3), 1e-10 * svd.singularValues()(0));
    }
}

TEST(Channel, LinearInGains)
{
    Rng rng(47);
    const Fim tx(aperture(3, 3, Orientation::make(0.3, 0.4, 0.5)));
    const Fim rx(aperture(2, 4, Orientation::make(1.3, 0.4, 0.5)));
    PathSet paths = sample_paths(3, rng);
    const MorphPattern tp = sample_morph_pattern(tx.config, rng), rp = sample_morph_pattern(rx.config, rng);
    const CMatrix h = channel_matrix(tx, rx, tp, rp, paths);
    const cdouble c(0.3, -1.7);
    for (auto &p : paths.paths)
        p.gain *= c;
    EXPECT_LE(oracle::rel_err(channel_matrix(tx, rx, tp, rp, paths), c * h), 1e-14);
}

TEST(Channel, ZeroMorphIsClassicalUpaChannel)
{
    Rng rng(53);
    const FimConfig tc = aperture(4, 4, Orientation::make(0.8, 0.2, 0.1));
    const FimConfig rc = aperture(4, 4, Orientation::make(0.1, 0.9, 0.3));
    const Fim tx(tc), rx(rc);
    const PathSet paths = sample_paths(3, rng);
    CMatrix h = CMatrix::Zero(16, 16);
    for (const auto &p : paths.paths)
        h += p.gain * oracle::phases(element_positions(rc), rc.origin, p.rx_direction()) *
             oracle::phases(element_positions(tc), tc.origin, p.tx_direction()).transpose();
    EXPECT_LE(oracle::rel_err(channel_matrix(tx, rx, MorphPattern::zero(tc), MorphPattern::zero(rc), paths), h),
              1e-10);
}

TEST(Paths, SamplerRangesAndDistinctness)
{
    Rng rng(61);
    const PathSet s = sample_paths(500, rng);
    for (const auto &p : s.paths)
    {
        for (double a : {p.tx_azimuth, p.tx_elevation, p.rx_azimuth, p.rx_elevation})
        {
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, kPi);
        }
    }
    EXPECT_NEAR(s.gains().squaredNorm() / 500.0, 1.0, 0.15);
    EXPECT_TRUE(s.directions_distinct());
    PathSet dup = sample_paths(2, rng);
    dup.paths[1] = dup.paths[0];
    EXPECT_FALSE(dup.directions_distinct());
    EXPECT_THROW(sample_paths(0, rng), std::invalid_argument);
}
