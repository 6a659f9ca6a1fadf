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

#include <cmath>
#include <random>

#include "fimest/geometry.hpp"

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
}

TEST(Orientation, NormalMatchesHandEvaluation)
{
    // sin(pi/4)cos(pi/3), sin(pi/4)sin(pi/3), cos(pi/4)
    for (double rho : {0.0, 0.7, 4.0})
    {
        const Basis b = basis_from_orientation(Orientation::make(kPi / 4, kPi / 3, rho));
        EXPECT_NEAR(b.k.x(), 0.353553, 1e-6);
        EXPECT_NEAR(b.k.y(), 0.612372, 1e-6);
        EXPECT_NEAR(b.k.z(), 0.707107, 1e-6);
    }
}

TEST(Orientation, PoleGivesVerticalNormal)
{
    const Basis b = basis_from_orientation(Orientation::make(0, 0, 0));
    EXPECT_NEAR((b.k - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
}

TEST(Orientation, BasisIsOrthonormal)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> th(0.0, kPi), ang(-10.0, 10.0);
    for (int t = 0; t < 1000; ++t)
    {
        const Basis b = basis_from_orientation(Orientation::make(th(rng), ang(rng), ang(rng)));
        EXPECT_NEAR(b.i.dot(b.j), 0.0, 1e-12);
        EXPECT_NEAR(b.i.dot(b.k), 0.0, 1e-12);
        EXPECT_NEAR(b.j.dot(b.k), 0.0, 1e-12);
        EXPECT_NEAR(b.i.norm(), 1.0, 1e-12);
        EXPECT_NEAR(b.j.norm(), 1.0, 1e-12);
        EXPECT_NEAR(b.k.norm(), 1.0, 1e-12);
    }
}

TEST(Orientation, RejectsThetaOutsideRangeAndWrapsAngles)
{
    EXPECT_THROW(Orientation::make(-0.1, 0, 0), std::invalid_argument);
    EXPECT_THROW(Orientation::make(kPi + 0.1, 0, 0), std::invalid_argument);
    const Orientation o = Orientation::make(1.0, -kPi / 4, 5 * kPi);
    EXPECT_NEAR(o.phi, 7 * kPi / 4, 1e-12);
    EXPECT_NEAR(o.rho, kPi, 1e-12);
}

TEST(Positions, SingleElementSitsAtOrigin)
{
    FimConfig c = aperture(1, 1, Orientation::make(0.3, 0.2, 0.1));
    c.origin = Vec3(1, 2, 3);
    const auto q = element_positions(c);
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(q[0], c.origin);
}

TEST(Positions, TwoElementsAlongI)
{
    const FimConfig c = aperture(2, 1, Orientation::make(0, 0, 0));
    const Basis b = basis_from_orientation(c.orientation);
    const auto q = element_positions(c);
    ASSERT_EQ(q.size(), 2u);
    EXPECT_NEAR(q[0].norm(), 0.0, 1e-15);
    EXPECT_NEAR((q[1] - 0.5 * b.i).norm(), 0.0, 1e-15);
}

TEST(Positions, OffsetsStayInAperturePlane)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> th(0.0, kPi), ang(0.0, 2 * kPi);
    for (int t = 0; t < 50; ++t)
    {
        FimConfig c = aperture(1 + t % 5, 1 + t % 3, Orientation::make(th(rng), ang(rng), ang(rng)));
        c.dx = 0.3 + 0.01 * t;
        const Basis b = basis_from_orientation(c.orientation);
        const auto q = element_positions(c);
        for (const auto &p : q)
            for (const auto &r : q)
                EXPECT_NEAR((p - r).dot(b.k), 0.0, 1e-12);
    }
}

TEST(Positions, FlatIndexRoundTrip)
{
    for (int nx = 1; nx <= 6; ++nx)
        for (int nz = 1; nz <= 6; ++nz)
            for (int n = 0; n < nx * nz; ++n)
            {
                const GridIndex g = grid_index(n, nx);
                EXPECT_LT(g.x, nx);
                EXPECT_LT(g.z, nz);
                EXPECT_EQ(flat_index(g, nx), n);
            }
    EXPECT_EQ(grid_index(1, 4).x, 1); // x runs fastest
    EXPECT_EQ(grid_index(4, 4).z, 1);
}

TEST(Morph, ZeroPatternLeavesPositions)
{
    const FimConfig c = aperture(3, 2, Orientation::make(0.4, 1.0, 2.0));
    const auto q = element_positions(c);
    const auto m = morphed_positions(c, MorphPattern::zero(c));
    for (std::size_t n = 0; n < q.size(); ++n)
        EXPECT_EQ(q[n], m[n]);
}

TEST(Morph, DisplacementIsAlongNormal)
{
    Rng rng(11);
    const FimConfig c = aperture(4, 3, Orientation::make(1.1, 0.4, 2.5));
    const Basis b = basis_from_orientation(c.orientation);
    for (int t = 0; t < 20; ++t)
    {
        const MorphPattern p = sample_morph_pattern(c, rng);
        const auto q = element_positions(c);
        const auto m = morphed_positions(c, p);
        for (int n = 0; n < c.size(); ++n)
        {
            const GridIndex g = grid_index(n, c.nx);
            const Vec3 d = m[static_cast<std::size_t>(n)] - q[static_cast<std::size_t>(n)];
            EXPECT_NEAR((d - (p.u[g.x] + p.v[g.z]) * b.k).norm(), 0.0, 1e-12);
        }
    }
}

TEST(Morph, BoundViolationIsRejected)
{
    const FimConfig c = aperture(2, 2, Orientation::make(0, 0, 0), 1.0);
    MorphPattern p = MorphPattern::zero(c);
    p.u[0] = 0.8;
    p.v[0] = 0.8;
    EXPECT_THROW(validate_pattern(c, p), std::invalid_argument);
    EXPECT_THROW(morphed_positions(c, p), std::invalid_argument);
    p.v[0] = 0.2;
    EXPECT_NO_THROW(validate_pattern(c, p));
}

TEST(Morph, WrongShapeIsRejected)
{
    const FimConfig c = aperture(2, 3, Orientation::make(0, 0, 0));
    MorphPattern p = MorphPattern::zero(c);
    p.u = RVector::Zero(3);
    EXPECT_THROW(validate_pattern(c, p), std::invalid_argument);
}

TEST(Sampler, ZeroRangeGivesZeroPattern)
{
    Rng rng(1);
    const MorphPattern p = sample_morph_pattern(aperture(4, 4, Orientation::make(0, 0, 0), 0.0), rng);
    EXPECT_EQ(p.u.size(), 4);
    EXPECT_EQ(p.u.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(p.v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sampler, RespectsBoundAndIsCentered)
{
    // y = u + v with u, v uniform on [-1/2, 1/2]: variance 1/6 per sample.
    Rng rng(2024);
    const FimConfig c = aperture(1, 1, Orientation::make(0, 0, 0), 1.0);
    const int n = 100000;
    double sum = 0.0, max_abs = 0.0;
    for (int s = 0; s < n; ++s)
    {
        const double y = sample_morph_pattern(c, rng).flat()(0);
        sum += y;
        max_abs = std::max(max_abs, std::abs(y));
    }
    EXPECT_LE(max_abs, 1.0);
    EXPECT_LE(std::abs(sum / n), 3.0 * std::sqrt(1.0 / 6.0 / n));
}

TEST(Sampler, NeverViolatesBound)
{
    for (std::uint64_t seed = 0; seed < 200; ++seed)
    {
        Rng rng(seed);
        const FimConfig c = aperture(5, 4, Orientation::make(0.5, 0.5, 0.5), 0.1 + 0.01 * static_cast<double>(seed));
        EXPECT_NO_THROW(validate_pattern(c, sample_morph_pattern(c, rng)));
    }
}

TEST(Sampler, DeterministicForSeed)
{
    const FimConfig c = aperture(4, 4, Orientation::make(0, 0, 0), 1.0);
    Rng a(99), b(99);
    const MorphPattern p = sample_morph_pattern(c, a), q = sample_morph_pattern(c, b);
    EXPECT_EQ(p.u, q.u);
    EXPECT_EQ(p.v, q.v);
}

TEST(Direction, PolesAndNorm)
{
    EXPECT_NEAR((direction_vector(0, 0) - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((direction_vector(kPi / 2, kPi / 2) - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> a(-10, 10);
    for (int t = 0; t < 100; ++t)
        EXPECT_NEAR(direction_vector(a(rng), a(rng)).norm(), 1.0, 1e-12);
}
