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
#pragma once

#include <vector>

#include "fimest/geometry.hpp"

namespace fimest
{
    // A configured surface with its frame evaluated once.
    struct Fim
    {
        FimConfig config;
        Basis basis;

        Fim() = default;
        explicit Fim(FimConfig cfg);

        int size() const { return config.size(); }
    };

    struct Path
    {
        double tx_azimuth = 0.0;
        double tx_elevation = 0.0;
        double rx_azimuth = 0.0;
        double rx_elevation = 0.0;
        cdouble gain{1.0, 0.0};

        Vec3 tx_direction() const { return direction_vector(tx_azimuth, tx_elevation); }
        Vec3 rx_direction() const { return direction_vector(rx_azimuth, rx_elevation); }
    };

    struct PathSet
    {
        std::vector<Path> paths;

        int size() const { return static_cast<int>(paths.size()); }
        CVector gains() const;

        /// Throws std::invalid_argument on an empty set or non-finite angles.
        void validate() const;

        /// False when two paths share (within tol) both their departure and arrival directions.
        bool directions_distinct(double tol = 1e-9) const;
    };

    /// Angles i.i.d. uniform on [0, pi] for all four angles; gains standard complex Gaussian.
    PathSet sample_paths(int count, Rng &rng);

    // Steering matrices: rows are elements, columns are paths; entries are pure phases.
    using SteeringMatrix = CMatrix;
    // N x M channel, receive elements along rows.
    using ChannelMatrix = CMatrix;

    /// exp(j 2pi (x_n <i,dir> + z_n <j,dir>)) for every element.
    CVector steering_unmorphed(const FimConfig &cfg, const Basis &basis, const Vec3 &dir);

    /// exp(j 2pi y_n <k,dir>): the phase picked up by displacing element n along the normal.
    CVector morph_response(const FimConfig &cfg, const Basis &basis, const MorphPattern &p, const Vec3 &dir);

    CVector morphed_steering(const FimConfig &cfg, const Basis &basis, const MorphPattern &p, const Vec3 &dir);

    // Per-axis factors of a morphed steering vector; kron(z, x) reproduces it and x(0) = 1.
    struct AxisFactors
    {
        CVector x;
        CVector z;
    };

    AxisFactors steering_factors_xz(const FimConfig &cfg, const Basis &basis, const MorphPattern &p, const Vec3 &dir);

    /// Kronecker product with the right operand running fastest.
    CVector kron(const CVector &a, const CVector &b);

    enum class Side
    {
        Transmit,
        Receive
    };

    /// Morphed steering vectors of every path for one side of the link.
    SteeringMatrix steering_matrix(const Fim &fim, const MorphPattern &p, const PathSet &paths, Side side);

    // Axis factor matrices (nx x L and nz x L) for every path.
    struct AxisFactorMatrices
    {
        CMatrix x;
        CMatrix z;
    };

    AxisFactorMatrices axis_factor_matrices(const Fim &fim, const MorphPattern &p, const PathSet &paths, Side side);

    /// H = sum_l alpha_l a~_l b~_l^T for the given morph of each surface.
    ChannelMatrix channel_matrix(const Fim &tx, const Fim &rx, const MorphPattern &tx_pattern,
                                 const MorphPattern &rx_pattern, const PathSet &paths);
}
