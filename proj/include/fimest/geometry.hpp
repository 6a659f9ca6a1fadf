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

#include "fimest/types.hpp"

namespace fimest
{
    // Pointing of a surface: elevation/azimuth of its normal plus the spin about that normal.
    struct Orientation
    {
        double theta = 0.0; // elevation of the normal, [0, pi]
        double phi = 0.0;   // azimuth of the normal, [0, 2pi)
        double rho = 0.0;   // spin about the normal, [0, 2pi)

        // Reduces phi and rho modulo 2pi; throws std::invalid_argument if theta is outside [0, pi].
        static Orientation make(double theta, double phi, double rho);
    };

    // Local orthonormal frame of a surface. i and j span the aperture, k is the normal.
    struct Basis
    {
        Vec3 i = Vec3::UnitX();
        Vec3 j = Vec3::UnitY();
        Vec3 k = Vec3::UnitZ();
    };

    // Aperture description. All lengths are in carrier wavelengths.
    struct FimConfig
    {
        int nx = 1;
        int nz = 1;
        double dx = 0.5;
        double dz = 0.5;
        Orientation orientation{};
        Vec3 origin = Vec3::Zero();
        double y_max = 0.0; // maximum normal displacement of any element

        int size() const { return nx * nz; }
        void validate() const;
    };

    // Grid coordinates of an element; x runs fastest in the flat index.
    struct GridIndex
    {
        int x = 0;
        int z = 0;
    };

    inline GridIndex grid_index(int n, int nx) { return {n % nx, n / nx}; }
    inline int flat_index(GridIndex g, int nx) { return g.x + g.z * nx; }

    /// Separable normal displacement of one time slot: element (x, z) moves by u[x] + v[z].
    struct MorphPattern
    {
        RVector u;
        RVector v;

        static MorphPattern zero(const FimConfig &cfg);

        double displacement(GridIndex g) const { return u[g.x] + v[g.z]; }

        /// Per-element displacements in flat (x-fastest) order.
        RVector flat() const;
    };

    Basis basis_from_orientation(const Orientation &o);

    /// Unmorphed element positions q_n = origin + x_n i + z_n j in flat order.
    std::vector<Vec3> element_positions(const FimConfig &cfg);

    /// Positions after displacing every element along the normal.
    /// Throws std::invalid_argument if the pattern has the wrong shape or exceeds y_max.
    std::vector<Vec3> morphed_positions(const FimConfig &cfg, const MorphPattern &p);

    /// Throws std::invalid_argument unless the pattern fits cfg and respects the deformation bound.
    void validate_pattern(const FimConfig &cfg, const MorphPattern &p);

    /// u and v i.i.d. uniform on [-y_max/2, y_max/2], so |u[x] + v[z]| <= y_max.
    MorphPattern sample_morph_pattern(const FimConfig &cfg, Rng &rng);

    /// Unit propagation direction for the given azimuth and elevation.
    Vec3 direction_vector(double azimuth, double elevation);
}
