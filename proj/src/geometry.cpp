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
#include "fimest/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fimest
{
    namespace
    {
        // Rounding slack when comparing sampled displacements with the bound.
        constexpr double kBoundSlack = 1e-12;

        double wrap_two_pi(double a)
        {
            double r = std::fmod(a, kTwoPi);
            if (r < 0.0)
                r += kTwoPi;
            if (r >= kTwoPi)
                r = 0.0;
            return r;
        }
    }

    Orientation Orientation::make(double theta, double phi, double rho)
    {
        if (!std::isfinite(theta) || !std::isfinite(phi) || !std::isfinite(rho))
            throw std::invalid_argument("orientation angles must be finite");
        if (theta < 0.0 || theta > kPi)
            throw std::invalid_argument("orientation elevation must lie in [0, pi], got " + std::to_string(theta));
        return {theta, wrap_two_pi(phi), wrap_two_pi(rho)};
    }

    void FimConfig::validate() const
    {
        if (nx < 1 || nz < 1)
            throw std::invalid_argument("FIM grid needs at least one element per axis");
        if (!(dx > 0.0) || !(dz > 0.0))
            throw std::invalid_argument("FIM element spacings must be positive");
        if (!(y_max >= 0.0) || !std::isfinite(y_max))
            throw std::invalid_argument("FIM maximum deformation must be finite and non-negative");
        if (orientation.theta < 0.0 || orientation.theta > kPi)
            throw std::invalid_argument("FIM orientation elevation must lie in [0, pi]");
    }

    MorphPattern MorphPattern::zero(const FimConfig &cfg)
    {
        return {RVector::Zero(cfg.nx), RVector::Zero(cfg.nz)};
    }

    RVector MorphPattern::flat() const
    {
        const auto nx = static_cast<int>(u.size());
        const auto nz = static_cast<int>(v.size());
        RVector y(nx * nz);
        for (int n = 0; n < nx * nz; ++n)
            y[n] = displacement(grid_index(n, nx));
        return y;
    }

    Basis basis_from_orientation(const Orientation &o)
    {
        const double st = std::sin(o.theta), ct = std::cos(o.theta);
        const double sp = std::sin(o.phi), cp = std::cos(o.phi);
        const double sr = std::sin(o.rho), cr = std::cos(o.rho);

        Basis b;
        b.k = Vec3(st * cp, st * sp, ct);
        b.i = Vec3(ct * cp * cr - sp * sr, ct * sp * cr + cp * sr, -st * cr);
        b.j = Vec3(-ct * cp * sr - sp * cr, -ct * sp * sr + cp * cr, st * sr);
        return b;
    }

    std::vector<Vec3> element_positions(const FimConfig &cfg)
    {
        cfg.validate();
        const Basis b = basis_from_orientation(cfg.orientation);
        std::vector<Vec3> pos;
        pos.reserve(static_cast<std::size_t>(cfg.size()));
        for (int n = 0; n < cfg.size(); ++n)
        {
            const GridIndex g = grid_index(n, cfg.nx);
            pos.push_back(cfg.origin + cfg.dx * g.x * b.i + cfg.dz * g.z * b.j);
        }
        return pos;
    }

    void validate_pattern(const FimConfig &cfg, const MorphPattern &p)
    {
        if (p.u.size() != cfg.nx || p.v.size() != cfg.nz)
            throw std::invalid_argument("morph pattern shape does not match the FIM grid");
        for (int n = 0; n < cfg.size(); ++n)
        {
            const double y = p.displacement(grid_index(n, cfg.nx));
            if (!std::isfinite(y) || std::abs(y) > cfg.y_max + kBoundSlack)
                throw std::invalid_argument("element " + std::to_string(n) + " displacement " + std::to_string(y) +
                                            " exceeds the deformation bound " + std::to_string(cfg.y_max));
        }
    }

    std::vector<Vec3> morphed_positions(const FimConfig &cfg, const MorphPattern &p)
    {
        validate_pattern(cfg, p);
        const Basis b = basis_from_orientation(cfg.orientation);
        auto pos = element_positions(cfg);
        for (int n = 0; n < cfg.size(); ++n)
            pos[static_cast<std::size_t>(n)] += p.displacement(grid_index(n, cfg.nx)) * b.k;
        return pos;
    }

    MorphPattern sample_morph_pattern(const FimConfig &cfg, Rng &rng)
    {
        if (!(cfg.y_max >= 0.0))
            throw std::invalid_argument("maximum deformation must be non-negative");
        MorphPattern p = MorphPattern::zero(cfg);
        if (cfg.y_max == 0.0)
            return p;
        std::uniform_real_distribution<double> half(-cfg.y_max / 2.0, cfg.y_max / 2.0);
        for (Index x = 0; x < p.u.size(); ++x)
            p.u[x] = half(rng);
        for (Index z = 0; z < p.v.size(); ++z)
            p.v[z] = half(rng);
        return p;
    }

    Vec3 direction_vector(double azimuth, double elevation)
    {
        const double se = std::sin(elevation);
        return {se * std::cos(azimuth), se * std::sin(azimuth), std::cos(elevation)};
    }
}
