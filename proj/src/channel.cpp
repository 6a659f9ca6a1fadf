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
#include "fimest/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace fimest
{
    namespace
    {
        cdouble unit_phase(double cycles)
        {
            const double a = kTwoPi * cycles;
            return {std::cos(a), std::sin(a)};
        }

        void check_pattern_shape(const FimConfig &cfg, const MorphPattern &p)
        {
            if (p.u.size() != cfg.nx || p.v.size() != cfg.nz)
                throw std::invalid_argument("morph pattern shape does not match the FIM grid");
        }
    }

    Fim::Fim(FimConfig cfg) : config(std::move(cfg)), basis(basis_from_orientation(config.orientation))
    {
        config.validate();
    }

    CVector PathSet::gains() const
    {
        CVector g(size());
        for (int l = 0; l < size(); ++l)
            g[l] = paths[static_cast<std::size_t>(l)].gain;
        return g;
    }

    void PathSet::validate() const
    {
        if (paths.empty())
            throw std::invalid_argument("a path set needs at least one path");
        for (const auto &p : paths)
        {
            if (!std::isfinite(p.tx_azimuth) || !std::isfinite(p.tx_elevation) || !std::isfinite(p.rx_azimuth) ||
                !std::isfinite(p.rx_elevation))
                throw std::invalid_argument("path angles must be finite");
            if (!std::isfinite(p.gain.real()) || !std::isfinite(p.gain.imag()))
                throw std::invalid_argument("path gains must be finite");
        }
    }

    bool PathSet::directions_distinct(double tol) const
    {
        for (std::size_t a = 0; a < paths.size(); ++a)
            for (std::size_t b = a + 1; b < paths.size(); ++b)
            {
                const double dt = (paths[a].tx_direction() - paths[b].tx_direction()).norm();
                const double dr = (paths[a].rx_direction() - paths[b].rx_direction()).norm();
                if (dt <= tol && dr <= tol)
                    return false;
            }
        return true;
    }

    PathSet sample_paths(int count, Rng &rng)
    {
        if (count < 1)
            throw std::invalid_argument("path count must be positive");
        std::uniform_real_distribution<double> angle(0.0, kPi);
        PathSet set;
        set.paths.resize(static_cast<std::size_t>(count));
        for (auto &p : set.paths)
        {
            p.tx_azimuth = angle(rng);
            p.tx_elevation = angle(rng);
            p.rx_azimuth = angle(rng);
            p.rx_elevation = angle(rng);
            p.gain = complex_gaussian(rng);
        }
        return set;
    }

    CVector steering_unmorphed(const FimConfig &cfg, const Basis &basis, const Vec3 &dir)
    {
        const double pi_ = basis.i.dot(dir);
        const double pj = basis.j.dot(dir);
        CVector s(cfg.size());
        for (int n = 0; n < cfg.size(); ++n)
        {
            const GridIndex g = grid_index(n, cfg.nx);
            s[n] = unit_phase(cfg.dx * g.x * pi_ + cfg.dz * g.z * pj);
        }
        return s;
    }

    CVector morph_response(const FimConfig &cfg, const Basis &basis, const MorphPattern &p, const Vec3 &dir)
    {
        check_pattern_shape(cfg, p);
        const double pk = basis.k.dot(dir);
        CVector f(cfg.size());
        for (int n = 0; n < cfg.size(); ++n)
            f[n] = unit_phase(p.displacement(grid_index(n, cfg.nx)) * pk);
        return f;
    }

    CVector morphed_steering(const FimConfig &cfg, const Basis &basis, const MorphPattern &p, const Vec3 &dir)
    {
        return steering_unmorphed(cfg, basis, dir).cwiseProduct(morph_response(cfg, basis, p, dir));
    }

    AxisFactors steering_factors_xz(const FimConfig &cfg, const Basis &basis, const MorphPattern &p, const Vec3 &dir)
    {
        check_pattern_shape(cfg, p);
        const double pi_ = basis.i.dot(dir);
        const double pj = basis.j.dot(dir);
        const double pk = basis.k.dot(dir);
        AxisFactors f{CVector(cfg.nx), CVector(cfg.nz)};
        // The common phase of u[0] moves to the z factor so that x starts at 1.
        for (int x = 0; x < cfg.nx; ++x)
            f.x[x] = unit_phase(cfg.dx * x * pi_ + (p.u[x] - p.u[0]) * pk);
        for (int z = 0; z < cfg.nz; ++z)
            f.z[z] = unit_phase(cfg.dz * z * pj + (p.v[z] + p.u[0]) * pk);
        return f;
    }

    CVector kron(const CVector &a, const CVector &b)
    {
        CVector out(a.size() * b.size());
        for (Index i = 0; i < a.size(); ++i)
            out.segment(i * b.size(), b.size()) = a[i] * b;
        return out;
    }

    SteeringMatrix steering_matrix(const Fim &fim, const MorphPattern &p, const PathSet &paths, Side side)
    {
        SteeringMatrix s(fim.size(), paths.size());
        for (int l = 0; l < paths.size(); ++l)
        {
            const Path &path = paths.paths[static_cast<std::size_t>(l)];
            const Vec3 dir = side == Side::Transmit ? path.tx_direction() : path.rx_direction();
            s.col(l) = morphed_steering(fim.config, fim.basis, p, dir);
        }
        return s;
    }

    AxisFactorMatrices axis_factor_matrices(const Fim &fim, const MorphPattern &p, const PathSet &paths, Side side)
    {
        AxisFactorMatrices m{CMatrix(fim.config.nx, paths.size()), CMatrix(fim.config.nz, paths.size())};
        for (int l = 0; l < paths.size(); ++l)
        {
            const Path &path = paths.paths[static_cast<std::size_t>(l)];
            const Vec3 dir = side == Side::Transmit ? path.tx_direction() : path.rx_direction();
            const AxisFactors f = steering_factors_xz(fim.config, fim.basis, p, dir);
            m.x.col(l) = f.x;
            m.z.col(l) = f.z;
        }
        return m;
    }

    ChannelMatrix channel_matrix(const Fim &tx, const Fim &rx, const MorphPattern &tx_pattern,
                                 const MorphPattern &rx_pattern, const PathSet &paths)
    {
        paths.validate();
        const SteeringMatrix a = steering_matrix(rx, rx_pattern, paths, Side::Receive);
        const SteeringMatrix b = steering_matrix(tx, tx_pattern, paths, Side::Transmit);
        return a * paths.gains().asDiagonal() * b.transpose();
    }
}
