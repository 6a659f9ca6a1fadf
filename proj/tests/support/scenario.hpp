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

// Ground-truth links at the reference setup, shared by the estimator tests and the acceptance run.

#include "fimest/channel.hpp"
#include "fimest/estimator.hpp"
#include "fimest/training.hpp"

namespace scenario
{
    using namespace fimest;

    inline FimConfig surface(int nx, int nz, Orientation o, double y_max)
    {
        FimConfig c;
        c.nx = nx;
        c.nz = nz;
        c.orientation = o;
        c.y_max = y_max;
        return c;
    }

    inline TrainingConfig defaults(double snr_db, double y_max = 1.0, int rx_nx = 4, int rx_nz = 4)
    {
        TrainingConfig t;
        t.tx = surface(4, 4, Orientation::make(kPi / 4, kPi / 3, kPi / 6), y_max);
        t.rx = surface(rx_nx, rx_nz, Orientation::make(kPi / 3, kPi / 6, -kPi / 4), y_max);
        t.slots_rx = 10;
        t.slots_tx = 10;
        t.snr_db = snr_db;
        return t;
    }

    // Everything a test needs to compare an estimate with the truth.
    struct Truth
    {
        TrainingConfig config;
        PathSet paths;
        TrainingFrame frame;
        CMatrix a; // static receive steering
        CMatrix b; // static transmit steering
        CMatrix h; // static channel
        std::vector<AxisFactorMatrices> rx_axes; // per phase-1 slot
        std::vector<AxisFactorMatrices> tx_axes; // per phase-2 slot
    };

    inline Truth make(const TrainingConfig &cfg, int paths, std::uint64_t seed)
    {
        Truth t;
        t.config = cfg;
        Rng rng(seed);
        t.paths = sample_paths(paths, rng);
        t.frame = build_training_frame(cfg, t.paths, rng);
        const Fim tx(cfg.tx), rx(cfg.rx);
        t.a = steering_matrix(rx, t.frame.static_rx, t.paths, Side::Receive);
        t.b = steering_matrix(tx, t.frame.static_tx, t.paths, Side::Transmit);
        t.h = channel_matrix(tx, rx, t.frame.static_tx, t.frame.static_rx, t.paths);
        for (const auto &p : t.frame.rx_patterns)
            t.rx_axes.push_back(axis_factor_matrices(rx, p, t.paths, Side::Receive));
        for (const auto &p : t.frame.tx_patterns)
            t.tx_axes.push_back(axis_factor_matrices(tx, p, t.paths, Side::Transmit));
        return t;
    }

    // Phase-1 state at the truth: shared B diag(alpha), slots (A_i^x, A_i^z).
    inline PhaseState phase1_truth(const Truth &t)
    {
        PhaseState s;
        s.shared = t.b * t.paths.gains().asDiagonal();
        for (const auto &ax : t.rx_axes)
            s.slots.push_back({ax.x, ax.z});
        return s;
    }

    // Phase-2 state at the truth: shared A diag(alpha), slots (B_j^x, B_j^z).
    inline PhaseState phase2_truth(const Truth &t)
    {
        PhaseState s;
        s.shared = t.a * t.paths.gains().asDiagonal();
        for (const auto &ax : t.tx_axes)
            s.slots.push_back({ax.x, ax.z});
        return s;
    }
}
