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

#include "fimest/channel.hpp"
#include "fimest/tensor.hpp"

namespace fimest
{
    // Diagonal pilot matrix S = diag(s_1..s_M) with unit-modulus entries.
    struct PilotMatrix
    {
        CVector diag;

        Index size() const { return diag.size(); }
    };

    PilotMatrix generate_pilots(int m, Rng &rng);

    // Everything that stays fixed over one training frame.
    struct Link
    {
        Fim tx;
        Fim rx;
        PathSet paths;
        PilotMatrix pilots;
    };

    /// Noise variance giving the requested ratio of mean received sample power to noise power.
    /// An infinite SNR yields zero noise.
    double noise_variance_for_snr(const CMatrix &received, double snr_db);

    /// Transmits the pilots through h, adds circular Gaussian noise and applies the matched filter S^H.
    CMatrix observe(const ChannelMatrix &h, const PilotMatrix &pilots, double noise_variance, Rng &rng);

    /// N x M observation -> (Nx, Nz, M) tensor; the receive index splits x-fastest.
    Tensor3 split_receive(const CMatrix &x, int nx, int nz);

    /// N x M observation -> (N, Mx, Mz) tensor; the transmit index splits x-fastest.
    Tensor3 split_transmit(const CMatrix &x, int mx, int mz);

    /// Receive-morphing slot: observation of H(rx_pattern, static_tx) as an (Nx, Nz, M) tensor.
    Tensor3 phase1_slot(const Link &link, const MorphPattern &rx_pattern, const MorphPattern &static_tx,
                        double noise_variance, Rng &rng);

    /// Transmit-morphing slot: observation of H(static_rx, tx_pattern) as an (N, Mx, Mz) tensor.
    Tensor3 phase2_slot(const Link &link, const MorphPattern &static_rx, const MorphPattern &tx_pattern,
                        double noise_variance, Rng &rng);

    struct TrainingConfig
    {
        FimConfig tx;
        FimConfig rx;
        int slots_rx = 10; // I
        int slots_tx = 10; // J
        double snr_db = 10.0;

        void validate() const;
    };

    struct TrainingFrame
    {
        std::vector<Tensor3> phase1;          // I tensors, (Nx, Nz, M)
        std::vector<Tensor3> phase2;          // J tensors, (N, Mx, Mz)
        std::vector<MorphPattern> rx_patterns; // receive morph of each phase-1 slot
        std::vector<MorphPattern> tx_patterns; // transmit morph of each phase-2 slot
        MorphPattern static_rx;
        MorphPattern static_tx;
        CMatrix reference; // matched-filtered N x M observation with both surfaces static
        PilotMatrix pilots;
        double snr_db = 0.0;
        double noise_variance = 0.0;

        int slots_rx() const { return static_cast<int>(phase1.size()); }
        int slots_tx() const { return static_cast<int>(phase2.size()); }
    };

    /// Runs the two-phase protocol: I slots with the receiver morphing, J slots with the
    /// transmitter morphing, then one static reference slot. One pilot matrix serves all slots and
    /// the noise variance is fixed per frame from the static channel.
    TrainingFrame build_training_frame(const TrainingConfig &cfg, const PathSet &paths, Rng &rng);
}
