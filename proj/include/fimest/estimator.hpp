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

#include <optional>
#include <string>
#include <vector>

#include "fimest/tensor.hpp"
#include "fimest/training.hpp"

namespace fimest
{
    struct AlsOptions
    {
        int max_outer_iterations = 200;
        double tolerance = 1e-8; // on the relative change of the total squared residual
        int restarts = 3;
        std::uint64_t seed = 0;
        bool algebraic_start = true; // first restart starts from a closed-form (GEVD) solution
        bool trace_substeps = false;

        void validate() const;
    };

    /// Sum of ranks of the three factors against 2L + 2. Phase 1 dims are (Nx, Nz, M),
    /// phase 2 dims are (N, Mx, Mz); each factor's rank is min(dim, L).
    bool kruskal_check(int phase, const Dims3 &dims, int paths);

    // The per-slot factor pair of one phase: (A_i^x, A_i^z) in phase 1, (B_j^x, B_j^z) in phase 2.
    struct SlotFactors
    {
        CMatrix x;
        CMatrix z;
    };

    // Factors of a set of tensors that share one mode.
    struct PhaseState
    {
        CMatrix shared; // B in phase 1, A in phase 2
        std::vector<SlotFactors> slots;
    };

    // Unfoldings of one phase's observation tensors, computed once per estimation.
    class PhaseData
    {
    public:
        // shared_mode is 3 for phase 1 and 1 for phase 2. The two remaining modes are the
        // per-slot x-axis (lower mode) and z-axis (higher mode) factors.
        PhaseData(const std::vector<Tensor3> &tensors, int shared_mode);

        static PhaseData phase1(const TrainingFrame &frame) { return PhaseData(frame.phase1, 3); }
        static PhaseData phase2(const TrainingFrame &frame) { return PhaseData(frame.phase2, 1); }

        int shared_mode() const { return shared_mode_; }
        int x_mode() const { return x_mode_; }
        int z_mode() const { return z_mode_; }
        const Dims3 &dims() const { return dims_; }
        Index dim(int mode) const { return dims_[static_cast<std::size_t>(mode - 1)]; }
        std::size_t slots() const { return tensors_.size(); }
        const Tensor3 &tensor(std::size_t i) const { return tensors_[i]; }
        const CMatrix &unfolding(std::size_t slot, int mode) const;
        const CMatrix &stacked_shared() const { return stacked_; }
        double energy() const { return energy_; }

    private:
        std::vector<Tensor3> tensors_;
        std::vector<std::array<CMatrix, 3>> unfoldings_;
        CMatrix stacked_; // shared-mode unfoldings concatenated along columns
        Dims3 dims_{};
        int shared_mode_ = 3;
        int x_mode_ = 1;
        int z_mode_ = 2;
        double energy_ = 0.0;
    };

    struct UpdateReport
    {
        double residual = 0.0;        // phase residual after the shared-factor update
        bool rank_deficient = false;  // any least-squares solve was truncated
        std::vector<double> substeps; // phase residual after each substep (trace only)
    };

    /// Khatri-Rao coefficient of `mode` for one slot under the Tensor3 unfolding convention.
    CMatrix slot_coefficient(const PhaseData &data, const PhaseState &state, std::size_t slot, int mode);

    /// Squared residual of every tensor in the phase against the current factors.
    double phase_residual(const PhaseData &data, const PhaseState &state);

    /// One sweep: per-slot x then z factor updates, then the aggregated shared update.
    /// With trace set, substeps[0] is the residual before the sweep.
    UpdateReport coupled_update(const PhaseData &data, PhaseState &state, bool trace = false);

    /// Receive-side slot factors then B. `state.shared` is B, slots are (A_i^x, A_i^z).
    inline UpdateReport phase1_update(const PhaseData &data, PhaseState &state, bool trace = false)
    {
        return coupled_update(data, state, trace);
    }

    /// Transmit-side slot factors then A. `state.shared` is A, slots are (B_j^x, B_j^z).
    inline UpdateReport phase2_update(const PhaseData &data, PhaseState &state, bool trace = false)
    {
        return coupled_update(data, state, trace);
    }

    PhaseState random_start(const PhaseData &data, int paths, Rng &rng);

    /// Closed-form start from the first slot's tensor: generalized eigenvectors of two random
    /// mode-compressed slice mixtures give the shared factor, and each slot's pair is read off the
    /// rank-one Khatri-Rao columns. Exact for noiseless data. Needs the shared dimension and one
    /// per-slot dimension >= paths and the other per-slot dimension >= 2; otherwise std::nullopt.
    std::optional<PhaseState> algebraic_start(const PhaseData &data, int paths, Rng &rng);

    struct RestartTrace
    {
        std::vector<double> history;          // total residual per outer iteration
        std::vector<double> phase1_history;
        std::vector<double> phase2_history;
        std::vector<double> phase1_substeps;  // only with AlsOptions::trace_substeps
        std::vector<double> phase2_substeps;
        int iterations = 0;
        bool converged = false;
        bool algebraic = false;
    };

    struct EstimationResult
    {
        CMatrix a_hat;                      // N x L receive steering estimate
        CMatrix b_hat;                      // M x L transmit steering estimate, columns paired with a_hat
        std::vector<SlotFactors> rx_slots;  // (A_i^x, A_i^z), i = 1..I
        std::vector<SlotFactors> tx_slots;  // (B_j^x, B_j^z), j = 1..J
        CVector alpha_hat;
        std::vector<double> residual_history;
        std::vector<RestartTrace> restarts;
        double residual = 0.0;
        int iterations = 0;
        bool converged = false;
        bool rank_deficient = false;
        bool kruskal_phase1 = false;
        bool kruskal_phase2 = false;
        std::vector<std::string> warnings;
    };

    /// Two-phase PARAFAC-ALS. Each restart alternates phase-1 and phase-2 sweeps until the relative
    /// change of the total residual drops below the tolerance (or the residual reaches the
    /// round-off floor). The phases share no unknowns, so the best phase-1 and the best phase-2
    /// states are taken independently over restarts. Transmit columns are then paired with receive
    /// columns and the gains are fit against the static reference observation.
    EstimationResult run_two_phase_als(const TrainingFrame &frame, int paths, const AlsOptions &opts);

    /// Column permutation perm such that b_hat.col(perm[l]) belongs to the same path as a_hat.col(l).
    /// Uses the L x L coupling a_hat^+ X_ref (b_hat^T)^+ of column-normalized factors.
    std::vector<int> pair_columns(const CMatrix &a_hat, const CMatrix &b_hat, const CMatrix &reference);

    /// alpha = (b_hat <> a_hat)^+ vec(X_ref).
    CVector estimate_gains(const CMatrix &a_hat, const CMatrix &b_hat, const CMatrix &reference);

    /// H = a_hat diag(alpha) b_hat^T.
    CMatrix reconstruct_channel(const CMatrix &a_hat, const CMatrix &b_hat, const CVector &alpha);

    struct AlignedFactors
    {
        CMatrix aligned;
        std::vector<int> permutation; // estimate column used for reference column l
        CVector scalings;
        bool collision = false;       // two reference columns preferred the same estimate column
    };

    /// Greedy matching on normalized column correlation, then a per-column complex LS scale.
    AlignedFactors align_factors(const CMatrix &estimate, const CMatrix &reference);

    /// ||align(estimate) - reference||_F^2 / ||reference||_F^2.
    double nmse_steering(const CMatrix &estimate, const CMatrix &reference);

    /// ||estimate - reference||_F^2 / ||reference||_F^2.
    double nmse_channel(const CMatrix &estimate, const CMatrix &reference);
}
