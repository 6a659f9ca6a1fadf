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

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fimest/config.hpp"

namespace fimest
{
    // One combination of swept parameters.
    struct SweepPoint
    {
        double snr_db = 10.0;
        int paths = 3;
        ArraySize rx{4, 4};
        ArraySize tx{4, 4};
        double y_max = 1.0;

        friend bool operator==(const SweepPoint &, const SweepPoint &) = default;
    };

    struct TrialRecord
    {
        int sweep_id = 0;
        int trial = 0;
        SweepPoint point;
        int slots_rx = 0;
        int slots_tx = 0;
        double nmse_a = 0.0;
        double nmse_b = 0.0;
        double nmse_channel = 0.0;
        int iterations = 0;
        bool converged = false;
        double wall_ms = 0.0;
    };

    struct AggregateRecord
    {
        int sweep_id = 0;
        SweepPoint point;
        int slots_rx = 0;
        int slots_tx = 0;
        int trials = 0; // successful trials
        int failed = 0;
        double mean_nmse_a_db = 0.0;
        double median_nmse_a_db = 0.0;
        double mean_nmse_b_db = 0.0;
        double median_nmse_b_db = 0.0;
        double mean_nmse_channel_db = 0.0;
        double median_nmse_channel_db = 0.0;
    };

    struct ExperimentOutput
    {
        std::vector<SweepPoint> points;
        std::vector<TrialRecord> trials; // ordered by (sweep_id, trial)
        std::vector<AggregateRecord> aggregates;
        std::vector<std::string> failures;
    };

    enum class SweepKind
    {
        Snr,   // path count x SNR
        Array, // receive array size x SNR
        Morph  // morph range x SNR
    };

    SweepKind parse_sweep_kind(std::string_view name);

    /// Warnings from the harness go here; stderr by default.
    void set_warning_sink(std::function<void(const std::string &)> sink);

    /// y_max list x SNR list at the configured path count and array sizes.
    std::vector<SweepPoint> grid_points(const ExperimentConfig &cfg);
    std::vector<SweepPoint> preset_points(const ExperimentConfig &cfg, SweepKind kind);

    /// Seed of one trial; depends on the point's values, not its position in a sweep.
    std::uint64_t trial_seed(std::uint64_t seed, const SweepPoint &point, int trial);

    /// Draws paths, simulates the training frame, runs the estimator and scores it.
    TrialRecord run_trial(const ExperimentConfig &cfg, const SweepPoint &point, int sweep_id, int trial);

    ExperimentOutput run_points(const ExperimentConfig &cfg, const std::vector<SweepPoint> &points);
    ExperimentOutput run_experiment(const ExperimentConfig &cfg);

    ExperimentOutput snr_vs_paths(const ExperimentConfig &cfg);
    ExperimentOutput array_size(const ExperimentConfig &cfg);
    ExperimentOutput morph_range(const ExperimentConfig &cfg);

    /// Mean and median per sweep point (linear averaging, reported in dB).
    std::vector<AggregateRecord> aggregate(const std::vector<SweepPoint> &points, const std::vector<TrialRecord> &trials,
                                           const std::vector<int> &failed_per_point);

    /// Shortest round-trip decimal form; independent of the global locale.
    std::string format_double(double v);

    extern const char *const kTrialCsvHeader;
    extern const char *const kAggregateCsvHeader;

    void write_trials_csv(std::ostream &out, const std::vector<TrialRecord> &trials);
    void write_aggregate_csv(std::ostream &out, const std::vector<AggregateRecord> &aggregates);

    /// Parses a per-trial CSV; throws std::runtime_error on a header or field mismatch.
    std::vector<TrialRecord> read_trials_csv(std::istream &in);

    /// "results.csv" -> "results_summary.csv".
    std::string summary_path(const std::string &trials_path);

    /// Writes the per-trial CSV to cfg.output_path and the aggregates next to it.
    void write_outputs(const ExperimentConfig &cfg, const ExperimentOutput &out);
}
