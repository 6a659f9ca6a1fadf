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
// Command-line driver for the Monte-Carlo experiments.
//
//   estimate run --config <path> [--snr <list>] [--paths <n>] [--trials <n>] [--seed <n>] [--out <path>]
//   estimate sweep <snr|array|morph> --config <path>
//
// Exit status: 0 on success, 1 on a configuration error, 2 on a runtime failure.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "fimest/config.hpp"
#include "fimest/harness.hpp"

namespace
{
    constexpr int kExitConfig = 1;
    constexpr int kExitRuntime = 2;

    struct Overrides
    {
        std::string config_path;
        std::optional<std::string> snr;
        std::optional<int> paths;
        std::optional<int> trials;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> out;
        std::optional<int> threads;
        bool timing = false;
    };

    void add_common(CLI::App &cmd, Overrides &o)
    {
        cmd.add_option("--config", o.config_path, "Key-value experiment config")->required();
        cmd.add_option("--snr", o.snr, "Comma-separated SNR list in dB (inf for noiseless)");
        cmd.add_option("--trials", o.trials, "Trials per sweep point");
        cmd.add_option("--seed", o.seed, "Base seed");
        cmd.add_option("--out", o.out, "Per-trial CSV path; aggregates go to <stem>_summary.csv");
        cmd.add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
        cmd.add_flag("--timing", o.timing, "Record per-trial wall time (output is then not reproducible)");
    }

    fimest::ExperimentConfig resolve(const Overrides &o)
    {
        fimest::ExperimentConfig cfg = fimest::load_config(o.config_path);
        if (o.snr)
            cfg.snr_db_list = fimest::parse_number_list(*o.snr);
        if (o.paths)
            cfg.paths = *o.paths;
        if (o.trials)
            cfg.trials = *o.trials;
        if (o.seed)
            cfg.seed = *o.seed;
        if (o.out)
            cfg.output_path = *o.out;
        if (o.threads)
            cfg.threads = *o.threads;
        if (o.timing)
            cfg.record_timing = true;
        cfg.validate();
        return cfg;
    }

    void report(const fimest::ExperimentConfig &cfg, const fimest::ExperimentOutput &out)
    {
        std::cout << "wrote " << out.trials.size() << " trial rows to " << cfg.output_path << " and "
                  << out.aggregates.size() << " aggregate rows to " << fimest::summary_path(cfg.output_path) << '\n';
        for (const auto &a : out.aggregates)
            std::cout << "  snr=" << fimest::format_double(a.point.snr_db) << " L=" << a.point.paths << " rx="
                      << a.point.rx.nx << 'x' << a.point.rx.nz << " y_max=" << fimest::format_double(a.point.y_max)
                      << "  mean NMSE dB: A " << a.mean_nmse_a_db << ", B " << a.mean_nmse_b_db << ", H "
                      << a.mean_nmse_channel_db << (a.failed ? "  (failed: " + std::to_string(a.failed) + ")" : "")
                      << '\n';
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Tensor channel estimation for morphing-surface MIMO links"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto *run = app.add_subcommand("run", "Grid over the configured SNR and y_max lists");
    add_common(*run, run_opts);
    run->add_option("--paths", run_opts.paths, "Number of propagation paths");

    Overrides sweep_opts;
    std::string kind_name;
    auto *sweep = app.add_subcommand("sweep", "Preset sweep: snr (paths x SNR), array, or morph");
    sweep->add_option("kind", kind_name, "snr | array | morph")->required();
    add_common(*sweep, sweep_opts);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    fimest::ExperimentConfig cfg;
    std::optional<fimest::SweepKind> kind;
    try
    {
        if (*run)
            cfg = resolve(run_opts);
        else
        {
            cfg = resolve(sweep_opts);
            kind = fimest::parse_sweep_kind(kind_name);
        }
    }
    catch (const fimest::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try
    {
        const fimest::ExperimentOutput out =
            kind ? fimest::run_points(cfg, fimest::preset_points(cfg, *kind)) : fimest::run_experiment(cfg);
        fimest::write_outputs(cfg, out);
        report(cfg, out);
        if (out.trials.empty())
        {
            std::cerr << "error: every trial failed\n";
            return kExitRuntime;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
