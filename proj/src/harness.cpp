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
#include "fimest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "fimest/channel.hpp"
#include "fimest/estimator.hpp"
#include "fimest/training.hpp"

namespace fimest
{
    const char *const kTrialCsvHeader = "sweep_id,trial,snr_db,L,rx_nx,rx_nz,tx_nx,tx_nz,I,J,y_max,nmse_A,nmse_B,"
                                        "nmse_channel,iterations,converged,wall_ms";
    const char *const kAggregateCsvHeader =
        "sweep_id,snr_db,L,rx_nx,rx_nz,tx_nx,tx_nz,I,J,y_max,trials,failed,mean_nmse_A_db,median_nmse_A_db,"
        "mean_nmse_B_db,median_nmse_B_db,mean_nmse_channel_db,median_nmse_channel_db";

    namespace
    {
        std::mutex g_sink_mutex;
        std::function<void(const std::string &)> g_sink = [](const std::string &msg) {
            std::cerr << "warning: " << msg << '\n';
        };

        void warn(const std::string &msg)
        {
            std::lock_guard lock(g_sink_mutex);
            if (g_sink)
                g_sink(msg);
        }

        constexpr std::uint64_t kAlsStream = 0xA15;

        double to_db(double linear) { return 10.0 * std::log10(linear); }

        double median(std::vector<double> v)
        {
            if (v.empty())
                return std::numeric_limits<double>::quiet_NaN();
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }

        double mean(const std::vector<double> &v)
        {
            if (v.empty())
                return std::numeric_limits<double>::quiet_NaN();
            double s = 0.0;
            for (double x : v)
                s += x;
            return s / static_cast<double>(v.size());
        }

        FimConfig surface(const ArraySize &size, const ExperimentConfig &cfg, const Orientation &o, double y_max)
        {
            FimConfig f;
            f.nx = size.nx;
            f.nz = size.nz;
            f.dx = cfg.dx;
            f.dz = cfg.dz;
            f.orientation = o;
            f.y_max = y_max;
            return f;
        }

        template <typename T> T parse_field(const std::string &s, const char *name)
        {
            T v{};
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size())
                throw std::runtime_error(std::string("bad value for column ") + name + ": '" + s + "'");
            return v;
        }
    }

    SweepKind parse_sweep_kind(std::string_view name)
    {
        if (name == "snr")
            return SweepKind::Snr;
        if (name == "array")
            return SweepKind::Array;
        if (name == "morph")
            return SweepKind::Morph;
        throw ConfigError("unknown sweep kind '" + std::string(name) + "' (expected snr, array or morph)");
    }

    void set_warning_sink(std::function<void(const std::string &)> sink)
    {
        std::lock_guard lock(g_sink_mutex);
        g_sink = std::move(sink);
    }

    std::vector<SweepPoint> grid_points(const ExperimentConfig &cfg)
    {
        std::vector<SweepPoint> pts;
        for (double y : cfg.y_max_list)
            for (double snr : cfg.snr_db_list)
                pts.push_back({snr, cfg.paths, cfg.rx, cfg.tx, y});
        return pts;
    }

    std::vector<SweepPoint> preset_points(const ExperimentConfig &cfg, SweepKind kind)
    {
        std::vector<SweepPoint> pts;
        const double y0 = cfg.y_max_list.front();
        switch (kind)
        {
        case SweepKind::Snr:
            for (int l : cfg.path_sweep)
                for (double snr : cfg.snr_db_list)
                    pts.push_back({snr, l, cfg.rx, cfg.tx, y0});
            break;
        case SweepKind::Array:
            for (const auto &rx : cfg.array_sweep)
                for (double snr : cfg.snr_db_list)
                    pts.push_back({snr, cfg.paths, rx, cfg.tx, y0});
            break;
        case SweepKind::Morph:
            for (double y : cfg.morph_sweep)
                for (double snr : cfg.snr_db_list)
                    pts.push_back({snr, cfg.paths, cfg.rx, cfg.tx, y});
            break;
        }
        return pts;
    }

    std::uint64_t trial_seed(std::uint64_t seed, const SweepPoint &p, int trial)
    {
        std::uint64_t h = mix64(std::bit_cast<std::uint64_t>(p.snr_db));
        h = mix64(h ^ static_cast<std::uint64_t>(p.paths));
        h = mix64(h ^ (static_cast<std::uint64_t>(p.rx.nx) << 32 | static_cast<std::uint32_t>(p.rx.nz)));
        h = mix64(h ^ (static_cast<std::uint64_t>(p.tx.nx) << 32 | static_cast<std::uint32_t>(p.tx.nz)));
        h = mix64(h ^ std::bit_cast<std::uint64_t>(p.y_max));
        return derive_seed(seed, h, static_cast<std::uint64_t>(trial));
    }

    TrialRecord run_trial(const ExperimentConfig &cfg, const SweepPoint &point, int sweep_id, int trial)
    {
        const std::uint64_t seed = trial_seed(cfg.seed, point, trial);
        Rng rng(seed);

        TrainingConfig tc;
        tc.tx = surface(point.tx, cfg, cfg.tx_orientation, point.y_max);
        tc.rx = surface(point.rx, cfg, cfg.rx_orientation, point.y_max);
        tc.slots_rx = cfg.slots_rx;
        tc.slots_tx = cfg.slots_tx;
        tc.snr_db = point.snr_db;

        const PathSet paths = sample_paths(point.paths, rng);
        if (!paths.directions_distinct())
            warn("sweep " + std::to_string(sweep_id) + " trial " + std::to_string(trial) +
                 ": two paths share their directions");
        const TrainingFrame frame = build_training_frame(tc, paths, rng);

        AlsOptions opts = cfg.als;
        opts.seed = derive_seed(seed, kAlsStream, cfg.als.seed);

        const auto t0 = std::chrono::steady_clock::now();
        const EstimationResult est = run_two_phase_als(frame, point.paths, opts);
        const auto t1 = std::chrono::steady_clock::now();

        const Fim tx(tc.tx), rx(tc.rx);
        const CMatrix a = steering_matrix(rx, frame.static_rx, paths, Side::Receive);
        const CMatrix b = steering_matrix(tx, frame.static_tx, paths, Side::Transmit);
        const CMatrix h = channel_matrix(tx, rx, frame.static_tx, frame.static_rx, paths);

        TrialRecord rec;
        rec.sweep_id = sweep_id;
        rec.trial = trial;
        rec.point = point;
        rec.slots_rx = cfg.slots_rx;
        rec.slots_tx = cfg.slots_tx;
        rec.nmse_a = nmse_steering(est.a_hat, a);
        rec.nmse_b = nmse_steering(est.b_hat, b);
        rec.nmse_channel = nmse_channel(reconstruct_channel(est.a_hat, est.b_hat, est.alpha_hat), h);
        rec.iterations = est.iterations;
        rec.converged = est.converged;
        rec.wall_ms = cfg.record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
        if (!std::isfinite(rec.nmse_a) || !std::isfinite(rec.nmse_b) || !std::isfinite(rec.nmse_channel))
            throw std::runtime_error("non-finite NMSE");
        return rec;
    }

    ExperimentOutput run_points(const ExperimentConfig &cfg, const std::vector<SweepPoint> &points)
    {
        cfg.validate();
        ExperimentOutput out;
        out.points = points;

        for (std::size_t s = 0; s < points.size(); ++s)
        {
            const auto &p = points[s];
            const int n = p.rx.nx * p.rx.nz, m = p.tx.nx * p.tx.nz;
            if (!kruskal_check(1, {p.rx.nx, p.rx.nz, m}, p.paths) || !kruskal_check(2, {n, p.tx.nx, p.tx.nz}, p.paths))
                warn("sweep " + std::to_string(s) + ": dimensions do not meet the Kruskal rank condition for L = " +
                     std::to_string(p.paths));
        }

        const std::size_t per_point = static_cast<std::size_t>(cfg.trials);
        const std::size_t jobs = points.size() * per_point;
        std::vector<std::optional<TrialRecord>> results(jobs);
        std::vector<std::string> errors(jobs);

        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t k = next++; k < jobs; k = next++)
            {
                const auto s = k / per_point;
                const auto t = static_cast<int>(k % per_point);
                try
                {
                    results[k] = run_trial(cfg, points[s], static_cast<int>(s), t);
                }
                catch (const std::exception &e)
                {
                    errors[k] = e.what();
                }
            }
        };

        std::size_t n_threads = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                                : std::max(1u, std::thread::hardware_concurrency());
        n_threads = std::min(n_threads, std::max<std::size_t>(jobs, 1));
        if (n_threads <= 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < n_threads; ++w)
                pool.emplace_back(worker);
        }

        std::vector<int> failed(points.size(), 0);
        for (std::size_t k = 0; k < jobs; ++k)
        {
            if (results[k])
                out.trials.push_back(*results[k]);
            else
            {
                ++failed[k / per_point];
                const std::string msg = "sweep " + std::to_string(k / per_point) + " trial " +
                                        std::to_string(k % per_point) + " failed: " + errors[k];
                warn(msg);
                out.failures.push_back(msg);
            }
        }
        out.aggregates = aggregate(points, out.trials, failed);
        return out;
    }

    ExperimentOutput run_experiment(const ExperimentConfig &cfg) { return run_points(cfg, grid_points(cfg)); }
    ExperimentOutput snr_vs_paths(const ExperimentConfig &cfg) { return run_points(cfg, preset_points(cfg, SweepKind::Snr)); }
    ExperimentOutput array_size(const ExperimentConfig &cfg) { return run_points(cfg, preset_points(cfg, SweepKind::Array)); }
    ExperimentOutput morph_range(const ExperimentConfig &cfg) { return run_points(cfg, preset_points(cfg, SweepKind::Morph)); }

    std::vector<AggregateRecord> aggregate(const std::vector<SweepPoint> &points, const std::vector<TrialRecord> &trials,
                                           const std::vector<int> &failed_per_point)
    {
        std::vector<AggregateRecord> agg;
        agg.reserve(points.size());
        for (std::size_t s = 0; s < points.size(); ++s)
        {
            std::vector<double> na, nb, nh;
            int slots_rx = 0, slots_tx = 0;
            for (const auto &t : trials)
            {
                if (t.sweep_id != static_cast<int>(s))
                    continue;
                na.push_back(t.nmse_a);
                nb.push_back(t.nmse_b);
                nh.push_back(t.nmse_channel);
                slots_rx = t.slots_rx;
                slots_tx = t.slots_tx;
            }
            AggregateRecord a;
            a.sweep_id = static_cast<int>(s);
            a.point = points[s];
            a.slots_rx = slots_rx;
            a.slots_tx = slots_tx;
            a.trials = static_cast<int>(na.size());
            a.failed = s < failed_per_point.size() ? failed_per_point[s] : 0;
            a.mean_nmse_a_db = to_db(mean(na));
            a.median_nmse_a_db = to_db(median(na));
            a.mean_nmse_b_db = to_db(mean(nb));
            a.median_nmse_b_db = to_db(median(nb));
            a.mean_nmse_channel_db = to_db(mean(nh));
            a.median_nmse_channel_db = to_db(median(nh));
            agg.push_back(a);
        }
        return agg;
    }

    std::string format_double(double v)
    {
        if (std::isnan(v))
            return "nan";
        char buf[64];
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        if (ec != std::errc())
            throw std::runtime_error("number formatting failed");
        return std::string(buf, ptr);
    }

    void write_trials_csv(std::ostream &out, const std::vector<TrialRecord> &trials)
    {
        out << kTrialCsvHeader << '\n';
        for (const auto &t : trials)
        {
            out << t.sweep_id << ',' << t.trial << ',' << format_double(t.point.snr_db) << ',' << t.point.paths << ','
                << t.point.rx.nx << ',' << t.point.rx.nz << ',' << t.point.tx.nx << ',' << t.point.tx.nz << ','
                << t.slots_rx << ',' << t.slots_tx << ',' << format_double(t.point.y_max) << ','
                << format_double(t.nmse_a) << ',' << format_double(t.nmse_b) << ',' << format_double(t.nmse_channel)
                << ',' << t.iterations << ',' << (t.converged ? 1 : 0) << ',' << format_double(t.wall_ms) << '\n';
        }
    }

    void write_aggregate_csv(std::ostream &out, const std::vector<AggregateRecord> &aggregates)
    {
        out << kAggregateCsvHeader << '\n';
        for (const auto &a : aggregates)
        {
            out << a.sweep_id << ',' << format_double(a.point.snr_db) << ',' << a.point.paths << ',' << a.point.rx.nx
                << ',' << a.point.rx.nz << ',' << a.point.tx.nx << ',' << a.point.tx.nz << ',' << a.slots_rx << ','
                << a.slots_tx << ',' << format_double(a.point.y_max) << ',' << a.trials << ',' << a.failed << ','
                << format_double(a.mean_nmse_a_db) << ',' << format_double(a.median_nmse_a_db) << ','
                << format_double(a.mean_nmse_b_db) << ',' << format_double(a.median_nmse_b_db) << ','
                << format_double(a.mean_nmse_channel_db) << ',' << format_double(a.median_nmse_channel_db) << '\n';
        }
    }

    std::vector<TrialRecord> read_trials_csv(std::istream &in)
    {
        std::string line;
        if (!std::getline(in, line) || line != kTrialCsvHeader)
            throw std::runtime_error("trial CSV header does not match the expected schema");
        std::vector<TrialRecord> rows;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                f.push_back(cell);
            if (f.size() != 17)
                throw std::runtime_error("trial CSV row has " + std::to_string(f.size()) + " fields, expected 17");
            TrialRecord t;
            t.sweep_id = parse_field<int>(f[0], "sweep_id");
            t.trial = parse_field<int>(f[1], "trial");
            t.point.snr_db = parse_field<double>(f[2], "snr_db");
            t.point.paths = parse_field<int>(f[3], "L");
            t.point.rx = {parse_field<int>(f[4], "rx_nx"), parse_field<int>(f[5], "rx_nz")};
            t.point.tx = {parse_field<int>(f[6], "tx_nx"), parse_field<int>(f[7], "tx_nz")};
            t.slots_rx = parse_field<int>(f[8], "I");
            t.slots_tx = parse_field<int>(f[9], "J");
            t.point.y_max = parse_field<double>(f[10], "y_max");
            t.nmse_a = parse_field<double>(f[11], "nmse_A");
            t.nmse_b = parse_field<double>(f[12], "nmse_B");
            t.nmse_channel = parse_field<double>(f[13], "nmse_channel");
            t.iterations = parse_field<int>(f[14], "iterations");
            t.converged = parse_field<int>(f[15], "converged") != 0;
            t.wall_ms = parse_field<double>(f[16], "wall_ms");
            rows.push_back(t);
        }
        return rows;
    }

    std::string summary_path(const std::string &trials_path)
    {
        const std::string ext = ".csv";
        if (trials_path.size() >= ext.size() && trials_path.compare(trials_path.size() - ext.size(), ext.size(), ext) == 0)
            return trials_path.substr(0, trials_path.size() - ext.size()) + "_summary.csv";
        return trials_path + "_summary.csv";
    }

    void write_outputs(const ExperimentConfig &cfg, const ExperimentOutput &out)
    {
        std::ofstream trials(cfg.output_path, std::ios::binary);
        if (!trials)
            throw std::runtime_error("cannot write '" + cfg.output_path + "'");
        write_trials_csv(trials, out.trials);

        const std::string agg_path = summary_path(cfg.output_path);
        std::ofstream agg(agg_path, std::ios::binary);
        if (!agg)
            throw std::runtime_error("cannot write '" + agg_path + "'");
        write_aggregate_csv(agg, out.aggregates);
    }
}
