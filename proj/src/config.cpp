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
#include "fimest/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace fimest
{
    namespace
    {
        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::size_t start = 0;
            while (true)
            {
                const auto pos = s.find(sep, start);
                out.push_back(trim(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
                if (pos == std::string::npos)
                    break;
                start = pos + 1;
            }
            return out;
        }

        double plain_number(const std::string &s, const std::string &whole)
        {
            double v = 0.0;
            const char *first = s.data();
            const char *last = s.data() + s.size();
            if (!s.empty() && *first == '+')
                ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last)
                throw ConfigError("not a number: '" + whole + "'");
            return v;
        }

        long long parse_integer(const std::string &value, const std::string &key)
        {
            long long v = 0;
            const std::string t = trim(value);
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || ptr != t.data() + t.size())
                throw ConfigError("setting '" + key + "' expects an integer, got '" + value + "'");
            return v;
        }

        int parse_int(const std::string &value, const std::string &key)
        {
            const long long v = parse_integer(value, key);
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
                throw ConfigError("setting '" + key + "' is out of range");
            return static_cast<int>(v);
        }

        bool parse_bool(const std::string &value, const std::string &key)
        {
            const std::string t = trim(value);
            if (t == "true" || t == "1" || t == "yes" || t == "on")
                return true;
            if (t == "false" || t == "0" || t == "no" || t == "off")
                return false;
            throw ConfigError("setting '" + key + "' expects a boolean, got '" + value + "'");
        }

        Orientation parse_orientation(const std::string &value, const std::string &key)
        {
            const auto v = parse_number_list(value);
            if (v.size() != 3)
                throw ConfigError("setting '" + key + "' expects three angles: theta, phi, rho");
            try
            {
                return Orientation::make(v[0], v[1], v[2]);
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError("setting '" + key + "': " + e.what());
            }
        }

        ArraySize parse_array_size(const std::string &text)
        {
            const auto parts = split(text, 'x');
            if (parts.size() != 2)
                throw ConfigError("array size must look like 4x4, got '" + text + "'");
            return {parse_int(parts[0], "array size"), parse_int(parts[1], "array size")};
        }
    }

    double parse_number(const std::string &text)
    {
        std::string s = trim(text);
        if (s.empty())
            throw ConfigError("empty number");
        if (s == "inf" || s == "+inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();

        const auto pi_pos = s.find("pi");
        if (pi_pos == std::string::npos)
            return plain_number(s, text);

        // [sign][coef[*]]pi[/div]
        std::string coef = trim(s.substr(0, pi_pos));
        std::string rest = trim(s.substr(pi_pos + 2));
        double sign = 1.0;
        if (!coef.empty() && (coef.front() == '-' || coef.front() == '+'))
        {
            sign = coef.front() == '-' ? -1.0 : 1.0;
            coef = trim(coef.substr(1));
        }
        if (!coef.empty() && coef.back() == '*')
            coef = trim(coef.substr(0, coef.size() - 1));
        const double c = coef.empty() ? 1.0 : plain_number(coef, text);
        double div = 1.0;
        if (!rest.empty())
        {
            if (rest.front() != '/')
                throw ConfigError("malformed angle expression: '" + text + "'");
            div = plain_number(trim(rest.substr(1)), text);
            if (div == 0.0)
                throw ConfigError("division by zero in '" + text + "'");
        }
        return sign * c * kPi / div;
    }

    std::vector<double> parse_number_list(const std::string &text)
    {
        std::vector<double> out;
        for (const auto &item : split(text, ','))
            out.push_back(parse_number(item));
        return out;
    }

    void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value)
    {
        if (key == "tx_nx")
            cfg.tx.nx = parse_int(value, key);
        else if (key == "tx_nz")
            cfg.tx.nz = parse_int(value, key);
        else if (key == "rx_nx")
            cfg.rx.nx = parse_int(value, key);
        else if (key == "rx_nz")
            cfg.rx.nz = parse_int(value, key);
        else if (key == "dx")
            cfg.dx = parse_number(value);
        else if (key == "dz")
            cfg.dz = parse_number(value);
        else if (key == "L" || key == "paths")
            cfg.paths = parse_int(value, key);
        else if (key == "I")
            cfg.slots_rx = parse_int(value, key);
        else if (key == "J")
            cfg.slots_tx = parse_int(value, key);
        else if (key == "snr_db")
            cfg.snr_db_list = parse_number_list(value);
        else if (key == "y_max")
            cfg.y_max_list = parse_number_list(value);
        else if (key == "trials")
            cfg.trials = parse_int(value, key);
        else if (key == "seed")
        {
            const long long s = parse_integer(value, key);
            if (s < 0)
                throw ConfigError("seed must be non-negative");
            cfg.seed = static_cast<std::uint64_t>(s);
        }
        else if (key == "als.max_iterations")
            cfg.als.max_outer_iterations = parse_int(value, key);
        else if (key == "als.tolerance")
            cfg.als.tolerance = parse_number(value);
        else if (key == "als.restarts")
            cfg.als.restarts = parse_int(value, key);
        else if (key == "als.algebraic_start")
            cfg.als.algebraic_start = parse_bool(value, key);
        else if (key == "tx_orientation")
            cfg.tx_orientation = parse_orientation(value, key);
        else if (key == "rx_orientation")
            cfg.rx_orientation = parse_orientation(value, key);
        else if (key == "output")
            cfg.output_path = trim(value);
        else if (key == "sweep.paths")
        {
            cfg.path_sweep.clear();
            for (const auto &item : split(value, ','))
                cfg.path_sweep.push_back(parse_int(item, key));
        }
        else if (key == "sweep.arrays")
        {
            cfg.array_sweep.clear();
            for (const auto &item : split(value, ','))
                cfg.array_sweep.push_back(parse_array_size(item));
        }
        else if (key == "sweep.morph")
            cfg.morph_sweep = parse_number_list(value);
        else if (key == "record_timing")
            cfg.record_timing = parse_bool(value, key);
        else if (key == "threads")
            cfg.threads = parse_int(value, key);
        else
            throw ConfigError("unknown setting '" + key + "'");
    }

    void ExperimentConfig::validate() const
    {
        auto positive_array = [](const ArraySize &a) { return a.nx >= 1 && a.nz >= 1; };
        if (!positive_array(tx) || !positive_array(rx))
            throw ConfigError("array dimensions must be positive");
        if (!(dx > 0.0) || !(dz > 0.0))
            throw ConfigError("element spacings must be positive");
        if (paths < 1)
            throw ConfigError("path count must be positive");
        if (slots_rx < 1 || slots_tx < 1)
            throw ConfigError("slot counts I and J must be positive");
        if (snr_db_list.empty() || y_max_list.empty())
            throw ConfigError("snr_db and y_max lists must not be empty");
        for (double s : snr_db_list)
            if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
                throw ConfigError("SNR values must be numbers or +inf");
        for (double y : y_max_list)
            if (!(y >= 0.0) || !std::isfinite(y))
                throw ConfigError("y_max values must be finite and non-negative");
        for (double y : morph_sweep)
            if (!(y >= 0.0) || !std::isfinite(y))
                throw ConfigError("morph sweep values must be finite and non-negative");
        for (int l : path_sweep)
            if (l < 1)
                throw ConfigError("path sweep values must be positive");
        for (const auto &a : array_sweep)
            if (!positive_array(a))
                throw ConfigError("array sweep sizes must be positive");
        if (trials < 1)
            throw ConfigError("trials must be at least 1");
        if (threads < 0)
            throw ConfigError("threads must be non-negative");
        try
        {
            als.validate();
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
    }

    ExperimentConfig parse_config(std::istream &in)
    {
        ExperimentConfig cfg;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
            try
            {
                apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
            }
            catch (const ConfigError &e)
            {
                throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        return cfg;
    }

    ExperimentConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        return parse_config(in);
    }
}
