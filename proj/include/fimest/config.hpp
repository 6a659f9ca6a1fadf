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

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fimest/estimator.hpp"
#include "fimest/geometry.hpp"

namespace fimest
{
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct ArraySize
    {
        int nx = 4;
        int nz = 4;

        friend bool operator==(const ArraySize &, const ArraySize &) = default;
    };

    struct ExperimentConfig
    {
        ArraySize tx{4, 4};
        ArraySize rx{4, 4};
        double dx = 0.5; // element spacing, wavelengths
        double dz = 0.5;
        int paths = 3;
        int slots_rx = 10; // I
        int slots_tx = 10; // J
        std::vector<double> snr_db_list{10.0};
        std::vector<double> y_max_list{1.0};
        int trials = 200;
        std::uint64_t seed = 1;
        AlsOptions als{};
        Orientation tx_orientation = Orientation::make(kPi / 4, kPi / 3, kPi / 6);
        Orientation rx_orientation = Orientation::make(kPi / 3, kPi / 6, -kPi / 4);
        std::string output_path = "results.csv";

        // Axes of the preset sweeps.
        std::vector<int> path_sweep{2, 3, 4};
        std::vector<ArraySize> array_sweep{{4, 4}, {6, 6}}; // receive array sizes
        std::vector<double> morph_sweep{0.1, 0.25, 0.5, 1.0};

        bool record_timing = false; // wall_ms is written as 0 unless set, keeping output reproducible
        int threads = 0;            // 0 picks the hardware concurrency

        /// Throws ConfigError on the first violated constraint.
        void validate() const;
    };

    /// Number with optional pi factor: "0.25", "-pi/4", "2*pi/3", "pi", "inf".
    double parse_number(const std::string &text);

    /// Comma-separated list of parse_number values.
    std::vector<double> parse_number_list(const std::string &text);

    /// Applies one `key = value` setting; throws ConfigError on unknown keys or bad values.
    void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value);

    /// Flat `key = value` text; `#` starts a comment. Starts from the defaults above.
    ExperimentConfig parse_config(std::istream &in);
    ExperimentConfig load_config(const std::string &path);
}
