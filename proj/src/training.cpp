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
#include "fimest/training.hpp"

#include <cmath>
#include <stdexcept>

namespace fimest
{
    PilotMatrix generate_pilots(int m, Rng &rng)
    {
        if (m < 1)
            throw std::invalid_argument("pilot length must be positive");
        std::uniform_real_distribution<double> phase(0.0, kTwoPi);
        PilotMatrix s{CVector(m)};
        for (int i = 0; i < m; ++i)
            s.diag[i] = std::polar(1.0, phase(rng));
        return s;
    }

    double noise_variance_for_snr(const CMatrix &received, double snr_db)
    {
        if (std::isnan(snr_db))
            throw std::invalid_argument("SNR must not be NaN");
        if (std::isinf(snr_db) && snr_db > 0.0)
            return 0.0;
        const double power = received.squaredNorm() / static_cast<double>(received.size());
        return power * std::pow(10.0, -snr_db / 10.0);
    }

    CMatrix observe(const ChannelMatrix &h, const PilotMatrix &pilots, double noise_variance, Rng &rng)
    {
        if (h.cols() != pilots.size())
            throw std::invalid_argument("pilot length does not match the transmit element count");
        if (noise_variance < 0.0)
            throw std::invalid_argument("noise variance must be non-negative");
        CMatrix y = h * pilots.diag.asDiagonal();
        if (noise_variance > 0.0)
            y += complex_gaussian_matrix(y.rows(), y.cols(), rng, noise_variance);
        return y * pilots.diag.conjugate().asDiagonal();
    }

    Tensor3 split_receive(const CMatrix &x, int nx, int nz)
    {
        if (x.rows() != static_cast<Index>(nx) * nz)
            throw std::invalid_argument("split_receive: row count is not nx * nz");
        // Column-major storage of x already is (n_x, n_z, m) with n_x fastest.
        return Tensor3({nx, nz, x.cols()}, Eigen::Map<const CVector>(x.data(), x.size()));
    }

    Tensor3 split_transmit(const CMatrix &x, int mx, int mz)
    {
        if (x.cols() != static_cast<Index>(mx) * mz)
            throw std::invalid_argument("split_transmit: column count is not mx * mz");
        return Tensor3({x.rows(), mx, mz}, Eigen::Map<const CVector>(x.data(), x.size()));
    }

    Tensor3 phase1_slot(const Link &link, const MorphPattern &rx_pattern, const MorphPattern &static_tx,
                        double noise_variance, Rng &rng)
    {
        const ChannelMatrix h = channel_matrix(link.tx, link.rx, static_tx, rx_pattern, link.paths);
        return split_receive(observe(h, link.pilots, noise_variance, rng), link.rx.config.nx, link.rx.config.nz);
    }

    Tensor3 phase2_slot(const Link &link, const MorphPattern &static_rx, const MorphPattern &tx_pattern,
                        double noise_variance, Rng &rng)
    {
        const ChannelMatrix h = channel_matrix(link.tx, link.rx, tx_pattern, static_rx, link.paths);
        return split_transmit(observe(h, link.pilots, noise_variance, rng), link.tx.config.nx, link.tx.config.nz);
    }

    void TrainingConfig::validate() const
    {
        tx.validate();
        rx.validate();
        if (slots_rx < 1 || slots_tx < 1)
            throw std::invalid_argument("both training phases need at least one slot");
        if (std::isnan(snr_db))
            throw std::invalid_argument("SNR must not be NaN");
    }

    TrainingFrame build_training_frame(const TrainingConfig &cfg, const PathSet &paths, Rng &rng)
    {
        cfg.validate();
        paths.validate();

        Link link{Fim(cfg.tx), Fim(cfg.rx), paths, {}};
        link.pilots = generate_pilots(link.tx.size(), rng);

        TrainingFrame frame;
        frame.pilots = link.pilots;
        frame.snr_db = cfg.snr_db;
        frame.static_rx = MorphPattern::zero(cfg.rx);
        frame.static_tx = MorphPattern::zero(cfg.tx);

        const ChannelMatrix h_static = channel_matrix(link.tx, link.rx, frame.static_tx, frame.static_rx, paths);
        frame.noise_variance = noise_variance_for_snr(h_static * link.pilots.diag.asDiagonal(), cfg.snr_db);

        frame.rx_patterns.reserve(static_cast<std::size_t>(cfg.slots_rx));
        for (int i = 0; i < cfg.slots_rx; ++i)
            frame.rx_patterns.push_back(sample_morph_pattern(cfg.rx, rng));
        frame.tx_patterns.reserve(static_cast<std::size_t>(cfg.slots_tx));
        for (int j = 0; j < cfg.slots_tx; ++j)
            frame.tx_patterns.push_back(sample_morph_pattern(cfg.tx, rng));

        frame.phase1.reserve(frame.rx_patterns.size());
        for (const auto &p : frame.rx_patterns)
            frame.phase1.push_back(phase1_slot(link, p, frame.static_tx, frame.noise_variance, rng));
        frame.phase2.reserve(frame.tx_patterns.size());
        for (const auto &p : frame.tx_patterns)
            frame.phase2.push_back(phase2_slot(link, frame.static_rx, p, frame.noise_variance, rng));

        frame.reference = observe(h_static, link.pilots, frame.noise_variance, rng);
        return frame;
    }
}
