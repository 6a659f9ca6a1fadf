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
#include "fimest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace fimest
{
    namespace
    {
        // Residuals below this fraction of the data energy are round-off; iteration stops there.
        constexpr double kResidualFloor = 1e-24;
        // Exhaustive pairing search up to this many paths (8! candidates), greedy beyond.
        constexpr int kExhaustivePairingLimit = 8;

        std::array<int, 2> other_modes(int mode)
        {
            switch (mode)
            {
            case 1:
                return {2, 3};
            case 2:
                return {1, 3};
            default:
                return {1, 2};
            }
        }

        const CMatrix &factor(const PhaseData &data, const PhaseState &state, std::size_t slot, int mode)
        {
            if (mode == data.shared_mode())
                return state.shared;
            return mode == data.x_mode() ? state.slots[slot].x : state.slots[slot].z;
        }

        CMatrix normalized_columns(const CMatrix &m)
        {
            CMatrix out = m;
            for (Index c = 0; c < out.cols(); ++c)
            {
                const double n = out.col(c).norm();
                if (n > 0.0)
                    out.col(c) /= n;
            }
            return out;
        }

        CMatrix leading_left_vectors(const CMatrix &m, Index count)
        {
            Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU);
            return svd.matrixU().leftCols(count);
        }

        std::vector<double> padded_sum(const std::vector<double> &a, const std::vector<double> &b)
        {
            const std::size_t n = std::max(a.size(), b.size());
            std::vector<double> out(n, 0.0);
            for (std::size_t k = 0; k < n; ++k)
            {
                const double va = a.empty() ? 0.0 : a[std::min(k, a.size() - 1)];
                const double vb = b.empty() ? 0.0 : b[std::min(k, b.size() - 1)];
                out[k] = va + vb;
            }
            return out;
        }

        void permute_columns(CMatrix &m, const std::vector<int> &perm)
        {
            CMatrix out(m.rows(), m.cols());
            for (std::size_t l = 0; l < perm.size(); ++l)
                out.col(static_cast<Index>(l)) = m.col(perm[l]);
            m = std::move(out);
        }
    }

    void AlsOptions::validate() const
    {
        if (max_outer_iterations < 1)
            throw std::invalid_argument("ALS needs at least one outer iteration");
        if (!(tolerance > 0.0))
            throw std::invalid_argument("ALS tolerance must be positive");
        if (restarts < 1)
            throw std::invalid_argument("ALS needs at least one restart");
    }

    bool kruskal_check(int phase, const Dims3 &dims, int paths)
    {
        if (phase != 1 && phase != 2)
            throw std::invalid_argument("training phase must be 1 or 2");
        if (paths < 1)
            throw std::invalid_argument("path count must be positive");
        Index sum = 0;
        for (Index d : dims)
        {
            if (d < 1)
                throw std::invalid_argument("tensor dimensions must be positive");
            sum += std::min<Index>(d, paths);
        }
        return sum >= 2 * static_cast<Index>(paths) + 2;
    }

    PhaseData::PhaseData(const std::vector<Tensor3> &tensors, int shared_mode) : tensors_(tensors), shared_mode_(shared_mode)
    {
        if (tensors_.empty())
            throw std::invalid_argument("a training phase needs at least one tensor");
        if (shared_mode < 1 || shared_mode > 3)
            throw std::invalid_argument("shared mode must be 1, 2 or 3");
        const auto others = other_modes(shared_mode);
        x_mode_ = others[0];
        z_mode_ = others[1];
        dims_ = tensors_.front().dims();

        unfoldings_.reserve(tensors_.size());
        for (const auto &t : tensors_)
        {
            if (t.dims() != dims_)
                throw std::invalid_argument("all tensors of a phase must share their dimensions");
            unfoldings_.push_back({unfold(t, 1), unfold(t, 2), unfold(t, 3)});
            energy_ += t.squared_norm();
        }

        const Index rows = dim(shared_mode_);
        const Index cols = dims_[0] * dims_[1] * dims_[2] / rows;
        stacked_.resize(rows, cols * static_cast<Index>(tensors_.size()));
        for (std::size_t i = 0; i < tensors_.size(); ++i)
            stacked_.middleCols(static_cast<Index>(i) * cols, cols) = unfolding(i, shared_mode_);
    }

    const CMatrix &PhaseData::unfolding(std::size_t slot, int mode) const
    {
        return unfoldings_.at(slot).at(static_cast<std::size_t>(mode - 1));
    }

    CMatrix slot_coefficient(const PhaseData &data, const PhaseState &state, std::size_t slot, int mode)
    {
        const auto [lo, hi] = other_modes(mode);
        return khatri_rao(factor(data, state, slot, hi), factor(data, state, slot, lo));
    }

    double phase_residual(const PhaseData &data, const PhaseState &state)
    {
        double r = 0.0;
        const int s = data.shared_mode();
        for (std::size_t i = 0; i < data.slots(); ++i)
            r += (data.unfolding(i, s) - state.shared * slot_coefficient(data, state, i, s).transpose()).squaredNorm();
        return r;
    }

    namespace
    {
        // Gram systems with eigenvalue spread beyond this go through the SVD solver instead.
        constexpr double kGramConditionLimit = 1e-10;

        // Solves X * conj(gram) = rhs for Hermitian positive definite gram; false if ill-conditioned.
        bool solve_gram(const CMatrix &gram, const CMatrix &rhs, CMatrix &x)
        {
            Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram.conjugate());
            if (eig.info() != Eigen::Success)
                return false;
            const RVector &ev = eig.eigenvalues();
            if (!(ev.maxCoeff() > 0.0) || ev.minCoeff() <= kGramConditionLimit * ev.maxCoeff())
                return false;
            const CMatrix &v = eig.eigenvectors();
            x = rhs * v * ev.cwiseInverse().asDiagonal() * v.adjoint();
            return true;
        }

        // Gram of khatri_rao(hi, lo): (hi^H hi) .* (lo^H lo).
        CMatrix kr_gram(const CMatrix &hi, const CMatrix &lo)
        {
            return (hi.adjoint() * hi).cwiseProduct(lo.adjoint() * lo);
        }
    }

    UpdateReport coupled_update(const PhaseData &data, PhaseState &state, bool trace)
    {
        if (state.slots.size() != data.slots())
            throw std::invalid_argument("slot factor count does not match the phase's tensors");

        UpdateReport rep;
        std::vector<double> slot_res;
        auto record = [&] { rep.substeps.push_back(std::accumulate(slot_res.begin(), slot_res.end(), 0.0)); };

        if (trace)
        {
            slot_res.resize(data.slots());
            for (std::size_t i = 0; i < data.slots(); ++i)
            {
                const CMatrix k = slot_coefficient(data, state, i, data.x_mode());
                slot_res[i] = (data.unfolding(i, data.x_mode()) - state.slots[i].x * k.transpose()).squaredNorm();
            }
            record();
        }

        // Each factor update is the LS fit of obs ~ F K^T, solved through the L x L normal
        // equations when they are well conditioned.
        for (std::size_t i = 0; i < data.slots(); ++i)
        {
            for (const int mode : {data.x_mode(), data.z_mode()})
            {
                const auto [lo, hi] = other_modes(mode);
                const CMatrix &f_lo = factor(data, state, i, lo);
                const CMatrix &f_hi = factor(data, state, i, hi);
                const CMatrix k = khatri_rao(f_hi, f_lo);
                const CMatrix &obs = data.unfolding(i, mode);
                CMatrix x;
                if (!solve_gram(kr_gram(f_hi, f_lo), obs * k.conjugate(), x))
                {
                    LsSolution sol = ls_solve(k.transpose(), obs);
                    rep.rank_deficient = rep.rank_deficient || sol.rank_deficient;
                    x = std::move(sol.x);
                }
                CMatrix &target = mode == data.x_mode() ? state.slots[i].x : state.slots[i].z;
                target = std::move(x);
                if (trace)
                {
                    slot_res[i] = (obs - target * k.transpose()).squaredNorm();
                    record();
                }
            }
        }

        const int s = data.shared_mode();
        const Index paths = state.shared.cols();
        std::vector<CMatrix> coeffs(data.slots());
        CMatrix gram = CMatrix::Zero(paths, paths);
        CMatrix rhs = CMatrix::Zero(data.dim(s), paths);
        for (std::size_t i = 0; i < data.slots(); ++i)
        {
            coeffs[i] = slot_coefficient(data, state, i, s);
            gram += coeffs[i].adjoint() * coeffs[i];
            rhs += data.unfolding(i, s) * coeffs[i].conjugate();
        }
        CMatrix shared;
        if (!solve_gram(gram, rhs, shared))
        {
            const Index cols = data.stacked_shared().cols() / static_cast<Index>(data.slots());
            CMatrix coeff(paths, data.stacked_shared().cols());
            for (std::size_t i = 0; i < data.slots(); ++i)
                coeff.middleCols(static_cast<Index>(i) * cols, cols) = coeffs[i].transpose();
            LsSolution sol = ls_solve(coeff, data.stacked_shared());
            rep.rank_deficient = rep.rank_deficient || sol.rank_deficient;
            shared = std::move(sol.x);
        }
        state.shared = std::move(shared);

        rep.residual = 0.0;
        for (std::size_t i = 0; i < data.slots(); ++i)
            rep.residual += (data.unfolding(i, s) - state.shared * coeffs[i].transpose()).squaredNorm();
        if (trace)
            rep.substeps.push_back(rep.residual);
        return rep;
    }

    PhaseState random_start(const PhaseData &data, int paths, Rng &rng)
    {
        PhaseState st;
        st.shared = complex_gaussian_matrix(data.dim(data.shared_mode()), paths, rng);
        st.slots.resize(data.slots());
        for (auto &slot : st.slots)
        {
            slot.x = complex_gaussian_matrix(data.dim(data.x_mode()), paths, rng);
            slot.z = complex_gaussian_matrix(data.dim(data.z_mode()), paths, rng);
        }
        return st;
    }

    std::optional<PhaseState> algebraic_start(const PhaseData &data, int paths, Rng &rng)
    {
        const int s = data.shared_mode();
        const Index L = paths;
        if (data.dim(s) < L)
            return std::nullopt;

        // Pick the per-slot mode with the larger dimension as the second full-rank mode.
        int q = data.x_mode();
        int r = data.z_mode();
        if (data.dim(r) > data.dim(q))
            std::swap(q, r);
        if (data.dim(q) < L || data.dim(r) < 2)
            return std::nullopt;

        const Tensor3 &t = data.tensor(0);
        const CMatrix up = leading_left_vectors(data.unfolding(0, s), L);
        const CMatrix uq = leading_left_vectors(data.unfolding(0, q), L);
        const CMatrix uq_conj = uq.conjugate();

        CMatrix mix_a = CMatrix::Zero(L, L);
        CMatrix mix_b = CMatrix::Zero(L, L);
        CMatrix slice(data.dim(s), data.dim(q));
        std::array<Index, 3> idx{};
        for (Index k = 0; k < data.dim(r); ++k)
        {
            idx[static_cast<std::size_t>(r - 1)] = k;
            for (Index b = 0; b < data.dim(q); ++b)
            {
                idx[static_cast<std::size_t>(q - 1)] = b;
                for (Index a = 0; a < data.dim(s); ++a)
                {
                    idx[static_cast<std::size_t>(s - 1)] = a;
                    slice(a, b) = t(idx[0], idx[1], idx[2]);
                }
            }
            const CMatrix compressed = up.adjoint() * slice * uq_conj;
            mix_a += complex_gaussian(rng) * compressed;
            mix_b += complex_gaussian(rng) * compressed;
        }

        const PseudoInverse mix_b_inv = pseudo_inverse(mix_b);
        Eigen::ComplexEigenSolver<CMatrix> eig(mix_a * mix_b_inv.matrix);
        if (eig.info() != Eigen::Success)
            return std::nullopt;

        PhaseState st;
        st.shared = up * eig.eigenvectors();
        const PseudoInverse shared_inv = pseudo_inverse(st.shared);

        const Index dx = data.dim(data.x_mode());
        const Index dz = data.dim(data.z_mode());
        st.slots.resize(data.slots());
        for (std::size_t i = 0; i < data.slots(); ++i)
        {
            // Columns of the shared-mode unfolding run x-fastest, so each row of this product
            // reshapes into an (dx x dz) rank-one matrix x_l z_l^T.
            const CMatrix kr = (shared_inv.matrix * data.unfolding(i, s)).transpose();
            SlotFactors &f = st.slots[i];
            f.x.resize(dx, L);
            f.z.resize(dz, L);
            for (Index l = 0; l < L; ++l)
            {
                const CMatrix outer = Eigen::Map<const CMatrix>(kr.col(l).data(), dx, dz);
                Eigen::JacobiSVD<CMatrix> svd(outer, Eigen::ComputeThinU | Eigen::ComputeThinV);
                f.x.col(l) = svd.singularValues()[0] * svd.matrixU().col(0);
                f.z.col(l) = svd.matrixV().col(0).conjugate();
            }
        }
        return st;
    }

    EstimationResult run_two_phase_als(const TrainingFrame &frame, int paths, const AlsOptions &opts)
    {
        opts.validate();
        if (paths < 1)
            throw std::invalid_argument("path count must be positive");

        const PhaseData p1 = PhaseData::phase1(frame);
        const PhaseData p2 = PhaseData::phase2(frame);
        if (frame.reference.rows() != p2.dim(1) || frame.reference.cols() != p1.dim(3))
            throw std::invalid_argument("reference observation does not match the training tensors");

        EstimationResult res;
        res.kruskal_phase1 = kruskal_check(1, p1.dims(), paths);
        res.kruskal_phase2 = kruskal_check(2, p2.dims(), paths);
        if (!res.kruskal_phase1)
            res.warnings.emplace_back("phase-1 dimensions do not meet the Kruskal rank condition");
        if (!res.kruskal_phase2)
            res.warnings.emplace_back("phase-2 dimensions do not meet the Kruskal rank condition");

        const double floor = kResidualFloor * (p1.energy() + p2.energy());
        Rng rng(opts.seed);

        struct Best
        {
            PhaseState state;
            double residual = std::numeric_limits<double>::infinity();
            std::size_t restart = 0;
        };
        Best best1, best2;

        for (int r = 0; r < opts.restarts; ++r)
        {
            RestartTrace tr;
            std::optional<PhaseState> s1, s2;
            if (r == 0 && opts.algebraic_start)
            {
                s1 = algebraic_start(p1, paths, rng);
                s2 = algebraic_start(p2, paths, rng);
                tr.algebraic = s1.has_value() && s2.has_value();
            }
            if (!s1)
                s1 = random_start(p1, paths, rng);
            if (!s2)
                s2 = random_start(p2, paths, rng);

            double prev = 0.0;
            UpdateReport u1, u2;
            for (int it = 1; it <= opts.max_outer_iterations; ++it)
            {
                u1 = phase1_update(p1, *s1, opts.trace_substeps);
                u2 = phase2_update(p2, *s2, opts.trace_substeps);
                res.rank_deficient = res.rank_deficient || u1.rank_deficient || u2.rank_deficient;
                if (opts.trace_substeps)
                {
                    tr.phase1_substeps.insert(tr.phase1_substeps.end(), u1.substeps.begin(), u1.substeps.end());
                    tr.phase2_substeps.insert(tr.phase2_substeps.end(), u2.substeps.begin(), u2.substeps.end());
                }
                const double total = u1.residual + u2.residual;
                tr.phase1_history.push_back(u1.residual);
                tr.phase2_history.push_back(u2.residual);
                tr.history.push_back(total);
                tr.iterations = it;
                if (total <= floor || (it > 1 && std::abs(prev - total) <= opts.tolerance * prev))
                {
                    tr.converged = true;
                    break;
                }
                prev = total;
            }

            const auto idx = static_cast<std::size_t>(r);
            if (u1.residual < best1.residual)
                best1 = {std::move(*s1), u1.residual, idx};
            if (u2.residual < best2.residual)
                best2 = {std::move(*s2), u2.residual, idx};
            res.restarts.push_back(std::move(tr));
        }

        const RestartTrace &t1 = res.restarts[best1.restart];
        const RestartTrace &t2 = res.restarts[best2.restart];
        res.residual_history = padded_sum(t1.phase1_history, t2.phase2_history);
        res.residual = best1.residual + best2.residual;
        res.iterations = std::max(t1.iterations, t2.iterations);
        res.converged = t1.converged && t2.converged;

        res.a_hat = std::move(best2.state.shared);
        res.tx_slots = std::move(best2.state.slots);
        res.b_hat = std::move(best1.state.shared);
        res.rx_slots = std::move(best1.state.slots);

        // Phase-1 slot factors carry B's column order; keep them consistent with the pairing.
        const std::vector<int> perm = pair_columns(res.a_hat, res.b_hat, frame.reference);
        permute_columns(res.b_hat, perm);
        for (auto &slot : res.rx_slots)
        {
            permute_columns(slot.x, perm);
            permute_columns(slot.z, perm);
        }

        res.alpha_hat = estimate_gains(res.a_hat, res.b_hat, frame.reference);
        return res;
    }

    std::vector<int> pair_columns(const CMatrix &a_hat, const CMatrix &b_hat, const CMatrix &reference)
    {
        if (a_hat.cols() != b_hat.cols())
            throw std::invalid_argument("pair_columns: factor column counts differ");
        if (reference.rows() != a_hat.rows() || reference.cols() != b_hat.rows())
            throw std::invalid_argument("pair_columns: reference shape does not match the factors");

        const auto L = static_cast<int>(a_hat.cols());
        const CMatrix coupling = pseudo_inverse(normalized_columns(a_hat)).matrix * reference *
                                 pseudo_inverse(normalized_columns(b_hat).transpose()).matrix;
        const Eigen::MatrixXd w = coupling.cwiseAbs();

        std::vector<int> perm(static_cast<std::size_t>(L));
        std::iota(perm.begin(), perm.end(), 0);
        if (L <= kExhaustivePairingLimit)
        {
            std::vector<int> cand = perm;
            double best = -1.0;
            do
            {
                double score = 0.0;
                for (int l = 0; l < L; ++l)
                    score += w(l, cand[static_cast<std::size_t>(l)]);
                if (score > best)
                {
                    best = score;
                    perm = cand;
                }
            } while (std::next_permutation(cand.begin(), cand.end()));
            return perm;
        }

        std::vector<bool> row_used(static_cast<std::size_t>(L), false), col_used(static_cast<std::size_t>(L), false);
        for (int step = 0; step < L; ++step)
        {
            int br = -1, bc = -1;
            double bv = -1.0;
            for (int rr = 0; rr < L; ++rr)
                for (int cc = 0; cc < L; ++cc)
                    if (!row_used[static_cast<std::size_t>(rr)] && !col_used[static_cast<std::size_t>(cc)] && w(rr, cc) > bv)
                    {
                        bv = w(rr, cc);
                        br = rr;
                        bc = cc;
                    }
            row_used[static_cast<std::size_t>(br)] = true;
            col_used[static_cast<std::size_t>(bc)] = true;
            perm[static_cast<std::size_t>(br)] = bc;
        }
        return perm;
    }

    CVector estimate_gains(const CMatrix &a_hat, const CMatrix &b_hat, const CMatrix &reference)
    {
        if (a_hat.cols() != b_hat.cols())
            throw std::invalid_argument("estimate_gains: factor column counts differ");
        if (reference.rows() != a_hat.rows() || reference.cols() != b_hat.rows())
            throw std::invalid_argument("estimate_gains: reference shape does not match the factors");
        const Eigen::Map<const CVector> vec(reference.data(), reference.size());
        return ls_solve_left(khatri_rao(b_hat, a_hat), vec).x;
    }

    CMatrix reconstruct_channel(const CMatrix &a_hat, const CMatrix &b_hat, const CVector &alpha)
    {
        if (a_hat.cols() != b_hat.cols() || a_hat.cols() != alpha.size())
            throw std::invalid_argument("reconstruct_channel: factor and gain counts differ");
        return a_hat * alpha.asDiagonal() * b_hat.transpose();
    }

    AlignedFactors align_factors(const CMatrix &estimate, const CMatrix &reference)
    {
        if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
            throw std::invalid_argument("align_factors: estimate and reference shapes differ");

        const Index L = reference.cols();
        const CMatrix inner = estimate.adjoint() * reference; // (estimate col, reference col)
        Eigen::MatrixXd corr(L, L);
        for (Index e = 0; e < L; ++e)
            for (Index r = 0; r < L; ++r)
            {
                const double den = estimate.col(e).norm() * reference.col(r).norm();
                corr(e, r) = den > 0.0 ? std::abs(inner(e, r)) / den : 0.0;
            }

        AlignedFactors out;
        std::vector<Index> favourite(static_cast<std::size_t>(L));
        for (Index r = 0; r < L; ++r)
            corr.col(r).maxCoeff(&favourite[static_cast<std::size_t>(r)]);
        std::vector<Index> sorted = favourite;
        std::sort(sorted.begin(), sorted.end());
        out.collision = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();

        out.permutation.assign(static_cast<std::size_t>(L), -1);
        std::vector<bool> used(static_cast<std::size_t>(L), false);
        for (Index step = 0; step < L; ++step)
        {
            Index be = -1, br = -1;
            double bv = -1.0;
            for (Index r = 0; r < L; ++r)
            {
                if (out.permutation[static_cast<std::size_t>(r)] >= 0)
                    continue;
                for (Index e = 0; e < L; ++e)
                    if (!used[static_cast<std::size_t>(e)] && corr(e, r) > bv)
                    {
                        bv = corr(e, r);
                        be = e;
                        br = r;
                    }
            }
            used[static_cast<std::size_t>(be)] = true;
            out.permutation[static_cast<std::size_t>(br)] = static_cast<int>(be);
        }

        out.aligned.resize(reference.rows(), L);
        out.scalings.resize(L);
        for (Index r = 0; r < L; ++r)
        {
            const auto e = out.permutation[static_cast<std::size_t>(r)];
            const double energy = estimate.col(e).squaredNorm();
            const cdouble c = energy > 0.0 ? inner(e, r) / energy : cdouble{0.0, 0.0};
            out.scalings[r] = c;
            out.aligned.col(r) = c * estimate.col(e);
        }
        return out;
    }

    double nmse_steering(const CMatrix &estimate, const CMatrix &reference)
    {
        const double ref = reference.squaredNorm();
        if (!(ref > 0.0))
            throw std::invalid_argument("NMSE reference has zero norm");
        return (align_factors(estimate, reference).aligned - reference).squaredNorm() / ref;
    }

    double nmse_channel(const CMatrix &estimate, const CMatrix &reference)
    {
        if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
            throw std::invalid_argument("NMSE operands have different shapes");
        const double ref = reference.squaredNorm();
        if (!(ref > 0.0))
            throw std::invalid_argument("NMSE reference has zero norm");
        return (estimate - reference).squaredNorm() / ref;
    }
}
