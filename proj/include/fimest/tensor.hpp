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

#include <array>

#include "fimest/types.hpp"

namespace fimest
{
    using Dims3 = std::array<Index, 3>;

    /// Dense complex third-order tensor.
    ///
    /// Storage is first-index-fastest: entry (i1, i2, i3) lives at i1 + i2*d1 + i3*d1*d2
    /// (0-based). With this layout the mode-n unfoldings satisfy, for a PARAFAC tensor with
    /// factors (F1, F2, F3),
    ///
    ///     unfold(X, 1) = F1 * khatri_rao(F3, F2)^T
    ///     unfold(X, 2) = F2 * khatri_rao(F3, F1)^T
    ///     unfold(X, 3) = F3 * khatri_rao(F2, F1)^T
    ///
    /// i.e. the Khatri-Rao coefficient of mode n always pairs the two remaining factors as
    /// (higher mode, lower mode). Data synthesis, unfolding and every ALS update use this one
    /// convention.
    class Tensor3
    {
    public:
        Tensor3() = default;
        Tensor3(Index d1, Index d2, Index d3);
        Tensor3(Dims3 dims, CVector data);

        static Tensor3 zeros(Dims3 dims) { return Tensor3(dims[0], dims[1], dims[2]); }

        const Dims3 &dims() const { return dims_; }
        Index dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode - 1)); }
        Index size() const { return data_.size(); }

        Index linear_index(Index i1, Index i2, Index i3) const { return i1 + dims_[0] * (i2 + dims_[1] * i3); }

        cdouble &operator()(Index i1, Index i2, Index i3) { return data_[linear_index(i1, i2, i3)]; }
        const cdouble &operator()(Index i1, Index i2, Index i3) const { return data_[linear_index(i1, i2, i3)]; }

        const CVector &data() const { return data_; }
        CVector &data() { return data_; }

        double squared_norm() const { return data_.squaredNorm(); }

    private:
        Dims3 dims_{0, 0, 0};
        CVector data_;
    };

    /// Column l is kron(a.col(l), b.col(l)); b's row index runs fastest.
    CMatrix khatri_rao(const CMatrix &a, const CMatrix &b);

    /// Mode-n unfolding (mode in {1, 2, 3}); see Tensor3 for the column ordering.
    CMatrix unfold(const Tensor3 &t, int mode);

    /// Inverse of unfold.
    Tensor3 fold(const CMatrix &m, int mode, const Dims3 &dims);

    struct FactorTriple
    {
        CMatrix f1;
        CMatrix f2;
        CMatrix f3;
        CVector weights;

        Index rank() const { return weights.size(); }
        void validate() const;
    };

    /// X(i1,i2,i3) = sum_l w_l F1(i1,l) F2(i2,l) F3(i3,l).
    Tensor3 parafac_reconstruct(const FactorTriple &f);

    struct LsSolution
    {
        CMatrix x;
        Index rank = 0;
        bool rank_deficient = false;
    };

    // Moore-Penrose pseudo-inverse through the SVD. Singular values below
    // max(rows, cols) * eps * sigma_max are treated as zero.
    struct PseudoInverse
    {
        CMatrix matrix;
        Index rank = 0;
        bool rank_deficient = false;
    };

    PseudoInverse pseudo_inverse(const CMatrix &m);

    /// Minimum-norm least-squares X of X * coeff ~= rhs.
    LsSolution ls_solve(const CMatrix &coeff, const CMatrix &rhs);

    /// Minimum-norm least-squares X of coeff * X ~= rhs.
    LsSolution ls_solve_left(const CMatrix &coeff, const CMatrix &rhs);
}
