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
#include "fimest/tensor.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace fimest
{
    namespace
    {
        void check_mode(int mode)
        {
            if (mode < 1 || mode > 3)
                throw std::invalid_argument("tensor mode must be 1, 2 or 3, got " + std::to_string(mode));
        }

        void check_dims(const Dims3 &d)
        {
            if (d[0] < 1 || d[1] < 1 || d[2] < 1)
                throw std::invalid_argument("tensor dimensions must be positive");
        }
    }

    Tensor3::Tensor3(Index d1, Index d2, Index d3) : dims_{d1, d2, d3}
    {
        check_dims(dims_);
        data_ = CVector::Zero(d1 * d2 * d3);
    }

    Tensor3::Tensor3(Dims3 dims, CVector data) : dims_(dims), data_(std::move(data))
    {
        check_dims(dims_);
        if (data_.size() != dims_[0] * dims_[1] * dims_[2])
            throw std::invalid_argument("tensor data length does not match its dimensions");
    }

    CMatrix khatri_rao(const CMatrix &a, const CMatrix &b)
    {
        if (a.cols() != b.cols())
            throw std::invalid_argument("khatri_rao: column counts differ (" + std::to_string(a.cols()) + " vs " +
                                        std::to_string(b.cols()) + ")");
        CMatrix out(a.rows() * b.rows(), a.cols());
        for (Index l = 0; l < a.cols(); ++l)
            for (Index i = 0; i < a.rows(); ++i)
                out.col(l).segment(i * b.rows(), b.rows()) = a(i, l) * b.col(l);
        return out;
    }

    CMatrix unfold(const Tensor3 &t, int mode)
    {
        check_mode(mode);
        const auto [d1, d2, d3] = t.dims();
        const CVector &data = t.data();
        switch (mode)
        {
        case 1:
            // Column i2 + i3*d2 is already contiguous.
            return Eigen::Map<const CMatrix>(data.data(), d1, d2 * d3);
        case 2:
        {
            CMatrix m(d2, d1 * d3);
            for (Index i3 = 0; i3 < d3; ++i3)
                for (Index i2 = 0; i2 < d2; ++i2)
                    for (Index i1 = 0; i1 < d1; ++i1)
                        m(i2, i1 + i3 * d1) = t(i1, i2, i3);
            return m;
        }
        default:
            return Eigen::Map<const CMatrix>(data.data(), d1 * d2, d3).transpose();
        }
    }

    Tensor3 fold(const CMatrix &m, int mode, const Dims3 &dims)
    {
        check_mode(mode);
        check_dims(dims);
        const auto [d1, d2, d3] = dims;
        const Index rows = dims[static_cast<std::size_t>(mode - 1)];
        if (m.rows() != rows || m.cols() * rows != d1 * d2 * d3)
            throw std::invalid_argument("fold: matrix shape is inconsistent with the target dimensions");

        Tensor3 t(dims[0], dims[1], dims[2]);
        switch (mode)
        {
        case 1:
            t.data() = Eigen::Map<const CVector>(CMatrix(m).data(), m.size());
            break;
        case 2:
            for (Index i3 = 0; i3 < d3; ++i3)
                for (Index i2 = 0; i2 < d2; ++i2)
                    for (Index i1 = 0; i1 < d1; ++i1)
                        t(i1, i2, i3) = m(i2, i1 + i3 * d1);
            break;
        default:
        {
            const CMatrix mt = m.transpose();
            t.data() = Eigen::Map<const CVector>(mt.data(), mt.size());
            break;
        }
        }
        return t;
    }

    void FactorTriple::validate() const
    {
        const Index r = weights.size();
        if (r < 1 || f1.cols() != r || f2.cols() != r || f3.cols() != r)
            throw std::invalid_argument("PARAFAC factors must share the weight count as column count");
        if (f1.rows() < 1 || f2.rows() < 1 || f3.rows() < 1)
            throw std::invalid_argument("PARAFAC factors must have at least one row");
    }

    Tensor3 parafac_reconstruct(const FactorTriple &f)
    {
        f.validate();
        const Dims3 dims{f.f1.rows(), f.f2.rows(), f.f3.rows()};
        const CMatrix weighted = f.f3 * f.weights.asDiagonal();
        return fold(weighted * khatri_rao(f.f2, f.f1).transpose(), 3, dims);
    }

    PseudoInverse pseudo_inverse(const CMatrix &m)
    {
        PseudoInverse out;
        if (m.size() == 0)
        {
            out.matrix = CMatrix::Zero(m.cols(), m.rows());
            return out;
        }
        Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RVector &s = svd.singularValues();
        const double cutoff =
            static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon() * s[0];

        Index rank = 0;
        while (rank < s.size() && s[rank] > cutoff)
            ++rank;

        out.rank = rank;
        out.rank_deficient = rank < std::min(m.rows(), m.cols());
        if (rank == 0)
        {
            out.matrix = CMatrix::Zero(m.cols(), m.rows());
            return out;
        }
        const RVector inv = s.head(rank).cwiseInverse();
        out.matrix = svd.matrixV().leftCols(rank) * inv.asDiagonal() * svd.matrixU().leftCols(rank).adjoint();
        return out;
    }

    LsSolution ls_solve(const CMatrix &coeff, const CMatrix &rhs)
    {
        if (coeff.cols() != rhs.cols())
            throw std::invalid_argument("ls_solve: coefficient and right-hand side column counts differ");
        PseudoInverse p = pseudo_inverse(coeff);
        return {rhs * p.matrix, p.rank, p.rank_deficient};
    }

    LsSolution ls_solve_left(const CMatrix &coeff, const CMatrix &rhs)
    {
        if (coeff.rows() != rhs.rows())
            throw std::invalid_argument("ls_solve_left: coefficient and right-hand side row counts differ");
        PseudoInverse p = pseudo_inverse(coeff);
        return {p.matrix * rhs, p.rank, p.rank_deficient};
    }
}
