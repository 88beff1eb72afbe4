// SPDX-License-Identifier: Apache-2.0
//
// nomasim: uplink Monte-Carlo simulator for code-domain NOMA in Massive MIMO
// Copyright (C) 2026 The nomasim authors
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

#include "nomasim/core.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <span>
#include <vector>

namespace nomasim
{
    /// N orthogonal length-N spreading sequences, stored as the columns of an N x N
    /// matrix. Every column has squared norm N.
    class SpreadingBook
    {
    public:
        explicit SpreadingBook(CMatrix sequences) : sequences_(std::move(sequences))
        {
            if (sequences_.rows() == 0 || sequences_.cols() == 0)
                throw DomainError("SpreadingBook: empty book");
            const double N = static_cast<double>(sequences_.rows());
            for (Eigen::Index k = 0; k < sequences_.cols(); ++k)
                if (std::abs(sequences_.col(k).squaredNorm() - N) > 1e-9 * N)
                    throw DomainError("SpreadingBook: every sequence must satisfy ||u||^2 = N");
        }

        int length() const { return static_cast<int>(sequences_.rows()); }
        int size() const { return static_cast<int>(sequences_.cols()); }
        auto sequence(int k) const { return sequences_.col(k); }
        const CMatrix &matrix() const { return sequences_; }

        bool is_orthogonal(double tol = 1e-9) const
        {
            const CMatrix gram = sequences_.adjoint() * sequences_;
            const double N = static_cast<double>(length());
            const CMatrix expected = N * CMatrix::Identity(gram.rows(), gram.cols());
            return (gram - expected).cwiseAbs().maxCoeff() <= tol * N;
        }

    private:
        CMatrix sequences_;
    };

    inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

    /// Sylvester-Hadamard book; N must be a power of two (N = 1 gives [1]).
    inline SpreadingBook hadamard_book(int N)
    {
        if (!is_power_of_two(N))
            throw DomainError("hadamard_book: N must be a power of two, got " + std::to_string(N));
        CMatrix H = CMatrix::Ones(1, 1);
        while (H.rows() < N)
        {
            const Eigen::Index n = H.rows();
            CMatrix next(2 * n, 2 * n);
            next << H, H, H, -H;
            H = std::move(next);
        }
        return SpreadingBook(std::move(H));
    }

    /// Columns of the N-point DFT matrix, entries of unit modulus.
    inline SpreadingBook dft_book(int N)
    {
        if (N < 1)
            throw DomainError("dft_book: N must be positive");
        CMatrix F(N, N);
        for (int n = 0; n < N; ++n)
            for (int k = 0; k < N; ++k)
                F(n, k) = std::polar(1.0, -2.0 * std::numbers::pi * n * k / N);
        return SpreadingBook(std::move(F));
    }

    /// Hadamard when N is a power of two, DFT otherwise.
    inline SpreadingBook orthogonal_spreading_book(int N)
    {
        return is_power_of_two(N) ? hadamard_book(N) : dft_book(N);
    }

    /// Which sequence each UE spreads its data with. UEs are indexed cell-major
    /// (flat index = cell * K + ue).
    struct SpreadingAssignment
    {
        SpreadingBook book = hadamard_book(1);
        std::vector<int> code;
        std::vector<int> subcluster;

        int length() const { return book.length(); }
        auto sequence_of(int flat_ue) const { return book.sequence(code.at(static_cast<std::size_t>(flat_ue))); }
    };

    /// Every UE gets the scalar code [1]: classical Massive MIMO.
    inline SpreadingAssignment trivial_spreading(int ue_count)
    {
        SpreadingAssignment a;
        a.code.assign(static_cast<std::size_t>(ue_count), 0);
        a.subcluster.assign(static_cast<std::size_t>(ue_count), 0);
        return a;
    }

    /// g = u kron h; entry n*M + m equals u_n h_m.
    template <typename U, typename H>
    CVector effective_channel(const Eigen::MatrixBase<U> &u, const Eigen::MatrixBase<H> &h)
    {
        const Eigen::Index N = u.size();
        const Eigen::Index M = h.size();
        CVector g(N * M);
        for (Eigen::Index n = 0; n < N; ++n)
            g.segment(n * M, M) = u(n) * h;
        return g;
    }

    /// True and estimated effective channels of one UE at one BS.
    struct EffectiveChannel
    {
        CVector g;
        CVector g_hat;

        CVector error() const { return g - g_hat; }
    };

    template <typename U>
    EffectiveChannel make_effective_channel(const Eigen::MatrixBase<U> &u, const CVector &h, const CVector &h_hat)
    {
        return {effective_channel(u, h), effective_channel(u, h_hat)};
    }

    /// Residual interference-plus-noise matrix at one BS:
    /// Z = sum_ue p_ue (u u^H) kron C_ue + noise * I_{MN}.
    /// UEs sharing a code are summed before the Kronecker product.
    inline CMatrix build_Z(const SpreadingAssignment &spreading, std::span<const double> powers,
                           std::span<const CMatrix> error_covariances, double noise_power)
    {
        if (powers.size() != error_covariances.size() || powers.size() != spreading.code.size())
            throw DomainError("build_Z: powers, covariances and code assignment disagree in size");
        if (error_covariances.empty())
            throw DomainError("build_Z: no UEs");
        const Eigen::Index M = error_covariances.front().rows();
        const int N = spreading.length();

        std::vector<CMatrix> per_code(static_cast<std::size_t>(spreading.book.size()));
        std::vector<bool> used(per_code.size(), false);
        for (std::size_t ue = 0; ue < powers.size(); ++ue)
        {
            const CMatrix &C = error_covariances[ue];
            if (C.rows() != M || C.cols() != M)
                throw DomainError("build_Z: error covariance dimension mismatch");
            const auto c = static_cast<std::size_t>(spreading.code[ue]);
            if (!used[c])
            {
                per_code[c] = CMatrix::Zero(M, M);
                used[c] = true;
            }
            per_code[c] += powers[ue] * C;
        }

        CMatrix Z = noise_power * CMatrix::Identity(N * M, N * M);
        for (std::size_t c = 0; c < per_code.size(); ++c)
        {
            if (!used[c])
                continue;
            const CVector u = spreading.book.sequence(static_cast<int>(c));
            const CMatrix uu = u * u.adjoint();
            Z += Eigen::kroneckerProduct(uu, per_code[c]).eval();
        }
        return hermitian_part(Z);
    }
} // namespace nomasim
