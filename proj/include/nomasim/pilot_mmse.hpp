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

#include "nomasim/network_scenario.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <vector>

namespace nomasim
{
    /// Channel vectors for every (UE, BS) link, indexed like Scenario::correlation.
    class ChannelSet
    {
    public:
        ChannelSet(int ue_count, int bs_count)
            : bs_count_(bs_count), h_(static_cast<std::size_t>(ue_count * bs_count)) {}

        CVector &at(int flat_ue, int bs) { return h_[static_cast<std::size_t>(flat_ue * bs_count_ + bs)]; }
        const CVector &at(int flat_ue, int bs) const { return h_[static_cast<std::size_t>(flat_ue * bs_count_ + bs)]; }
        int bs_count() const { return bs_count_; }

    private:
        int bs_count_;
        std::vector<CVector> h_;
    };

    /// One correlated Rayleigh realization per link, drawn UE-major then BS.
    inline ChannelSet draw_channels(const Scenario &s, RandomStream &rng)
    {
        ChannelSet channels(s.ue_count(), s.L);
        for (int ue = 0; ue < s.ue_count(); ++ue)
            for (int j = 0; j < s.L; ++j)
                channels.at(ue, j) = realize_channel(s.correlation(ue, j), rng);
        return channels;
    }

    /// Received pilot signal at every BS:
    /// Y_j = sum_ue sqrt(p_ue) h_ue^j phi_ue^T + N_j,  N_j iid CN(0, noise).
    inline std::vector<CMatrix> simulate_pilot_phase(const Scenario &s, const ChannelSet &channels, RandomStream &rng)
    {
        const int tau = s.pilots.tau_p();
        std::vector<CMatrix> Y;
        Y.reserve(static_cast<std::size_t>(s.L));
        for (int j = 0; j < s.L; ++j)
        {
            CMatrix Yj = CMatrix::Zero(s.M, tau);
            for (int ue = 0; ue < s.ue_count(); ++ue)
            {
                const double amp = std::sqrt(s.power(ue));
                if (amp == 0.0)
                    continue;
                Yj.noalias() += (amp * channels.at(ue, j)) * s.pilots.pilot_of(ue).transpose();
            }
            Yj += rng.complex_normal_matrix(s.M, tau, s.noise_power);
            Y.push_back(std::move(Yj));
        }
        return Y;
    }

    /// Q = sum_ue p_ue (phi phi^H) kron R_ue^j + noise I_{M tau_p}. Independent of
    /// the estimation target, so it is built once per BS.
    inline CMatrix build_Q(const Scenario &s, int bs)
    {
        const int tau = s.pilots.tau_p();
        const Eigen::Index dim = static_cast<Eigen::Index>(s.M) * tau;
        CMatrix Q = s.noise_power * CMatrix::Identity(dim, dim);
        for (int ue = 0; ue < s.ue_count(); ++ue)
        {
            const CMatrix &R = s.correlation(ue, bs).matrix();
            if (R.rows() != s.M)
                throw DomainError("build_Q: correlation matrix dimension mismatch");
            const CVector phi = s.pilots.pilot_of(ue);
            const CMatrix pp = phi * phi.adjoint();
            Q += s.power(ue) * Eigen::kroneckerProduct(pp, R).eval();
        }
        return hermitian_part(Q);
    }

    /// vec() stacks columns.
    inline CVector vec(const CMatrix &Y)
    {
        return Eigen::Map<const CVector>(Y.data(), Y.size());
    }

    /// MMSE estimate of one link with its estimate covariance Phi and error
    /// covariance C = R - Phi.
    struct EstimationOutput
    {
        CVector h_hat;
        CMatrix Phi;
        CMatrix C;
    };

    enum class EstimatorPath
    {
        automatic,
        general,
        orthogonal_fastpath
    };

    /// Precomputed MMSE estimation for every UE at one BS. Statistics (Phi, C) are
    /// deterministic; estimate() maps a received pilot matrix to h_hat.
    ///
    /// General path: h_hat = sqrt(p) (phi^H kron R) Q^{-1} vec(Y), valid for any pilot
    /// book. Orthogonal fast path: with the despread y_t = Y conj(phi_t),
    /// h_hat = sqrt(p) R Psi_t^{-1} y_t, Psi_t = sum_{ue on pilot t} p tau_p R + noise I.
    class MmseEstimator
    {
    public:
        MmseEstimator(const Scenario &s, int bs, EstimatorPath path = EstimatorPath::automatic)
            : bs_(bs), tau_(s.pilots.tau_p())
        {
            if (bs < 0 || bs >= s.L)
                throw DomainError("MmseEstimator: BS index out of range");
            if (path == EstimatorPath::automatic)
                path = s.pilots.is_orthogonal() ? EstimatorPath::orthogonal_fastpath : EstimatorPath::general;
            if (path == EstimatorPath::orthogonal_fastpath && !s.pilots.is_orthogonal())
                throw MisuseError("MmseEstimator: orthogonal fast path requires an orthogonal pilot book");
            path_ = path;

            const int n = s.ue_count();
            filters_.resize(static_cast<std::size_t>(n));
            Phi_.resize(static_cast<std::size_t>(n));
            C_.resize(static_cast<std::size_t>(n));
            pilot_index_.resize(static_cast<std::size_t>(n));
            pilots_ = s.pilots.matrix();

            if (path_ == EstimatorPath::general)
                build_general(s);
            else
                build_fastpath(s);
        }

        EstimatorPath path() const { return path_; }
        int bs() const { return bs_; }

        CVector estimate(const CMatrix &Y, int flat_ue) const
        {
            const auto u = static_cast<std::size_t>(flat_ue);
            if (path_ == EstimatorPath::general)
                return filters_[u] * vec(Y);
            const CVector despread = Y * pilots_.col(pilot_index_[u]).conjugate();
            return filters_[u] * despread;
        }

        const CMatrix &Phi(int flat_ue) const { return Phi_[static_cast<std::size_t>(flat_ue)]; }
        const CMatrix &C(int flat_ue) const { return C_[static_cast<std::size_t>(flat_ue)]; }
        const std::vector<CMatrix> &error_covariances() const { return C_; }

        EstimationOutput output(const CMatrix &Y, int flat_ue) const
        {
            return {estimate(Y, flat_ue), Phi(flat_ue), C(flat_ue)};
        }

    private:
        void build_general(const Scenario &s)
        {
            const CMatrix Q = build_Q(s, bs_);
            Eigen::LLT<CMatrix> llt(Q);
            if (llt.info() != Eigen::Success)
                throw NumericalError("MmseEstimator: Q is not positive definite (BS " + std::to_string(bs_) + ")");
            for (int ue = 0; ue < s.ue_count(); ++ue)
            {
                const auto u = static_cast<std::size_t>(ue);
                const CorrelationMatrix &corr = s.correlation(ue, bs_);
                const CMatrix &R = corr.matrix();
                const CVector phi = s.pilots.pilot_of(ue);
                pilot_index_[u] = s.pilots.index_of(ue);
                // B = phi kron R; (phi^H kron R) = B^H since R is Hermitian.
                const CMatrix B = Eigen::kroneckerProduct(phi, R).eval();
                const CMatrix X = llt.solve(B);
                const double p = s.power(ue);
                filters_[u] = std::sqrt(p) * X.adjoint();
                Phi_[u] = hermitian_part(p * (B.adjoint() * X));
                C_[u] = R - Phi_[u];
            }
        }

        void build_fastpath(const Scenario &s)
        {
            const int M = s.M;
            std::vector<CMatrix> psi(static_cast<std::size_t>(s.pilots.sequence_count()));
            for (auto &m : psi)
                m = s.noise_power * CMatrix::Identity(M, M);
            for (int ue = 0; ue < s.ue_count(); ++ue)
                psi[static_cast<std::size_t>(s.pilots.index_of(ue))] +=
                    (s.power(ue) * tau_) * s.correlation(ue, bs_).matrix();

            std::vector<Eigen::LLT<CMatrix>> factors;
            factors.reserve(psi.size());
            for (std::size_t t = 0; t < psi.size(); ++t)
            {
                factors.emplace_back(hermitian_part(psi[t]));
                if (factors.back().info() != Eigen::Success)
                    throw NumericalError("MmseEstimator: Psi is not positive definite (BS " + std::to_string(bs_) +
                                         ", pilot " + std::to_string(t) + ")");
            }

            for (int ue = 0; ue < s.ue_count(); ++ue)
            {
                const auto u = static_cast<std::size_t>(ue);
                const int t = s.pilots.index_of(ue);
                pilot_index_[u] = t;
                const CMatrix &R = s.correlation(ue, bs_).matrix();
                const CMatrix X = factors[static_cast<std::size_t>(t)].solve(R); // Psi^{-1} R
                const double p = s.power(ue);
                filters_[u] = std::sqrt(p) * X.adjoint();                    // sqrt(p) R Psi^{-1}
                Phi_[u] = hermitian_part((p * tau_) * (R * X));
                C_[u] = R - Phi_[u];
            }
        }

        int bs_;
        int tau_;
        EstimatorPath path_ = EstimatorPath::general;
        CMatrix pilots_;
        std::vector<int> pilot_index_;
        std::vector<CMatrix> filters_;
        std::vector<CMatrix> Phi_;
        std::vector<CMatrix> C_;
    };

    /// Lemma-style estimate for an arbitrary pilot book (Kronecker formulation).
    inline EstimationOutput mmse_estimate(const CMatrix &Y, int flat_ue, int bs, const Scenario &s)
    {
        return MmseEstimator(s, bs, EstimatorPath::general).output(Y, flat_ue);
    }

    /// Same estimate through M x M inverses; the pilot book must be orthogonal.
    inline EstimationOutput mmse_estimate_orthogonal_fastpath(const CMatrix &Y, int flat_ue, int bs, const Scenario &s)
    {
        return MmseEstimator(s, bs, EstimatorPath::orthogonal_fastpath).output(Y, flat_ue);
    }
} // namespace nomasim
