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

#include "nomasim/code_domain.hpp"
#include "nomasim/network_scenario.hpp"
#include "nomasim/parallel.hpp"
#include "nomasim/pilot_mmse.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace nomasim
{
    enum class CombinerKind
    {
        mr,
        mmse
    };

    inline std::string_view to_string(CombinerKind k) { return k == CombinerKind::mr ? "MR" : "M-MMSE"; }

    enum class Scheme
    {
        classical,
        noma
    };

    inline std::string_view to_string(Scheme s) { return s == Scheme::classical ? "mMIMO" : "NOMA"; }

    struct Combiner
    {
        CVector v;
        CombinerKind kind = CombinerKind::mr;
    };

    /// v = g_hat. With the trivial code this is classical MR, v = h_hat.
    inline Combiner mr_combiner(const CVector &g_hat) { return {g_hat, CombinerKind::mr}; }

    namespace detail
    {
        inline void check_inputs(const CMatrix &G_hat, const CMatrix &Z, std::span<const double> powers)
        {
            if (Z.rows() != G_hat.rows() || Z.cols() != G_hat.rows())
                throw DomainError("receiver: Z dimension does not match the effective channels");
            if (static_cast<Eigen::Index>(powers.size()) != G_hat.cols())
                throw DomainError("receiver: one power per effective channel required");
        }

        inline Eigen::VectorXd sqrt_powers(std::span<const double> powers)
        {
            Eigen::VectorXd s(static_cast<Eigen::Index>(powers.size()));
            for (std::size_t i = 0; i < powers.size(); ++i)
                s(static_cast<Eigen::Index>(i)) = std::sqrt(powers[i]);
            return s;
        }
    } // namespace detail

    /// S = sum_ue p_ue g_hat g_hat^H + Z.
    inline CMatrix total_covariance(const CMatrix &G_hat, const CMatrix &Z, std::span<const double> powers)
    {
        detail::check_inputs(G_hat, Z, powers);
        const CMatrix scaled = G_hat * detail::sqrt_powers(powers).asDiagonal();
        CMatrix S = Z;
        S.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
        S.triangularView<Eigen::StrictlyUpper>() = S.adjoint();
        return S;
    }

    /// Multicell MMSE combiners v_k = p_k S^{-1} g_hat_k for the requested targets,
    /// sharing one Cholesky factorization of S.
    inline std::vector<Combiner> mmse_combiners(const CMatrix &G_hat, const CMatrix &Z, std::span<const double> powers,
                                                std::span<const int> targets)
    {
        const CMatrix S = total_covariance(G_hat, Z, powers);
        Eigen::LLT<CMatrix> llt(S);
        if (llt.info() != Eigen::Success)
            throw NumericalError("mmse_combiners: S is not positive definite");
        CMatrix rhs(G_hat.rows(), static_cast<Eigen::Index>(targets.size()));
        for (std::size_t t = 0; t < targets.size(); ++t)
            rhs.col(static_cast<Eigen::Index>(t)) = powers[static_cast<std::size_t>(targets[t])] * G_hat.col(targets[t]);
        const CMatrix V = llt.solve(rhs);
        std::vector<Combiner> out;
        out.reserve(targets.size());
        for (Eigen::Index t = 0; t < V.cols(); ++t)
            out.push_back({V.col(t), CombinerKind::mmse});
        return out;
    }

    inline Combiner mmse_combiner(const CMatrix &G_hat, const CMatrix &Z, std::span<const double> powers, int target)
    {
        const int targets[] = {target};
        return mmse_combiners(G_hat, Z, powers, targets).front();
    }

    /// Effective instantaneous SINR of UE `target` with combiner v:
    /// p_k |v^H g_k|^2 / (sum_{i != k} p_i |v^H g_i|^2 + v^H Z v).
    inline double instantaneous_sinr(const CVector &v, int target, const CMatrix &G_hat, const CMatrix &Z,
                                     std::span<const double> powers)
    {
        detail::check_inputs(G_hat, Z, powers);
        if (v.size() != G_hat.rows())
            throw DomainError("instantaneous_sinr: combiner length mismatch");
        if (v.squaredNorm() == 0.0)
            throw DomainError("instantaneous_sinr: zero combiner");
        const CVector proj = G_hat.adjoint() * v;
        double interference = (v.adjoint() * Z * v)(0).real();
        double signal = 0.0;
        for (Eigen::Index i = 0; i < proj.size(); ++i)
        {
            const double term = powers[static_cast<std::size_t>(i)] * std::norm(proj(i));
            if (i == target)
                signal = term;
            else
                interference += term;
        }
        return signal / interference;
    }

    /// Same SINR given the total covariance S (denominator v^H S v - signal).
    inline double sinr_from_total(const CVector &v, const CVector &g_hat, double power, const CMatrix &S)
    {
        if (v.squaredNorm() == 0.0)
            throw DomainError("sinr: zero combiner");
        const double signal = power * std::norm(v.dot(g_hat));
        const double total = v.dot(S * v).real();
        return signal / (total - signal);
    }

    /// Maximized SINR in closed form:
    /// p_k g_k^H (sum_{i != k} p_i g_i g_i^H + Z)^{-1} g_k.
    inline double mmse_sinr(const CMatrix &G_hat, const CMatrix &Z, std::span<const double> powers, int target)
    {
        detail::check_inputs(G_hat, Z, powers);
        CMatrix S = Z;
        for (Eigen::Index i = 0; i < G_hat.cols(); ++i)
            if (i != target)
                S.noalias() += powers[static_cast<std::size_t>(i)] * G_hat.col(i) * G_hat.col(i).adjoint();
        Eigen::LLT<CMatrix> llt(hermitian_part(S));
        if (llt.info() != Eigen::Success)
            throw NumericalError("mmse_sinr: interference covariance is not positive definite");
        const CVector g = G_hat.col(target);
        return powers[static_cast<std::size_t>(target)] * g.dot(llt.solve(g)).real();
    }

    // ---- Spectral efficiency --------------------------------------------------

    /// (1/N) tau_u / tau_c.
    inline double prelog(const CoherenceBudget &budget, int N)
    {
        if (N < 1)
            throw DomainError("prelog: N must be positive");
        return budget.uplink_fraction() / static_cast<double>(N);
    }

    struct SeEstimate
    {
        double mean = 0.0;
        double stderr = 0.0;
        std::size_t samples = 0;
    };

    /// Sample mean and standard error of a set of per-trial values.
    inline SeEstimate mean_and_stderr(std::span<const double> values)
    {
        if (values.empty())
            throw DomainError("mean_and_stderr: empty sample set");
        const double n = static_cast<double>(values.size());
        double mean = 0.0;
        for (double v : values)
            mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : values)
            ss += (v - mean) * (v - mean);
        const double stderr = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        return {mean, stderr, values.size()};
    }

    /// SE = (1/N)(tau_u/tau_c) mean(log2(1 + gamma)).
    inline SeEstimate spectral_efficiency(std::span<const double> gamma, const CoherenceBudget &budget, int N)
    {
        if (gamma.empty())
            throw DomainError("spectral_efficiency: empty sample set");
        const double pre = prelog(budget, N);
        std::vector<double> se(gamma.size());
        for (std::size_t i = 0; i < gamma.size(); ++i)
        {
            if (!(gamma[i] >= 0.0))
                throw DomainError("spectral_efficiency: SINR samples must be non-negative");
            se[i] = pre * std::log2(1.0 + gamma[i]);
        }
        return mean_and_stderr(se);
    }

    // ---- Monte-Carlo engine -------------------------------------------------------

    struct MonteCarloOptions
    {
        std::size_t trials = 1;
        std::uint64_t seed = 0;
        unsigned workers = 1;
        std::vector<CombinerKind> combiners{CombinerKind::mr, CombinerKind::mmse};
        EstimatorPath estimator = EstimatorPath::automatic;
        /// Extra stream key, e.g. the drop index, so that several runs sharing a seed
        /// draw independent fading. Runs with equal (seed, stream) see identical
        /// channels and pilot noise regardless of scheme.
        std::uint64_t stream = 0;
    };

    struct MonteCarloResult
    {
        Scheme scheme = Scheme::classical;
        int N = 1;
        int L = 1;
        int K = 1;
        std::size_t trials = 0;
        double prelog = 0.0;
        std::vector<CombinerKind> combiners;
        /// Per combiner: trials x (L K) SINR samples.
        std::vector<Eigen::MatrixXd> gamma;
        /// Per combiner: per-trial sum SE per cell (sum over all UEs divided by L).
        std::vector<std::vector<double>> sum_se;

        std::size_t slot(CombinerKind k) const
        {
            for (std::size_t i = 0; i < combiners.size(); ++i)
                if (combiners[i] == k)
                    return i;
            throw MisuseError("MonteCarloResult: combiner was not evaluated");
        }

        SeEstimate sum_se_estimate(CombinerKind k) const { return mean_and_stderr(sum_se[slot(k)]); }

        /// Per-UE SE averaged over trials.
        std::vector<double> ue_se(CombinerKind k) const
        {
            const Eigen::MatrixXd &g = gamma[slot(k)];
            std::vector<double> out(static_cast<std::size_t>(g.cols()), 0.0);
            for (Eigen::Index ue = 0; ue < g.cols(); ++ue)
            {
                double acc = 0.0;
                for (Eigen::Index t = 0; t < g.rows(); ++t)
                    acc += std::log2(1.0 + g(t, ue));
                out[static_cast<std::size_t>(ue)] = prelog * acc / static_cast<double>(g.rows());
            }
            return out;
        }
    };

    /// Deterministic per-trial state shared read-only by all workers.
    class UplinkEngine
    {
    public:
        UplinkEngine(const Scenario &s, Scheme scheme, EstimatorPath path = EstimatorPath::automatic)
            : scenario_(s), scheme_(scheme),
              spreading_(scheme == Scheme::classical ? trivial_spreading(s.ue_count()) : s.spreading)
        {
            s.validate();
            estimators_.reserve(static_cast<std::size_t>(s.L));
            Z_.reserve(static_cast<std::size_t>(s.L));
            for (int j = 0; j < s.L; ++j)
            {
                estimators_.emplace_back(s, j, path);
                Z_.push_back(build_Z(spreading_, s.powers, estimators_.back().error_covariances(), s.noise_power));
            }
        }

        int N() const { return spreading_.length(); }
        const SpreadingAssignment &spreading() const { return spreading_; }
        const MmseEstimator &estimator(int bs) const { return estimators_[static_cast<std::size_t>(bs)]; }
        const CMatrix &Z(int bs) const { return Z_[static_cast<std::size_t>(bs)]; }

        /// Effective-channel estimates of every UE at BS `bs` (columns, flat UE order).
        CMatrix effective_estimates(const CMatrix &Y, int bs) const
        {
            const int M = scenario_.M;
            CMatrix G(static_cast<Eigen::Index>(N()) * M, scenario_.ue_count());
            const MmseEstimator &est = estimator(bs);
            for (int ue = 0; ue < scenario_.ue_count(); ++ue)
                G.col(ue) = effective_channel(spreading_.sequence_of(ue), est.estimate(Y, ue));
            return G;
        }

        /// One coherence block: draws channels and pilot noise from `rng`, estimates,
        /// combines and writes the SINR of every UE for each combiner into out[c].
        void run_trial(RandomStream &rng, std::span<const CombinerKind> combiners,
                       std::vector<std::vector<double>> &out) const
        {
            const Scenario &s = scenario_;
            const ChannelSet channels = draw_channels(s, rng);
            const std::vector<CMatrix> Y = simulate_pilot_phase(s, channels, rng);
            out.assign(combiners.size(), std::vector<double>(static_cast<std::size_t>(s.ue_count()), 0.0));

            std::vector<int> targets(static_cast<std::size_t>(s.K));
            for (int j = 0; j < s.L; ++j)
            {
                const CMatrix G = effective_estimates(Y[static_cast<std::size_t>(j)], j);
                const CMatrix S = total_covariance(G, Z(j), s.powers);
                for (int k = 0; k < s.K; ++k)
                    targets[static_cast<std::size_t>(k)] = s.flat(j, k);

                for (std::size_t c = 0; c < combiners.size(); ++c)
                {
                    if (combiners[c] == CombinerKind::mr)
                    {
                        for (int ue : targets)
                            out[c][static_cast<std::size_t>(ue)] = sinr_from_total(G.col(ue), G.col(ue), s.power(ue), S);
                    }
                    else
                    {
                        Eigen::LLT<CMatrix> llt(S);
                        if (llt.info() != Eigen::Success)
                            throw NumericalError("M-MMSE: S is not positive definite at BS " + std::to_string(j));
                        CMatrix rhs(G.rows(), s.K);
                        for (int k = 0; k < s.K; ++k)
                            rhs.col(k) = s.power(targets[static_cast<std::size_t>(k)]) * G.col(targets[static_cast<std::size_t>(k)]);
                        const CMatrix V = llt.solve(rhs);
                        for (int k = 0; k < s.K; ++k)
                        {
                            const int ue = targets[static_cast<std::size_t>(k)];
                            out[c][static_cast<std::size_t>(ue)] = sinr_from_total(V.col(k), G.col(ue), s.power(ue), S);
                        }
                    }
                }
            }
        }

    private:
        Scenario scenario_;
        Scheme scheme_;
        SpreadingAssignment spreading_;
        std::vector<MmseEstimator> estimators_;
        std::vector<CMatrix> Z_;
    };

    /// Averages the SINR-based SE over `trials` independent coherence blocks. Trial t
    /// draws from RandomStream(seed, {stream, t}); results are stored by trial index,
    /// so they do not depend on the number of workers.
    inline MonteCarloResult run_monte_carlo(const Scenario &s, Scheme scheme, const MonteCarloOptions &options)
    {
        if (options.trials == 0)
            throw ConfigError("run_monte_carlo: trials must be >= 1");
        if (options.combiners.empty())
            throw ConfigError("run_monte_carlo: no combiner requested");

        const UplinkEngine engine(s, scheme, options.estimator);

        MonteCarloResult result;
        result.scheme = scheme;
        result.N = engine.N();
        result.L = s.L;
        result.K = s.K;
        result.trials = options.trials;
        result.prelog = prelog(s.budget, result.N);
        result.combiners = options.combiners;
        result.gamma.assign(options.combiners.size(),
                            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(options.trials), s.ue_count()));

        parallel_for(options.trials, options.workers, [&](std::size_t t)
                     {
                         RandomStream rng(options.seed, {options.stream, static_cast<std::uint64_t>(t)});
                         std::vector<std::vector<double>> sinr;
                         engine.run_trial(rng, options.combiners, sinr);
                         for (std::size_t c = 0; c < sinr.size(); ++c)
                             for (std::size_t ue = 0; ue < sinr[c].size(); ++ue)
                                 result.gamma[c](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(ue)) = sinr[c][ue]; });

        result.sum_se.assign(options.combiners.size(), std::vector<double>(options.trials, 0.0));
        for (std::size_t c = 0; c < options.combiners.size(); ++c)
            for (std::size_t t = 0; t < options.trials; ++t)
            {
                double acc = 0.0;
                for (Eigen::Index ue = 0; ue < s.ue_count(); ++ue)
                    acc += std::log2(1.0 + result.gamma[c](static_cast<Eigen::Index>(t), ue));
                result.sum_se[c][t] = result.prelog * acc / static_cast<double>(s.L);
            }
        return result;
    }

    /// One Monte-Carlo result row.
    struct SeRecord
    {
        Scheme scheme = Scheme::classical;
        CombinerKind combiner = CombinerKind::mr;
        ChannelModel model = ChannelModel::two_d;
        int N = 1;
        int K = 1;
        int M = 1;
        int L = 1;
        std::size_t trials = 0;
        std::uint64_t seed = 0;
        std::vector<double> ue_se;
        double sum_se_mean = 0.0;
        double sum_se_stderr = 0.0;
    };

    inline SeRecord make_record(const Scenario &s, const MonteCarloResult &r, CombinerKind k, std::uint64_t seed)
    {
        SeRecord rec;
        rec.scheme = r.scheme;
        rec.combiner = k;
        rec.model = s.model;
        rec.N = r.N;
        rec.K = s.K;
        rec.M = s.M;
        rec.L = s.L;
        rec.trials = r.trials;
        rec.seed = seed;
        rec.ue_se = r.ue_se(k);
        const SeEstimate e = r.sum_se_estimate(k);
        rec.sum_se_mean = e.mean;
        rec.sum_se_stderr = e.stderr;
        return rec;
    }
} // namespace nomasim
