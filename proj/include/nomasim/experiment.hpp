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
#include "nomasim/receiver_se.hpp"
#include "nomasim/result_table.hpp"
#include "nomasim/spatial_channel.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nomasim
{
    enum class ExperimentKind
    {
        angle_sweep,
        variance_sweep,
        cluster_sweep
    };

    inline std::string_view to_string(ExperimentKind k)
    {
        switch (k)
        {
        case ExperimentKind::angle_sweep:
            return "angle-sweep";
        case ExperimentKind::variance_sweep:
            return "variance-sweep";
        case ExperimentKind::cluster_sweep:
            return "cluster-sweep";
        }
        return "?";
    }

    inline ExperimentKind parse_experiment_kind(std::string_view s)
    {
        if (s == "angle-sweep")
            return ExperimentKind::angle_sweep;
        if (s == "variance-sweep")
            return ExperimentKind::variance_sweep;
        if (s == "cluster-sweep")
            return ExperimentKind::cluster_sweep;
        throw ConfigError("unknown experiment '" + std::string(s) + "'");
    }

    /// start:step:stop inclusive.
    inline std::vector<double> angle_grid(double start_deg, double stop_deg, double step_deg)
    {
        if (!(step_deg > 0.0) || !(stop_deg >= start_deg))
            throw ConfigError("angle grid: need step > 0 and stop >= start");
        std::vector<double> g;
        const auto n = static_cast<long>(std::floor((stop_deg - start_deg) / step_deg + 1e-9));
        for (long i = 0; i <= n; ++i)
            g.push_back(start_deg + static_cast<double>(i) * step_deg);
        return g;
    }

    struct ExperimentConfig
    {
        ExperimentKind experiment = ExperimentKind::angle_sweep;
        ChannelModel model = ChannelModel::three_d;
        int L = 1;
        int M = 64;
        std::vector<int> K{2};
        std::vector<int> N{2};
        NetworkParameters params;
        ClusterSpec cluster;
        double ue_distance_m = two_user_distance_m;
        std::vector<double> angles_deg = angle_grid(-180.0, 180.0, 2.0);
        std::size_t trials = 2000;
        std::size_t drops = 1;
        std::uint64_t seed = 1;
        unsigned workers = 1;

        /// Rejects every invalid combination before any computation.
        void validate() const
        {
            params.validate();
            if (trials < 1)
                throw ConfigError("trials must be >= 1");
            if (M < 1)
                throw ConfigError("M must be positive");
            if (workers < 1)
                throw ConfigError("workers must be >= 1");
            if (K.empty() || N.empty())
                throw ConfigError("K and N lists must be non-empty");
            for (int k : K)
                if (k < 1)
                    throw ConfigError("K values must be positive");
            for (int n : N)
                if (n < 1)
                    throw ConfigError("N values must be positive");

            switch (experiment)
            {
            case ExperimentKind::angle_sweep:
            case ExperimentKind::variance_sweep:
                if (angles_deg.empty())
                    throw ConfigError("angle grid must be non-empty");
                for (double a : angles_deg)
                    if (!(a >= -180.0 && a <= 180.0))
                        throw ConfigError("angles must lie in [-180, 180] degrees");
                if (!(ue_distance_m > 0.0))
                    throw ConfigError("ue_distance_m must be positive");
                if (experiment == ExperimentKind::variance_sweep || model == ChannelModel::three_d)
                    (void)ArrayGeometry::planar(M);
                if (experiment == ExperimentKind::angle_sweep && params.tau_c <= 2)
                    throw ConfigError("tau_c must exceed the 2 pilot samples of the two-user setup");
                break;
            case ExperimentKind::cluster_sweep:
                if (drops < 1)
                    throw ConfigError("drops must be >= 1");
                for (int k : K)
                    for (int n : N)
                    {
                        ClusterScenarioConfig c;
                        c.L = L;
                        c.K = k;
                        c.M = M;
                        c.model = model;
                        c.cluster = cluster;
                        c.cluster.subcluster_size = n;
                        c.params = params;
                        c.validate();
                    }
                break;
            }
        }
    };

    /// Defaults per experiment: the reference two-user sweep, or the 4-cell
    /// clustered sweep with 500 realizations x 20 drops.
    inline ExperimentConfig default_config(ExperimentKind kind)
    {
        ExperimentConfig c;
        c.experiment = kind;
        if (kind == ExperimentKind::cluster_sweep)
        {
            c.L = 4;
            c.K = {8, 16, 24, 32, 40, 48};
            c.N = {2, 4, 8};
            c.trials = 500;
            c.drops = 20;
        }
        return c;
    }

    namespace detail
    {
        inline std::string where(const YAML::Node &n)
        {
            const YAML::Mark m = n.Mark();
            if (m.is_null())
                return "";
            return "line " + std::to_string(m.line + 1) + ": ";
        }

        template <typename T>
        T scalar_as(const YAML::Node &n, const std::string &key)
        {
            if (!n.IsScalar())
                throw ConfigError(where(n) + "key '" + key + "' must be a scalar");
            try
            {
                return n.as<T>();
            }
            catch (const YAML::Exception &)
            {
                throw ConfigError(where(n) + "key '" + key + "' has invalid value '" + n.Scalar() + "'");
            }
        }

        template <typename T>
        std::vector<T> scalar_or_list(const YAML::Node &n, const std::string &key)
        {
            std::vector<T> out;
            if (n.IsSequence())
            {
                for (const auto &item : n)
                    out.push_back(scalar_as<T>(item, key));
                if (out.empty())
                    throw ConfigError(where(n) + "key '" + key + "' must not be an empty list");
            }
            else
                out.push_back(scalar_as<T>(n, key));
            return out;
        }
    } // namespace detail

    /// Parses a flat YAML mapping. Keys:
    ///   model (2d|3d), L, K (int or list), M, N (int or list), asd_deg,
    ///   cell_side_m, cluster_radius_m, min_bs_dist_m, tau_c, p_dbm, noise_dbm,
    ///   trials, seed, drops, workers, shadow_std_db, ue_distance_m,
    ///   quadrature_nodes, angles_deg (list) or angle_start_deg/angle_stop_deg/angle_step_deg.
    /// Unknown keys and ill-typed values are reported with their line number.
    inline ExperimentConfig parse_config(const std::string &text, ExperimentKind kind)
    {
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw ConfigError(std::string("config: ") + e.what());
        }

        ExperimentConfig c = default_config(kind);
        if (root.IsNull())
        {
            c.validate();
            return c;
        }
        if (!root.IsMap())
            throw ConfigError(detail::where(root) + "config must be a mapping of key: value");

        static const std::set<std::string> known{
            "model", "L", "K", "M", "N", "asd_deg", "cell_side_m", "cluster_radius_m", "min_bs_dist_m", "tau_c",
            "p_dbm", "noise_dbm", "trials", "seed", "drops", "workers", "shadow_std_db", "ue_distance_m",
            "quadrature_nodes", "angles_deg", "angle_start_deg", "angle_stop_deg", "angle_step_deg"};

        std::optional<double> a0, a1, astep;
        for (const auto &kv : root)
        {
            const std::string key = kv.first.as<std::string>();
            const YAML::Node &v = kv.second;
            if (!known.contains(key))
                throw ConfigError(detail::where(kv.first) + "unknown key '" + key + "'");
            using detail::scalar_as;
            using detail::scalar_or_list;
            if (key == "model")
            {
                try
                {
                    c.model = parse_channel_model(scalar_as<std::string>(v, key));
                }
                catch (const ConfigError &e)
                {
                    throw ConfigError(detail::where(v) + e.what());
                }
            }
            else if (key == "L")
                c.L = scalar_as<int>(v, key);
            else if (key == "K")
                c.K = scalar_or_list<int>(v, key);
            else if (key == "M")
                c.M = scalar_as<int>(v, key);
            else if (key == "N")
                c.N = scalar_or_list<int>(v, key);
            else if (key == "asd_deg")
                c.params.asd_deg = scalar_as<double>(v, key);
            else if (key == "cell_side_m")
                c.params.cell_side_m = scalar_as<double>(v, key);
            else if (key == "cluster_radius_m")
                c.cluster.radius_m = scalar_as<double>(v, key);
            else if (key == "min_bs_dist_m")
                c.cluster.min_bs_distance_m = scalar_as<double>(v, key);
            else if (key == "tau_c")
                c.params.tau_c = scalar_as<int>(v, key);
            else if (key == "p_dbm")
                c.params.p_dbm = scalar_as<double>(v, key);
            else if (key == "noise_dbm")
                c.params.noise_dbm = scalar_as<double>(v, key);
            else if (key == "trials")
            {
                const long long t = scalar_as<long long>(v, key);
                if (t < 1)
                    throw ConfigError(detail::where(v) + "trials must be >= 1");
                c.trials = static_cast<std::size_t>(t);
            }
            else if (key == "seed")
                c.seed = scalar_as<std::uint64_t>(v, key);
            else if (key == "drops")
            {
                const long long d = scalar_as<long long>(v, key);
                if (d < 1)
                    throw ConfigError(detail::where(v) + "drops must be >= 1");
                c.drops = static_cast<std::size_t>(d);
            }
            else if (key == "workers")
            {
                const long long w = scalar_as<long long>(v, key);
                if (w < 1)
                    throw ConfigError(detail::where(v) + "workers must be >= 1");
                c.workers = static_cast<unsigned>(w);
            }
            else if (key == "shadow_std_db")
                c.params.shadow_std_db = scalar_as<double>(v, key);
            else if (key == "ue_distance_m")
                c.ue_distance_m = scalar_as<double>(v, key);
            else if (key == "quadrature_nodes")
            {
                const int q = scalar_as<int>(v, key);
                if (q < 1)
                    throw ConfigError(detail::where(v) + "quadrature_nodes must be >= 1");
                c.params.quadrature_nodes = static_cast<unsigned>(q);
            }
            else if (key == "angles_deg")
                c.angles_deg = scalar_or_list<double>(v, key);
            else if (key == "angle_start_deg")
                a0 = scalar_as<double>(v, key);
            else if (key == "angle_stop_deg")
                a1 = scalar_as<double>(v, key);
            else if (key == "angle_step_deg")
                astep = scalar_as<double>(v, key);
        }
        if (a0 || a1 || astep)
        {
            if (root["angles_deg"])
                throw ConfigError("give either angles_deg or angle_start/stop/step_deg, not both");
            c.angles_deg = angle_grid(a0.value_or(-180.0), a1.value_or(180.0), astep.value_or(2.0));
        }
        c.validate();
        return c;
    }

    inline ExperimentConfig load_config(const std::filesystem::path &path, ExperimentKind kind)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot read config file " + path.string());
        std::stringstream ss;
        ss << in.rdbuf();
        try
        {
            return parse_config(ss.str(), kind);
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }

    using ProgressSink = std::function<void(const std::string &)>;

    namespace detail
    {
        inline constexpr std::uint64_t drop_tag = 0x64726f70;  // scenario geometry and shadowing
        inline constexpr std::uint64_t code_tag = 0x636f6465;  // spreading assignment
        inline constexpr std::uint64_t angle_tag = 0x616e676c; // two-user fading streams

        inline void report(const ProgressSink &sink, const std::string &msg)
        {
            if (sink)
                sink(msg);
        }

        inline ResultRow base_row(const ExperimentConfig &c, std::string_view model)
        {
            ResultRow r;
            r.experiment = std::string(to_string(c.experiment));
            r.model = std::string(model);
            r.M = c.M;
            r.seed = c.seed;
            return r;
        }
    } // namespace detail

    /// Sum SE of the two-user single-cell setup versus the interferer angle for
    /// mMIMO (MR, M-MMSE) and NOMA with N = config.N.front() (MR, M-MMSE).
    inline std::vector<ResultRow> run_angle_sweep(const ExperimentConfig &c, const ProgressSink &progress = {})
    {
        c.validate();
        const int N = c.N.front();
        std::vector<ResultRow> rows;
        for (std::size_t a = 0; a < c.angles_deg.size(); ++a)
        {
            const double angle = c.angles_deg[a];
            const Scenario s = build_two_user_scenario(angle, c.model, c.M, c.params.asd_deg, c.params, N, c.ue_distance_m);

            MonteCarloOptions opt;
            opt.trials = c.trials;
            opt.seed = c.seed;
            opt.workers = c.workers;
            opt.stream = (detail::angle_tag << 32) | a;

            for (Scheme scheme : {Scheme::classical, Scheme::noma})
            {
                const MonteCarloResult r = run_monte_carlo(s, scheme, opt);
                for (CombinerKind k : opt.combiners)
                {
                    ResultRow row = detail::base_row(c, to_string(c.model));
                    row.scheme = std::string(to_string(scheme));
                    row.combiner = std::string(to_string(k));
                    row.N = r.N;
                    row.K = s.K;
                    row.L = s.L;
                    row.sweep_var = "interferer_angle_deg";
                    row.sweep_value = angle;
                    const SeEstimate e = r.sum_se_estimate(k);
                    row.sum_se_mean = e.mean;
                    row.sum_se_stderr = e.stderr;
                    row.trials = c.trials;
                    rows.push_back(std::move(row));
                }
            }
            detail::report(progress, "angle-sweep " + std::string(to_string(c.model)) + ": " +
                                         std::to_string(a + 1) + "/" + std::to_string(c.angles_deg.size()) +
                                         " (angle " + to_string_prec(angle, 6) + " deg)");
        }
        return rows;
    }

    /// Favorable-propagation variance tr(R1 R2)/(tr R1 tr R2) of the two-user setup for
    /// the 2D model, the 3D model and uncorrelated fading. Deterministic.
    inline std::vector<ResultRow> run_variance_sweep(const ExperimentConfig &c, const ProgressSink &progress = {})
    {
        c.validate();
        std::vector<ResultRow> rows;
        const double beta = large_scale_gain(c.ue_distance_m / 1000.0, 0.0);
        const double elevation = nominal_elevation_deg(c.ue_distance_m, c.params);
        const ArrayGeometry ula = ArrayGeometry::linear(c.M);
        const ArrayGeometry upa = ArrayGeometry::planar(c.M);
        const unsigned q = c.params.quadrature_nodes;
        const double asd = c.params.asd_deg;

        const CorrelationMatrix ref2 = correlation_2d(ula, {two_user_reference_angle_deg, elevation, asd}, beta, q);
        const CorrelationMatrix ref3 = correlation_3d(upa, {two_user_reference_angle_deg, elevation, asd}, beta, q);
        const CorrelationMatrix iid = CorrelationMatrix::uncorrelated(c.M, beta);

        for (std::size_t a = 0; a < c.angles_deg.size(); ++a)
        {
            const double angle = c.angles_deg[a] == -180.0 ? 180.0 : c.angles_deg[a];
            const double v2 = favorable_propagation_variance(ref2, correlation_2d(ula, {angle, elevation, asd}, beta, q));
            const double v3 = favorable_propagation_variance(ref3, correlation_3d(upa, {angle, elevation, asd}, beta, q));
            const double vi = favorable_propagation_variance(iid, iid);
            for (auto [model, value] : {std::pair<std::string_view, double>{"2d", v2}, {"3d", v3}, {"uncorrelated", vi}})
            {
                ResultRow row = detail::base_row(c, model);
                row.scheme = "favorable-propagation";
                row.combiner = "none";
                row.N = 1;
                row.K = 2;
                row.L = 1;
                row.sweep_var = "interferer_angle_deg";
                row.sweep_value = c.angles_deg[a];
                row.sum_se_mean = value;
                row.sum_se_stderr = 0.0;
                row.trials = 0;
                rows.push_back(std::move(row));
            }
        }
        detail::report(progress, "variance-sweep: " + std::to_string(c.angles_deg.size()) + " angles");
        return rows;
    }

    /// Aggregated per-trial sum-SE samples for one (scheme, combiner, N) series.
    struct SeriesAccumulator
    {
        Scheme scheme = Scheme::classical;
        CombinerKind combiner = CombinerKind::mr;
        int N = 1;
        std::vector<double> samples;
    };

    /// Result of the clustered sweep at one K, kept in memory for analysis.
    struct ClusterPoint
    {
        int K = 0;
        std::vector<SeriesAccumulator> series;

        const SeriesAccumulator &find(Scheme s, CombinerKind k, int N) const
        {
            for (const auto &a : series)
                if (a.scheme == s && a.combiner == k && a.N == N)
                    return a;
            throw MisuseError("ClusterPoint: series not evaluated");
        }
    };

    /// Multi-cell clustered sweep over K. For each K and drop, one deployment is
    /// built; mMIMO and every NOMA book size N run on the same fading and pilot-noise
    /// realizations. Returns per-K series of per-trial sum SE per cell.
    inline std::vector<ClusterPoint> run_cluster_points(const ExperimentConfig &c,
                                                        const std::vector<CombinerKind> &combiners,
                                                        const ProgressSink &progress = {})
    {
        c.validate();
        std::vector<ClusterPoint> points;
        for (int K : c.K)
        {
            ClusterPoint point;
            point.K = K;
            for (CombinerKind k : combiners)
                point.series.push_back({Scheme::classical, k, 1, {}});
            for (int N : c.N)
                for (CombinerKind k : combiners)
                    point.series.push_back({Scheme::noma, k, N, {}});

            for (std::size_t d = 0; d < c.drops; ++d)
            {
                ClusterScenarioConfig sc;
                sc.L = c.L;
                sc.K = K;
                sc.M = c.M;
                sc.model = c.model;
                sc.cluster = c.cluster;
                sc.cluster.subcluster_size = 1;
                sc.params = c.params;
                RandomStream drop_rng(c.seed, {detail::drop_tag, static_cast<std::uint64_t>(K), d});
                const Scenario base = build_cluster_scenario(sc, drop_rng);

                MonteCarloOptions opt;
                opt.trials = c.trials;
                opt.seed = c.seed;
                opt.workers = c.workers;
                opt.combiners = combiners;
                opt.stream = (static_cast<std::uint64_t>(K) << 32) | d;

                auto collect = [&](const MonteCarloResult &r, Scheme scheme, int N)
                {
                    for (CombinerKind k : combiners)
                        for (auto &acc : point.series)
                            if (acc.scheme == scheme && acc.combiner == k && acc.N == N)
                            {
                                const auto &v = r.sum_se[r.slot(k)];
                                acc.samples.insert(acc.samples.end(), v.begin(), v.end());
                            }
                };

                collect(run_monte_carlo(base, Scheme::classical, opt), Scheme::classical, 1);
                for (int N : c.N)
                {
                    RandomStream code_rng(c.seed, {detail::code_tag, static_cast<std::uint64_t>(K), d,
                                                   static_cast<std::uint64_t>(N)});
                    const Scenario s = base.with_spreading(random_subcluster_spreading(c.L, K, N, code_rng));
                    collect(run_monte_carlo(s, Scheme::noma, opt), Scheme::noma, N);
                }
                detail::report(progress, "cluster-sweep " + std::string(to_string(c.model)) + ": K=" +
                                             std::to_string(K) + " drop " + std::to_string(d + 1) + "/" +
                                             std::to_string(c.drops));
            }
            points.push_back(std::move(point));
        }
        return points;
    }

    inline std::vector<ResultRow> run_cluster_sweep(const ExperimentConfig &c, const ProgressSink &progress = {})
    {
        const std::vector<CombinerKind> combiners{CombinerKind::mr, CombinerKind::mmse};
        std::vector<ResultRow> rows;
        for (const ClusterPoint &p : run_cluster_points(c, combiners, progress))
            for (const SeriesAccumulator &acc : p.series)
            {
                ResultRow row = detail::base_row(c, to_string(c.model));
                row.scheme = std::string(to_string(acc.scheme));
                row.combiner = std::string(to_string(acc.combiner));
                row.N = acc.N;
                row.K = p.K;
                row.L = c.L;
                row.sweep_var = "K";
                row.sweep_value = p.K;
                const SeEstimate e = mean_and_stderr(acc.samples);
                row.sum_se_mean = e.mean;
                row.sum_se_stderr = e.stderr;
                row.trials = acc.samples.size();
                rows.push_back(std::move(row));
            }
        return rows;
    }

    inline std::vector<ResultRow> run_experiment(const ExperimentConfig &c, const ProgressSink &progress = {})
    {
        switch (c.experiment)
        {
        case ExperimentKind::angle_sweep:
            return run_angle_sweep(c, progress);
        case ExperimentKind::variance_sweep:
            return run_variance_sweep(c, progress);
        case ExperimentKind::cluster_sweep:
            return run_cluster_sweep(c, progress);
        }
        throw MisuseError("run_experiment: unknown experiment");
    }
} // namespace nomasim
