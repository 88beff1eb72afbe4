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
#include "nomasim/core.hpp"
#include "nomasim/pilot_book.hpp"
#include "nomasim/random.hpp"
#include "nomasim/spatial_channel.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace nomasim
{
    /// Samples per coherence block: tau_c = tau_p + tau_u + tau_d.
    struct CoherenceBudget
    {
        int tau_c = 200;
        int tau_p = 0;
        int tau_u = 200;
        int tau_d = 0;

        /// Uplink-only split: everything except the pilots carries uplink data.
        static CoherenceBudget uplink_only(int tau_c, int tau_p)
        {
            CoherenceBudget b{tau_c, tau_p, tau_c - tau_p, 0};
            b.validate();
            return b;
        }

        void validate(int required_pilots = 0) const
        {
            if (tau_c <= 0 || tau_p < 0 || tau_u < 0 || tau_d < 0)
                throw ConfigError("CoherenceBudget: sample counts must be non-negative and tau_c positive");
            if (tau_c != tau_p + tau_u + tau_d)
                throw ConfigError("CoherenceBudget: tau_c must equal tau_p + tau_u + tau_d");
            if (tau_p < required_pilots)
                throw ConfigError("CoherenceBudget: tau_p = " + std::to_string(tau_p) + " is shorter than the " +
                                  std::to_string(required_pilots) + " orthogonal pilots required");
        }

        double uplink_fraction() const { return static_cast<double>(tau_u) / static_cast<double>(tau_c); }
    };

    /// Network-wide constants. Defaults follow the reference deployment
    /// (250 m cells, -94 dBm noise, 20 dBm UEs, 200-sample blocks).
    struct NetworkParameters
    {
        double cell_side_m = 250.0;
        double noise_dbm = -94.0;
        double p_dbm = 20.0;
        int tau_c = 200;
        double bs_height_m = 25.0;
        double ue_height_m = 1.5;
        double shadow_std_db = 10.0;
        double asd_deg = 2.0;
        unsigned quadrature_nodes = default_quadrature_nodes;

        double noise_power() const { return dbm_to_watt(noise_dbm); }
        double ue_power() const { return dbm_to_watt(p_dbm); }

        void validate() const
        {
            if (!(cell_side_m > 0.0))
                throw ConfigError("cell_side_m must be positive");
            if (tau_c <= 0)
                throw ConfigError("tau_c must be positive");
            if (!(asd_deg > 0.0))
                throw ConfigError("asd_deg must be positive");
            if (!(shadow_std_db >= 0.0))
                throw ConfigError("shadow_std_db must be non-negative");
            if (!(bs_height_m > ue_height_m))
                throw ConfigError("bs_height_m must exceed ue_height_m");
            if (!std::isfinite(noise_dbm) || !std::isfinite(p_dbm))
                throw ConfigError("noise_dbm and p_dbm must be finite");
        }
    };

    enum class ChannelModel
    {
        two_d,
        three_d
    };

    inline std::string_view to_string(ChannelModel m) { return m == ChannelModel::two_d ? "2d" : "3d"; }

    inline ChannelModel parse_channel_model(std::string_view s)
    {
        if (s == "2d" || s == "2D")
            return ChannelModel::two_d;
        if (s == "3d" || s == "3D")
            return ChannelModel::three_d;
        throw ConfigError("unknown channel model '" + std::string(s) + "' (expected 2d or 3d)");
    }

    /// ULA for the 2D model, square planar array for the 3D model.
    inline ArrayGeometry geometry_for(ChannelModel model, int antennas)
    {
        return model == ChannelModel::two_d ? ArrayGeometry::linear(antennas) : ArrayGeometry::planar(antennas);
    }

    struct Point
    {
        double x = 0.0;
        double y = 0.0;

        friend bool operator==(const Point &, const Point &) = default;
    };

    inline double distance(const Point &a, const Point &b) { return std::hypot(a.x - b.x, a.y - b.y); }

    /// Large-scale fading gain -148.1 - 37.6 log10(d / 1 km) + F [dB], returned linear.
    inline double large_scale_gain_db(double distance_km, double shadow_db)
    {
        if (!(distance_km > 0.0))
            throw DomainError("large_scale_gain: distance must be positive");
        return -148.1 - 37.6 * std::log10(distance_km) + shadow_db;
    }

    inline double large_scale_gain(double distance_km, double shadow_db)
    {
        return db_to_linear(large_scale_gain_db(distance_km, shadow_db));
    }

    /// Elevation (degrees, negative = below the array) of a ground UE at the given
    /// horizontal distance.
    inline double nominal_elevation_deg(double horizontal_distance_m, const NetworkParameters &params)
    {
        return -rad_to_deg(std::atan((params.bs_height_m - params.ue_height_m) / horizontal_distance_m));
    }

    /// Complete network description. UEs are indexed cell-major (flat = l * K + i);
    /// correlation(ue, bs) is the matrix of the link from that UE to BS `bs`.
    struct Scenario
    {
        int L = 1;
        int K = 1;
        int M = 1;
        ChannelModel model = ChannelModel::two_d;
        ArrayGeometry geometry = ArrayGeometry::linear(1);
        NetworkParameters params;

        std::vector<Point> bs_positions;
        std::vector<Point> ue_positions;
        std::vector<double> powers;
        double noise_power = 0.0;
        CoherenceBudget budget;
        PilotBook pilots = shared_orthogonal_pilots(1, 1);
        SpreadingAssignment spreading;
        std::shared_ptr<const std::vector<CorrelationMatrix>> links;

        int ue_count() const { return L * K; }
        int flat(int cell, int ue) const { return cell * K + ue; }
        int cell_of(int flat_ue) const { return flat_ue / K; }

        const CorrelationMatrix &correlation(int flat_ue, int bs) const
        {
            return (*links)[static_cast<std::size_t>(flat_ue * L + bs)];
        }

        double power(int flat_ue) const { return powers[static_cast<std::size_t>(flat_ue)]; }

        /// Same deployment, different spreading codes. Correlation matrices are shared.
        Scenario with_spreading(SpreadingAssignment spreading_assignment) const
        {
            Scenario s = *this;
            s.spreading = std::move(spreading_assignment);
            s.validate();
            return s;
        }

        void validate() const
        {
            if (L < 1 || K < 1 || M < 1)
                throw ConfigError("Scenario: L, K and M must be positive");
            const auto n = static_cast<std::size_t>(ue_count());
            if (powers.size() != n)
                throw ConfigError("Scenario: one power per UE required");
            for (double p : powers)
                if (!(p > 0.0))
                    throw ConfigError("Scenario: all UE powers must be positive");
            if (!(noise_power > 0.0))
                throw ConfigError("Scenario: noise power must be positive");
            if (!links || links->size() != n * static_cast<std::size_t>(L))
                throw ConfigError("Scenario: every UE needs L correlation matrices");
            for (const auto &R : *links)
                if (R.size() != M)
                    throw ConfigError("Scenario: correlation matrix size differs from M");
            if (pilots.ue_count() != ue_count())
                throw ConfigError("Scenario: pilot assignment must cover every UE");
            budget.validate(pilots.tau_p());
            if (spreading.code.size() != n)
                throw ConfigError("Scenario: spreading assignment must cover every UE");
            for (int c : spreading.code)
                if (c < 0 || c >= spreading.book.size())
                    throw ConfigError("Scenario: spreading code index out of range");
        }
    };

    /// Partitions each cell's K UEs uniformly at random into K/N subclusters of N UEs
    /// and hands the N orthogonal codes out by a random permutation inside each.
    inline SpreadingAssignment random_subcluster_spreading(int L, int K, int N, RandomStream &rng)
    {
        if (N < 1 || K % N != 0)
            throw ConfigError("K = " + std::to_string(K) + " is not a multiple of N = " + std::to_string(N));
        SpreadingAssignment a;
        a.book = orthogonal_spreading_book(N);
        a.code.assign(static_cast<std::size_t>(L * K), 0);
        a.subcluster.assign(static_cast<std::size_t>(L * K), 0);
        for (int l = 0; l < L; ++l)
        {
            const std::vector<int> order = rng.permutation(K);
            for (int s = 0; s < K / N; ++s)
            {
                const std::vector<int> codes = rng.permutation(N);
                for (int q = 0; q < N; ++q)
                {
                    const auto ue = static_cast<std::size_t>(l * K + order[static_cast<std::size_t>(s * N + q)]);
                    a.code[ue] = codes[static_cast<std::size_t>(q)];
                    a.subcluster[ue] = s;
                }
            }
        }
        return a;
    }

    /// Correlation matrix of the link between a UE and a BS from positions and shadowing.
    inline CorrelationMatrix link_correlation(ChannelModel model, const ArrayGeometry &geometry, const Point &ue,
                                              const Point &bs, double shadow_db, const NetworkParameters &params)
    {
        const double d = distance(ue, bs);
        const double beta = large_scale_gain(d / 1000.0, shadow_db);
        AngularSpec angles;
        angles.azimuth_deg = rad_to_deg(std::atan2(ue.y - bs.y, ue.x - bs.x));
        angles.elevation_deg = nominal_elevation_deg(d, params);
        angles.asd_deg = params.asd_deg;
        return model == ChannelModel::two_d ? correlation_2d(geometry, angles, beta, params.quadrature_nodes)
                                            : correlation_3d(geometry, angles, beta, params.quadrature_nodes);
    }

    // ---- Single-cell two-user setup ------------------------------------------

    inline constexpr double two_user_reference_angle_deg = 30.0;
    inline constexpr double two_user_distance_m = 140.0;

    /// One BS at the origin; UE 0 at 30 degrees, UE 1 at the interferer angle, both at
    /// the same distance without shadowing. Angles are wrapped to (-180, 180].
    inline Scenario build_two_user_scenario(double interferer_angle_deg, ChannelModel model, int M,
                                            double asd_deg = 2.0, NetworkParameters params = {}, int N = 2,
                                            double ue_distance_m = two_user_distance_m)
    {
        if (!(interferer_angle_deg >= -180.0 && interferer_angle_deg <= 180.0))
            throw DomainError("build_two_user_scenario: interferer angle must lie in [-180, 180] degrees");
        if (!(ue_distance_m > 0.0))
            throw DomainError("build_two_user_scenario: UE distance must be positive");
        if (interferer_angle_deg == -180.0)
            interferer_angle_deg = 180.0;
        params.asd_deg = asd_deg;
        params.validate();

        Scenario s;
        s.L = 1;
        s.K = 2;
        s.M = M;
        s.model = model;
        s.geometry = geometry_for(model, M);
        s.params = params;
        s.bs_positions = {Point{0.0, 0.0}};

        const double beta = large_scale_gain(ue_distance_m / 1000.0, 0.0);
        auto links = std::make_shared<std::vector<CorrelationMatrix>>();
        for (double angle : {two_user_reference_angle_deg, interferer_angle_deg})
        {
            const double a = deg_to_rad(angle);
            s.ue_positions.push_back({ue_distance_m * std::cos(a), ue_distance_m * std::sin(a)});
            AngularSpec spec{angle, nominal_elevation_deg(ue_distance_m, params), asd_deg};
            links->push_back(one_ring_correlation(s.geometry, spec, beta, params.quadrature_nodes));
        }
        s.links = std::move(links);

        s.powers.assign(2, params.ue_power());
        s.noise_power = params.noise_power();
        s.pilots = shared_orthogonal_pilots(1, 2);
        s.budget = CoherenceBudget::uplink_only(params.tau_c, s.pilots.tau_p());

        s.spreading.book = orthogonal_spreading_book(N);
        s.spreading.code = {0, N > 1 ? 1 : 0};
        s.spreading.subcluster = {0, 0};
        s.validate();
        return s;
    }

    // ---- Multi-cell clustered setup -------------------------------------------

    struct ClusterSpec
    {
        double radius_m = 10.0;
        double min_bs_distance_m = 25.0;
        int subcluster_size = 1;
    };

    struct ClusterScenarioConfig
    {
        int L = 4;
        int K = 8;
        int M = 64;
        ChannelModel model = ChannelModel::two_d;
        ClusterSpec cluster;
        NetworkParameters params;

        void validate() const
        {
            params.validate();
            const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
            if (L < 1 || side * side != L)
                throw ConfigError("L must be a perfect square (square grid of cells), got " + std::to_string(L));
            if (K < 1)
                throw ConfigError("K must be positive");
            if (M < 1)
                throw ConfigError("M must be positive");
            if (model == ChannelModel::three_d)
                (void)ArrayGeometry::planar(M);
            if (cluster.subcluster_size < 1 || K % cluster.subcluster_size != 0)
                throw ConfigError("K = " + std::to_string(K) + " is not a multiple of N = " +
                                  std::to_string(cluster.subcluster_size));
            if (!(cluster.radius_m > 0.0))
                throw ConfigError("cluster radius must be positive");
            if (!(cluster.min_bs_distance_m >= 0.0))
                throw ConfigError("min_bs_dist_m must be non-negative");
            const double half = 0.5 * params.cell_side_m;
            if (cluster.min_bs_distance_m >= half * std::sqrt(2.0))
                throw ConfigError("min_bs_dist_m leaves no room for a cluster inside the cell");
            if (K > params.tau_c)
                throw ConfigError("K orthogonal pilots do not fit in tau_c");
        }
    };

    /// sqrt(L) x sqrt(L) grid of square cells, BS at each center. In each cell one
    /// cluster center is drawn uniformly (redrawn until far enough from the BS) and
    /// K UEs uniformly in the disk around it. Shadowing is drawn once per link.
    /// Random draws happen in a fixed order, so the scenario is a function of the
    /// config and the stream state.
    inline Scenario build_cluster_scenario(const ClusterScenarioConfig &config, RandomStream &rng)
    {
        config.validate();
        const int L = config.L;
        const int K = config.K;
        const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(L))));
        const double cell = config.params.cell_side_m;

        Scenario s;
        s.L = L;
        s.K = K;
        s.M = config.M;
        s.model = config.model;
        s.geometry = geometry_for(config.model, config.M);
        s.params = config.params;

        for (int l = 0; l < L; ++l)
            s.bs_positions.push_back({(l % side + 0.5) * cell, (l / side + 0.5) * cell});

        for (int l = 0; l < L; ++l)
        {
            const Point &bs = s.bs_positions[static_cast<std::size_t>(l)];
            Point center;
            do
            {
                center.x = bs.x - 0.5 * cell + cell * rng.uniform();
                center.y = bs.y - 0.5 * cell + cell * rng.uniform();
            } while (distance(center, bs) < config.cluster.min_bs_distance_m);

            for (int i = 0; i < K; ++i)
            {
                const double r = config.cluster.radius_m * std::sqrt(rng.uniform());
                const double a = 2.0 * std::numbers::pi * rng.uniform();
                s.ue_positions.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
            }
        }

        std::vector<double> shadow(static_cast<std::size_t>(L * K * L));
        for (auto &f : shadow)
            f = rng.normal(0.0, config.params.shadow_std_db);

        auto links = std::make_shared<std::vector<CorrelationMatrix>>();
        links->reserve(shadow.size());
        for (int ue = 0; ue < L * K; ++ue)
            for (int j = 0; j < L; ++j)
                links->push_back(link_correlation(config.model, s.geometry, s.ue_positions[static_cast<std::size_t>(ue)],
                                                  s.bs_positions[static_cast<std::size_t>(j)],
                                                  shadow[static_cast<std::size_t>(ue * L + j)], config.params));
        s.links = std::move(links);

        s.powers.assign(static_cast<std::size_t>(L * K), config.params.ue_power());
        s.noise_power = config.params.noise_power();
        s.pilots = shared_orthogonal_pilots(L, K);
        s.budget = CoherenceBudget::uplink_only(config.params.tau_c, s.pilots.tau_p());
        s.spreading = random_subcluster_spreading(L, K, config.cluster.subcluster_size, rng);
        s.validate();
        return s;
    }
} // namespace nomasim
