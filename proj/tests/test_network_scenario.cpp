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

#include "nomasim/network_scenario.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace nomasim;

TEST(LargeScaleGain, ReferenceValues)
{
    EXPECT_NEAR(large_scale_gain(1.0, 0.0) / 1.549e-15, 1.0, 1e-3);
    EXPECT_NEAR(large_scale_gain_db(0.1, 0.0), -110.5, 1e-12);
    // -148.1 - 37.6 log10(0.25) + 3, evaluated by hand: 37.6 * 0.60206 = 22.6375
    EXPECT_NEAR(large_scale_gain_db(0.25, 3.0), -122.46, 0.01);
    EXPECT_THROW(large_scale_gain(0.0, 0.0), DomainError);
    EXPECT_THROW(large_scale_gain(-1.0, 0.0), DomainError);
}

TEST(LargeScaleGain, StrictlyDecreasingInDistance)
{
    double prev = large_scale_gain(0.001, 0.0);
    for (double d = 0.002; d < 2.0; d *= 1.1)
    {
        const double b = large_scale_gain(d, 0.0);
        EXPECT_LT(b, prev);
        prev = b;
    }
}

TEST(CoherenceBudget, Validation)
{
    const CoherenceBudget b = CoherenceBudget::uplink_only(200, 32);
    EXPECT_EQ(b.tau_u, 168);
    EXPECT_DOUBLE_EQ(b.uplink_fraction(), 0.84);
    EXPECT_THROW(b.validate(33), ConfigError);
    EXPECT_THROW(CoherenceBudget::uplink_only(10, 11), ConfigError);
    CoherenceBudget bad{200, 10, 100, 0};
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(TwoUserScenario, SameAngleGivesIdenticalMatrices)
{
    for (ChannelModel m : {ChannelModel::two_d, ChannelModel::three_d})
    {
        const Scenario s = build_two_user_scenario(30.0, m, 16);
        EXPECT_EQ(s.correlation(0, 0).matrix(), s.correlation(1, 0).matrix());
        EXPECT_EQ(s.L, 1);
        EXPECT_EQ(s.K, 2);
        EXPECT_EQ(s.pilots.tau_p(), 2);
        EXPECT_EQ(s.budget.tau_u, 198);
    }
}

TEST(TwoUserScenario, AngleWraps)
{
    const Scenario a = build_two_user_scenario(-180.0, ChannelModel::three_d, 16);
    const Scenario b = build_two_user_scenario(180.0, ChannelModel::three_d, 16);
    EXPECT_EQ(a.correlation(1, 0).matrix(), b.correlation(1, 0).matrix());
    EXPECT_EQ(a.ue_positions[1].x, b.ue_positions[1].x);
    EXPECT_EQ(a.ue_positions[1].y, b.ue_positions[1].y);
    EXPECT_THROW(build_two_user_scenario(181.0, ChannelModel::two_d, 16), DomainError);
    EXPECT_THROW(build_two_user_scenario(0.0, ChannelModel::three_d, 15), DomainError);
}

TEST(TwoUserScenario, GeometryAndGain)
{
    const Scenario s = build_two_user_scenario(-90.0, ChannelModel::three_d, 64);
    const double beta = large_scale_gain(0.140, 0.0);
    EXPECT_NEAR(s.correlation(0, 0).beta() / beta, 1.0, 1e-12);
    EXPECT_NEAR(distance(s.ue_positions[1], s.bs_positions[0]), 140.0, 1e-9);
    EXPECT_NEAR(nominal_elevation_deg(140.0, s.params), -rad_to_deg(std::atan(23.5 / 140.0)), 1e-12);
    EXPECT_NEAR(s.noise_power, dbm_to_watt(-94.0), 0.0);
    EXPECT_NEAR(s.power(0), 0.1, 1e-15);
}

TEST(TwoUserScenario, LinearArrayMirrorAt150)
{
    const Scenario a = build_two_user_scenario(30.0, ChannelModel::two_d, 64);
    const Scenario b = build_two_user_scenario(150.0, ChannelModel::two_d, 64);
    EXPECT_NEAR(favorable_propagation_variance(a.correlation(0, 0), a.correlation(1, 0)),
                favorable_propagation_variance(b.correlation(0, 0), b.correlation(1, 0)), 1e-6);
}

namespace
{
    ClusterScenarioConfig small_config(int K, int N, ChannelModel model = ChannelModel::two_d)
    {
        ClusterScenarioConfig c;
        c.L = 4;
        c.K = K;
        c.M = 16;
        c.model = model;
        c.cluster.subcluster_size = N;
        c.params.quadrature_nodes = 64;
        return c;
    }
} // namespace

TEST(ClusterScenario, GeometryInvariants)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        RandomStream rng(seed);
        const Scenario s = build_cluster_scenario(small_config(8, 2), rng);
        ASSERT_EQ(s.bs_positions.size(), 4u);
        for (int l = 0; l < 4; ++l)
        {
            const Point &bs = s.bs_positions[static_cast<std::size_t>(l)];
            EXPECT_DOUBLE_EQ(bs.x, (l % 2 + 0.5) * 250.0);
            EXPECT_DOUBLE_EQ(bs.y, (l / 2 + 0.5) * 250.0);
            // the cluster center is unknown, but all UEs of a cell lie within 2r of each other
            // and within r of a point at least 25 m from the BS
            Point centroid{0.0, 0.0};
            for (int k = 0; k < 8; ++k)
            {
                centroid.x += s.ue_positions[static_cast<std::size_t>(s.flat(l, k))].x / 8.0;
                centroid.y += s.ue_positions[static_cast<std::size_t>(s.flat(l, k))].y / 8.0;
            }
            for (int k = 0; k < 8; ++k)
            {
                const Point &p = s.ue_positions[static_cast<std::size_t>(s.flat(l, k))];
                EXPECT_LE(distance(p, centroid), 20.0);
                EXPECT_GE(distance(p, bs), 25.0 - 10.0);
            }
        }
    }
}

TEST(ClusterScenario, LinksCarryPathLossAndShadowing)
{
    RandomStream rng(1);
    ClusterScenarioConfig c = small_config(4, 1);
    c.params.shadow_std_db = 0.0;
    const Scenario s = build_cluster_scenario(c, rng);
    for (int ue = 0; ue < s.ue_count(); ++ue)
        for (int j = 0; j < s.L; ++j)
        {
            const double d = distance(s.ue_positions[static_cast<std::size_t>(ue)], s.bs_positions[static_cast<std::size_t>(j)]);
            EXPECT_NEAR(s.correlation(ue, j).beta() / large_scale_gain(d / 1000.0, 0.0), 1.0, 1e-12);
        }

    RandomStream rng2(1);
    c.params.shadow_std_db = 10.0;
    const Scenario t = build_cluster_scenario(c, rng2);
    std::vector<double> shadow;
    for (int ue = 0; ue < t.ue_count(); ++ue)
        for (int j = 0; j < t.L; ++j)
        {
            const double d = distance(t.ue_positions[static_cast<std::size_t>(ue)], t.bs_positions[static_cast<std::size_t>(j)]);
            shadow.push_back(linear_to_db(t.correlation(ue, j).beta()) - large_scale_gain_db(d / 1000.0, 0.0));
        }
    double sd = 0.0;
    for (double f : shadow)
        sd += f * f;
    sd = std::sqrt(sd / static_cast<double>(shadow.size()));
    EXPECT_GT(sd, 5.0);
    EXPECT_LT(sd, 15.0);
}

TEST(ClusterScenario, SubclusterPartitionIsExact)
{
    for (int N : {1, 2, 4, 8})
    {
        RandomStream rng(static_cast<std::uint64_t>(N));
        const Scenario s = build_cluster_scenario(small_config(8, N), rng);
        EXPECT_EQ(s.spreading.length(), N);
        for (int l = 0; l < s.L; ++l)
        {
            std::map<int, std::set<int>> codes_in;
            std::map<int, int> members;
            for (int k = 0; k < s.K; ++k)
            {
                const auto ue = static_cast<std::size_t>(s.flat(l, k));
                codes_in[s.spreading.subcluster[ue]].insert(s.spreading.code[ue]);
                ++members[s.spreading.subcluster[ue]];
            }
            EXPECT_EQ(static_cast<int>(members.size()), 8 / N);
            for (auto [sc, count] : members)
            {
                EXPECT_EQ(count, N);
                EXPECT_EQ(static_cast<int>(codes_in[sc].size()), N);
            }
        }
    }
}

TEST(ClusterScenario, SingleSubclusterWhenNEqualsK)
{
    RandomStream rng(9);
    const Scenario s = build_cluster_scenario(small_config(4, 4), rng);
    for (int l = 0; l < s.L; ++l)
    {
        std::set<int> codes;
        for (int k = 0; k < s.K; ++k)
            codes.insert(s.spreading.code[static_cast<std::size_t>(s.flat(l, k))]);
        EXPECT_EQ(codes.size(), 4u);
    }
}

TEST(ClusterScenario, TrivialCodeWhenNIsOne)
{
    RandomStream rng(2);
    const Scenario s = build_cluster_scenario(small_config(4, 1), rng);
    EXPECT_EQ(s.spreading.length(), 1);
    EXPECT_EQ(s.spreading.book.matrix()(0, 0), Complex(1.0));
}

TEST(ClusterScenario, DeterministicGivenSeed)
{
    RandomStream a(42), b(42), c(43);
    const Scenario s1 = build_cluster_scenario(small_config(8, 4, ChannelModel::three_d), a);
    const Scenario s2 = build_cluster_scenario(small_config(8, 4, ChannelModel::three_d), b);
    const Scenario s3 = build_cluster_scenario(small_config(8, 4, ChannelModel::three_d), c);
    for (std::size_t i = 0; i < s1.ue_positions.size(); ++i)
    {
        EXPECT_EQ(s1.ue_positions[i].x, s2.ue_positions[i].x);
        EXPECT_EQ(s1.ue_positions[i].y, s2.ue_positions[i].y);
    }
    EXPECT_EQ(s1.spreading.code, s2.spreading.code);
    EXPECT_EQ(s1.spreading.subcluster, s2.spreading.subcluster);
    for (std::size_t i = 0; i < s1.links->size(); ++i)
        EXPECT_EQ((*s1.links)[i].matrix(), (*s2.links)[i].matrix());
    EXPECT_NE(s1.ue_positions[0].x, s3.ue_positions[0].x);
}

TEST(ClusterScenario, ConfigErrors)
{
    RandomStream rng(0);
    EXPECT_THROW(build_cluster_scenario(small_config(6, 4), rng), ConfigError);
    ClusterScenarioConfig c = small_config(8, 2);
    c.L = 3;
    EXPECT_THROW(build_cluster_scenario(c, rng), ConfigError);
    c = small_config(8, 2, ChannelModel::three_d);
    c.M = 20;
    EXPECT_THROW(build_cluster_scenario(c, rng), DomainError);
    c = small_config(8, 2);
    c.cluster.radius_m = 0.0;
    EXPECT_THROW(build_cluster_scenario(c, rng), ConfigError);
    c = small_config(8, 2);
    c.params.tau_c = 4;
    EXPECT_THROW(build_cluster_scenario(c, rng), ConfigError);
    EXPECT_THROW(random_subcluster_spreading(1, 6, 4, rng), ConfigError);
}

TEST(PilotBook, SharedOrthogonalReuse)
{
    const PilotBook b = shared_orthogonal_pilots(4, 8);
    EXPECT_EQ(b.tau_p(), 8);
    EXPECT_EQ(b.ue_count(), 32);
    EXPECT_TRUE(b.is_orthogonal());
    for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 8; ++k)
            EXPECT_EQ(b.index_of(l * 8 + k), k);
    EXPECT_THROW(PilotBook(CMatrix::Identity(2, 2), {0}), DomainError);
    EXPECT_THROW(PilotBook(CMatrix::Ones(1, 1), {1}), DomainError);
}
