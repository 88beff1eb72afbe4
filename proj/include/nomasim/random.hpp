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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace nomasim
{
    /// Seeded random stream. Streams are derived from a root seed plus a path of
    /// integer keys (drop index, trial index, ...), so a given trial draws the same
    /// numbers no matter which worker executes it.
    class RandomStream
    {
    public:
        explicit RandomStream(std::uint64_t seed) : RandomStream(seed, {}) {}

        RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
        {
            std::vector<std::uint32_t> words;
            words.reserve(2 * (path.size() + 1));
            auto push = [&](std::uint64_t v)
            {
                words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
                words.push_back(static_cast<std::uint32_t>(v >> 32));
            };
            push(seed);
            for (auto p : path)
                push(p);
            std::seed_seq seq(words.begin(), words.end());
            engine_.seed(seq);
        }

        double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

        double normal(double mean = 0.0, double stddev = 1.0)
        {
            return std::normal_distribution<double>(mean, stddev)(engine_);
        }

        /// Circularly-symmetric CN(0, variance).
        Complex complex_normal(double variance = 1.0)
        {
            const double s = std::sqrt(0.5 * variance);
            const double re = unit_normal_(engine_);
            const double im = unit_normal_(engine_);
            return {s * re, s * im};
        }

        CVector complex_normal_vector(Eigen::Index n, double variance = 1.0)
        {
            CVector z(n);
            for (Eigen::Index i = 0; i < n; ++i)
                z(i) = complex_normal(variance);
            return z;
        }

        CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0)
        {
            CMatrix z(rows, cols);
            for (Eigen::Index c = 0; c < cols; ++c)
                for (Eigen::Index r = 0; r < rows; ++r)
                    z(r, c) = complex_normal(variance);
            return z;
        }

        /// Uniform integer in [0, n).
        std::size_t index(std::size_t n)
        {
            return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
        }

        /// Fisher-Yates permutation of 0..n-1.
        std::vector<int> permutation(int n)
        {
            std::vector<int> p(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                p[static_cast<std::size_t>(i)] = i;
            for (int i = n - 1; i > 0; --i)
            {
                const auto j = index(static_cast<std::size_t>(i) + 1);
                std::swap(p[static_cast<std::size_t>(i)], p[j]);
            }
            return p;
        }

        std::mt19937_64 &engine() { return engine_; }

    private:
        std::mt19937_64 engine_;
        std::normal_distribution<double> unit_normal_{0.0, 1.0};
    };
} // namespace nomasim
