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

#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace nomasim
{
    /// One row of a result table.
    struct ResultRow
    {
        std::string experiment;
        std::string model;
        std::string scheme;
        std::string combiner;
        int M = 0;
        int N = 0;
        int K = 0;
        int L = 0;
        std::string sweep_var;
        double sweep_value = 0.0;
        double sum_se_mean = 0.0;
        double sum_se_stderr = 0.0;
        std::uint64_t trials = 0;
        std::uint64_t seed = 0;

        friend bool operator==(const ResultRow &, const ResultRow &) = default;
    };

    inline constexpr const char *csv_header =
        "experiment,model,scheme,combiner,M,N,K,L,sweep_var,sweep_value,sum_se_mean,sum_se_stderr,trials,seed";

    inline std::string format_csv_row(const ResultRow &r)
    {
        std::ostringstream os;
        os << r.experiment << ',' << r.model << ',' << r.scheme << ',' << r.combiner << ',' << r.M << ',' << r.N
           << ',' << r.K << ',' << r.L << ',' << r.sweep_var << ',' << to_string_prec(r.sweep_value) << ','
           << to_string_prec(r.sum_se_mean) << ',' << to_string_prec(r.sum_se_stderr) << ',' << r.trials << ','
           << r.seed;
        return os.str();
    }

    /// Writes header plus one line per row. Refuses an empty table without touching
    /// the filesystem.
    inline void write_csv(const std::vector<ResultRow> &rows, const std::filesystem::path &path)
    {
        if (rows.empty())
            throw std::invalid_argument("write_csv: no records to write to " + path.string());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("write_csv: cannot open " + path.string() + " for writing");
        out << csv_header << '\n';
        for (const auto &r : rows)
            out << format_csv_row(r) << '\n';
        out.flush();
        if (!out)
            throw std::runtime_error("write_csv: write failed for " + path.string());
    }

    namespace detail
    {
        inline std::vector<std::string> split_csv_line(const std::string &line)
        {
            std::vector<std::string> cells;
            std::string cell;
            std::istringstream is(line);
            while (std::getline(is, cell, ','))
                cells.push_back(cell);
            if (!line.empty() && line.back() == ',')
                cells.emplace_back();
            return cells;
        }

        inline double parse_double(const std::string &s, const std::string &ctx)
        {
            errno = 0;
            char *end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
                throw std::runtime_error(ctx + ": not a number '" + s + "'");
            return v;
        }

        inline long long parse_int(const std::string &s, const std::string &ctx)
        {
            errno = 0;
            char *end = nullptr;
            const long long v = std::strtoll(s.c_str(), &end, 10);
            if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
                throw std::runtime_error(ctx + ": not an integer '" + s + "'");
            return v;
        }

        inline std::uint64_t parse_uint(const std::string &s, const std::string &ctx)
        {
            errno = 0;
            char *end = nullptr;
            const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
            if (s.empty() || s.front() == '-' || end != s.c_str() + s.size() || errno == ERANGE)
                throw std::runtime_error(ctx + ": not an unsigned integer '" + s + "'");
            return v;
        }
    } // namespace detail

    inline std::vector<ResultRow> read_csv(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("read_csv: cannot open " + path.string());
        std::string line;
        if (!std::getline(in, line) || line != csv_header)
            throw std::runtime_error("read_csv: " + path.string() + " does not start with the expected header");
        std::vector<ResultRow> rows;
        int lineno = 1;
        while (std::getline(in, line))
        {
            ++lineno;
            if (line.empty())
                continue;
            const std::string ctx = path.string() + ":" + std::to_string(lineno);
            const auto c = detail::split_csv_line(line);
            if (c.size() != 14)
                throw std::runtime_error(ctx + ": expected 14 columns, found " + std::to_string(c.size()));
            ResultRow r;
            r.experiment = c[0];
            r.model = c[1];
            r.scheme = c[2];
            r.combiner = c[3];
            r.M = static_cast<int>(detail::parse_int(c[4], ctx));
            r.N = static_cast<int>(detail::parse_int(c[5], ctx));
            r.K = static_cast<int>(detail::parse_int(c[6], ctx));
            r.L = static_cast<int>(detail::parse_int(c[7], ctx));
            r.sweep_var = c[8];
            r.sweep_value = detail::parse_double(c[9], ctx);
            r.sum_se_mean = detail::parse_double(c[10], ctx);
            r.sum_se_stderr = detail::parse_double(c[11], ctx);
            r.trials = detail::parse_uint(c[12], ctx);
            r.seed = detail::parse_uint(c[13], ctx);
            rows.push_back(std::move(r));
        }
        return rows;
    }
} // namespace nomasim
