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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nomasim
{
    using Complex = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;

    /// Physical parameter outside its admissible range (negative distance, non-square array, ...).
    class DomainError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    /// Operation called with arguments it was not designed for (wrong geometry kind, non-orthogonal book on a fast path).
    class MisuseError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// Inconsistent experiment or scenario configuration.
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// A linear solve or factorization that should not fail did.
    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
    inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

    /// dBm to watts.
    inline double dbm_to_watt(double dbm) { return db_to_linear(dbm - 30.0); }

    /// ||A - A^H||_F / ||A||_F, zero for the zero matrix.
    inline double hermitian_defect(const CMatrix &A)
    {
        const double n = A.norm();
        if (n == 0.0)
            return 0.0;
        return (A - A.adjoint()).norm() / n;
    }

    inline CMatrix hermitian_part(const CMatrix &A)
    {
        return 0.5 * (A + A.adjoint());
    }

    inline std::string to_string_prec(double x, int digits = 9)
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
        return buf;
    }
} // namespace nomasim
