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
#include "nomasim/random.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <Eigen/Eigenvalues>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace nomasim
{
    // ---- Quadrature -------------------------------------------------------

    /// Gauss-Legendre rule on [-1, 1].
    struct QuadratureRule
    {
        std::vector<double> nodes;
        std::vector<double> weights;

        std::size_t size() const { return nodes.size(); }
    };

    inline QuadratureRule compute_gauss_legendre(unsigned n)
    {
        if (n == 0)
            throw DomainError("gauss_legendre: node count must be positive");
        // Boost returns the non-negative zeros in ascending order.
        const std::vector<double> half = boost::math::legendre_p_zeros<double>(static_cast<int>(n));
        QuadratureRule rule;
        rule.nodes.reserve(n);
        for (auto it = half.rbegin(); it != half.rend(); ++it)
            if (*it != 0.0)
                rule.nodes.push_back(-*it);
        for (double x : half)
            rule.nodes.push_back(x);
        rule.weights.reserve(n);
        for (double x : rule.nodes)
        {
            const double dp = boost::math::legendre_p_prime(static_cast<int>(n), x);
            rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
        }
        return rule;
    }

    /// Memoized; rules are computed once per node count per process.
    inline const QuadratureRule &gauss_legendre(unsigned n)
    {
        static std::mutex mutex;
        static std::map<unsigned, QuadratureRule> cache;
        const std::lock_guard lock(mutex);
        auto it = cache.find(n);
        if (it == cache.end())
            it = cache.emplace(n, compute_gauss_legendre(n)).first;
        return it->second;
    }

    inline constexpr unsigned default_quadrature_nodes = 200;

    // ---- Array geometry -----------------------------------------------------

    enum class ArrayKind
    {
        linear,
        planar
    };

    /// Half-wavelength spaced antenna array. Planar arrays are square, with antenna
    /// m at (row r, column c) where m = r + rows * c.
    class ArrayGeometry
    {
    public:
        static ArrayGeometry linear(int antennas)
        {
            if (antennas < 1)
                throw DomainError("ArrayGeometry: antenna count must be >= 1");
            return ArrayGeometry(ArrayKind::linear, antennas, antennas, 1);
        }

        static ArrayGeometry planar(int antennas)
        {
            if (antennas < 1)
                throw DomainError("ArrayGeometry: antenna count must be >= 1");
            const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(antennas))));
            if (side * side != antennas)
                throw DomainError("ArrayGeometry: planar array needs a perfect-square antenna count, got " +
                                  std::to_string(antennas));
            return ArrayGeometry(ArrayKind::planar, antennas, side, side);
        }

        ArrayKind kind() const { return kind_; }
        int antennas() const { return antennas_; }
        /// Vertical element count (1 for a linear array).
        int rows() const { return kind_ == ArrayKind::planar ? rows_ : 1; }
        /// Horizontal element count.
        int columns() const { return kind_ == ArrayKind::planar ? columns_ : antennas_; }

        int row_of(int m) const { return kind_ == ArrayKind::planar ? m % rows_ : 0; }
        int column_of(int m) const { return kind_ == ArrayKind::planar ? m / rows_ : m; }

    private:
        ArrayGeometry(ArrayKind kind, int antennas, int rows, int columns)
            : kind_(kind), antennas_(antennas), rows_(rows), columns_(columns) {}

        ArrayKind kind_;
        int antennas_;
        int rows_;
        int columns_;
    };

    /// Nominal arrival direction and uniform angular spread (half-width) in degrees.
    struct AngularSpec
    {
        double azimuth_deg = 0.0;
        double elevation_deg = 0.0;
        double asd_deg = 2.0;
    };

    // ---- Correlation matrix ------------------------------------------------

    /// Hermitian PSD spatial correlation matrix R with average gain beta = tr(R)/M.
    /// Construction validates the matrix, clips round-off negative eigenvalues and
    /// caches a square-root factor F with F F^H = R. Instances are immutable and
    /// cheap to copy.
    class CorrelationMatrix
    {
    public:
        static constexpr double hermitian_tolerance = 1e-12;
        static constexpr double clip_tolerance = 1e-10;
        static constexpr double trace_tolerance = 1e-9;

        /// Wraps an arbitrary matrix; beta is taken from its normalized trace.
        static CorrelationMatrix from_matrix(const CMatrix &R)
        {
            return CorrelationMatrix(R, R.trace().real() / static_cast<double>(R.rows()), false);
        }

        /// Wraps R and checks tr(R)/M against the declared beta.
        CorrelationMatrix(const CMatrix &R, double beta) : CorrelationMatrix(R, beta, true) {}

        static CorrelationMatrix uncorrelated(int antennas, double beta)
        {
            return CorrelationMatrix(beta * CMatrix::Identity(antennas, antennas), beta);
        }

        const CMatrix &matrix() const { return data_->R; }
        /// Square-root factor, F F^H = R.
        const CMatrix &factor() const { return data_->F; }
        double beta() const { return data_->beta; }
        Eigen::Index size() const { return data_->R.rows(); }
        double trace() const { return data_->R.trace().real(); }
        /// Smallest eigenvalue before clipping.
        double min_raw_eigenvalue() const { return data_->min_raw_eigenvalue; }
        /// Eigenvalues after clipping, ascending.
        const Eigen::VectorXd &eigenvalues() const { return data_->eigenvalues; }

        CorrelationMatrix scaled(double a) const
        {
            if (!(a >= 0.0))
                throw DomainError("CorrelationMatrix::scaled: factor must be non-negative");
            return CorrelationMatrix(a * data_->R, a * data_->beta);
        }

    private:
        struct Data
        {
            CMatrix R;
            CMatrix F;
            Eigen::VectorXd eigenvalues;
            double beta = 0.0;
            double min_raw_eigenvalue = 0.0;
        };

        CorrelationMatrix(const CMatrix &R, double beta, bool check_trace)
        {
            if (R.rows() != R.cols() || R.rows() == 0)
                throw DomainError("CorrelationMatrix: matrix must be square and non-empty");
            if (!R.allFinite())
                throw DomainError("CorrelationMatrix: non-finite entries");
            if (hermitian_defect(R) >= hermitian_tolerance)
                throw DomainError("CorrelationMatrix: matrix is not Hermitian");
            if (!(beta >= 0.0))
                throw DomainError("CorrelationMatrix: beta must be non-negative");

            const double M = static_cast<double>(R.rows());
            const double mean_diag = R.trace().real() / M;
            if (check_trace && std::abs(mean_diag - beta) > trace_tolerance * std::max(beta, 1e-300))
                throw DomainError("CorrelationMatrix: tr(R)/M does not match beta");

            auto d = std::make_shared<Data>();
            d->beta = beta;
            d->R = hermitian_part(R);

            Eigen::SelfAdjointEigenSolver<CMatrix> eig(d->R);
            if (eig.info() != Eigen::Success)
                throw NumericalError("CorrelationMatrix: eigendecomposition failed");
            Eigen::VectorXd lambda = eig.eigenvalues();
            d->min_raw_eigenvalue = lambda.minCoeff();
            const double floor = -clip_tolerance * std::max(mean_diag, 0.0);
            if (d->min_raw_eigenvalue < floor)
                throw DomainError("CorrelationMatrix: matrix is not positive semidefinite (min eigenvalue " +
                                  to_string_prec(d->min_raw_eigenvalue) + ")");
            bool clipped = false;
            for (Eigen::Index i = 0; i < lambda.size(); ++i)
                if (lambda(i) < 0.0)
                {
                    lambda(i) = 0.0;
                    clipped = true;
                }
            const CMatrix &V = eig.eigenvectors();
            d->F = V * lambda.cwiseSqrt().asDiagonal();
            if (clipped)
                d->R = hermitian_part(V * lambda.asDiagonal() * V.adjoint());
            d->eigenvalues = std::move(lambda);
            data_ = std::move(d);
        }

        std::shared_ptr<const Data> data_;
    };

    // ---- One-ring models ----------------------------------------------------

    /// 2D one-ring model for a half-wavelength ULA:
    /// [R]_{m1,m2} = beta/(2 Delta) * int_{-Delta}^{Delta} exp(j pi (m1-m2) sin(phi + x)) dx.
    inline CorrelationMatrix correlation_2d(const ArrayGeometry &geometry, const AngularSpec &angles, double beta,
                                            unsigned nodes = default_quadrature_nodes)
    {
        if (geometry.kind() != ArrayKind::linear)
            throw MisuseError("correlation_2d: requires a linear array");
        if (!(angles.asd_deg > 0.0))
            throw DomainError("correlation_2d: angular spread must be positive");
        if (!(beta >= 0.0))
            throw DomainError("correlation_2d: beta must be non-negative");

        const int M = geometry.antennas();
        const QuadratureRule &rule = gauss_legendre(nodes);
        const double phi = deg_to_rad(angles.azimuth_deg);
        const double spread = deg_to_rad(angles.asd_deg);

        std::vector<double> s(rule.size());
        for (std::size_t q = 0; q < rule.size(); ++q)
            s[q] = std::sin(phi + spread * rule.nodes[q]);

        // Toeplitz: one value per index difference.
        std::vector<Complex> lag(static_cast<std::size_t>(M));
        lag[0] = 1.0;
        for (int d = 1; d < M; ++d)
        {
            Complex acc = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q)
                acc += 0.5 * rule.weights[q] * std::polar(1.0, std::numbers::pi * d * s[q]);
            lag[static_cast<std::size_t>(d)] = acc;
        }

        CMatrix R(M, M);
        for (int m1 = 0; m1 < M; ++m1)
            for (int m2 = 0; m2 < M; ++m2)
            {
                const int d = m1 - m2;
                const Complex v = lag[static_cast<std::size_t>(std::abs(d))];
                R(m1, m2) = beta * (d >= 0 ? v : std::conj(v));
            }
        return CorrelationMatrix(R, beta);
    }

    /// 3D one-ring model for a half-wavelength square planar array, scatterers
    /// uniform over [phi +- Delta] x [theta +- Delta]. Row differences see the
    /// vertical phase sin(theta); column differences see cos(theta) sin(phi).
    inline CorrelationMatrix correlation_3d(const ArrayGeometry &geometry, const AngularSpec &angles, double beta,
                                            unsigned nodes = default_quadrature_nodes)
    {
        if (geometry.kind() != ArrayKind::planar)
            throw MisuseError("correlation_3d: requires a planar array");
        if (!(angles.asd_deg > 0.0))
            throw DomainError("correlation_3d: angular spread must be positive");
        if (!(beta >= 0.0))
            throw DomainError("correlation_3d: beta must be non-negative");

        const int M = geometry.antennas();
        const int rows = geometry.rows();
        const int cols = geometry.columns();
        const QuadratureRule &rule = gauss_legendre(nodes);
        const std::size_t Q = rule.size();
        const double phi = deg_to_rad(angles.azimuth_deg);
        const double theta = deg_to_rad(angles.elevation_deg);
        const double spread = deg_to_rad(angles.asd_deg);

        std::vector<double> sin_az(Q), sin_el(Q), cos_el(Q);
        for (std::size_t q = 0; q < Q; ++q)
        {
            sin_az[q] = std::sin(phi + spread * rule.nodes[q]);
            sin_el[q] = std::sin(theta + spread * rule.nodes[q]);
            cos_el[q] = std::cos(theta + spread * rule.nodes[q]);
        }

        // horizontal[t][dc] = 1/2 sum_p w_p exp(j pi dc cos(theta_t) sin(phi_p)), dc >= 0
        CMatrix horizontal = CMatrix::Zero(static_cast<Eigen::Index>(Q), cols);
        for (std::size_t t = 0; t < Q; ++t)
            for (std::size_t p = 0; p < Q; ++p)
            {
                // exp(j pi dc x) for dc = 0..cols-1 by repeated multiplication; cols is small.
                const double x = std::numbers::pi * cos_el[t] * sin_az[p];
                const double bc = std::cos(x), bs = std::sin(x);
                double zr = 0.5 * rule.weights[p], zi = 0.0;
                for (int dc = 0; dc < cols; ++dc)
                {
                    horizontal(static_cast<Eigen::Index>(t), dc) += Complex(zr, zi);
                    const double nr = zr * bc - zi * bs;
                    zi = zr * bs + zi * bc;
                    zr = nr;
                }
            }

        // table(dr + rows - 1, dc + cols - 1) holds the entry for that index difference.
        CMatrix table = CMatrix::Zero(2 * rows - 1, 2 * cols - 1);
        for (std::size_t t = 0; t < Q; ++t)
        {
            const double wt = 0.5 * rule.weights[t];
            for (int dr = -(rows - 1); dr < rows; ++dr)
            {
                const Complex vertical = wt * std::polar(1.0, std::numbers::pi * dr * sin_el[t]);
                for (int dc = -(cols - 1); dc < cols; ++dc)
                {
                    const Complex h = horizontal(static_cast<Eigen::Index>(t), std::abs(dc));
                    table(dr + rows - 1, dc + cols - 1) += vertical * (dc >= 0 ? h : std::conj(h));
                }
            }
        }

        CMatrix R(M, M);
        for (int m1 = 0; m1 < M; ++m1)
            for (int m2 = 0; m2 < M; ++m2)
            {
                const int dr = geometry.row_of(m1) - geometry.row_of(m2);
                const int dc = geometry.column_of(m1) - geometry.column_of(m2);
                R(m1, m2) = beta * table(dr + rows - 1, dc + cols - 1);
            }
        R.diagonal().setConstant(beta);
        // Entries for (d) and (-d) are conjugates analytically; enforce it bitwise.
        return CorrelationMatrix(hermitian_part(R), beta);
    }

    /// Dispatches on the array kind.
    inline CorrelationMatrix one_ring_correlation(const ArrayGeometry &geometry, const AngularSpec &angles,
                                                  double beta, unsigned nodes = default_quadrature_nodes)
    {
        return geometry.kind() == ArrayKind::linear ? correlation_2d(geometry, angles, beta, nodes)
                                                    : correlation_3d(geometry, angles, beta, nodes);
    }

    // ---- Fading and diagnostics -------------------------------------------

    /// h = F z with z ~ CN(0, I).
    inline CVector realize_channel(const CorrelationMatrix &R, RandomStream &rng)
    {
        const CVector z = rng.complex_normal_vector(R.size());
        return R.factor() * z;
    }

    /// tr(R1 R2) / (tr(R1) tr(R2)): variance of the normalized inner product of two
    /// independent channels. Equals 1/M for uncorrelated fading.
    inline double favorable_propagation_variance(const CorrelationMatrix &R1, const CorrelationMatrix &R2)
    {
        if (R1.size() != R2.size())
            throw DomainError("favorable_propagation_variance: dimension mismatch");
        // The ratio is scale invariant; normalizing by the largest diagonal entry keeps
        // beta I exact, so uncorrelated fading yields exactly 1/M.
        const double s1 = R1.matrix().diagonal().real().maxCoeff();
        const double s2 = R2.matrix().diagonal().real().maxCoeff();
        if (!(s1 > 0.0) || !(s2 > 0.0))
            throw DomainError("favorable_propagation_variance: zero trace");
        const CMatrix A = R1.matrix() / s1;
        const CMatrix B = R2.matrix() / s2;
        const double t1 = A.trace().real();
        const double t2 = B.trace().real();
        // tr(AB) = sum_ij A_ij B_ji; B Hermitian so B_ji = conj(B_ij).
        const double cross = (A.array() * B.conjugate().array()).sum().real();
        return cross / (t1 * t2);
    }
} // namespace nomasim
