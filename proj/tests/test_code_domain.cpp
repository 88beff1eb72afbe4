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

#include "oracles.hpp"

#include "nomasim/code_domain.hpp"
#include "nomasim/random.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/KroneckerProduct>

using namespace nomasim;

TEST(SpreadingBook, HadamardSmallCases)
{
    const SpreadingBook one = hadamard_book(1);
    EXPECT_EQ(one.length(), 1);
    EXPECT_EQ(one.matrix()(0, 0), Complex(1.0));

    const SpreadingBook two = hadamard_book(2);
    CMatrix expected(2, 2);
    expected << 1.0, 1.0, 1.0, -1.0;
    EXPECT_EQ(two.matrix(), expected);
    EXPECT_EQ(two.sequence(0).dot(two.sequence(1)), Complex(0.0));
    EXPECT_EQ(two.sequence(1).squaredNorm(), 2.0);
}

TEST(SpreadingBook, HadamardGramIsExact)
{
    const SpreadingBook b = hadamard_book(8);
    const CMatrix gram = b.matrix().adjoint() * b.matrix();
    EXPECT_EQ(gram, 8.0 * CMatrix::Identity(8, 8));
    for (Eigen::Index i = 0; i < 64; ++i)
        EXPECT_EQ(std::abs(b.matrix()(i % 8, i / 8)), 1.0);
}

TEST(SpreadingBook, DftFallbackForOtherLengths)
{
    EXPECT_THROW(hadamard_book(6), DomainError);
    EXPECT_THROW(hadamard_book(0), DomainError);
    for (int N : {3, 5, 6, 12})
    {
        const SpreadingBook b = orthogonal_spreading_book(N);
        EXPECT_EQ(b.length(), N);
        EXPECT_EQ(b.size(), N);
        EXPECT_TRUE(b.is_orthogonal());
    }
    EXPECT_EQ(orthogonal_spreading_book(4).matrix(), hadamard_book(4).matrix());
}

TEST(SpreadingBook, RejectsWrongNorm)
{
    EXPECT_THROW(SpreadingBook(CMatrix::Identity(2, 2)), DomainError);
    EXPECT_THROW(SpreadingBook(CMatrix(0, 0)), DomainError);
}

TEST(EffectiveChannel, TrivialCodeIsIdentity)
{
    CVector u(1);
    u << 1.0;
    CVector h(3);
    h << Complex(1.0, 2.0), -3.0, Complex(0.0, 0.5);
    EXPECT_EQ(effective_channel(u, h), h);
}

TEST(EffectiveChannel, LayoutIsCodeMajor)
{
    CVector u(2);
    u << 1.0, -1.0;
    const Complex a(1.5, -2.0), b(0.25, 3.0);
    CVector h(2);
    h << a, b;
    CVector expected(4);
    expected << a, b, -a, -b;
    EXPECT_EQ(effective_channel(u, h), expected);
}

TEST(EffectiveChannel, MixedProductIdentity)
{
    std::mt19937_64 g(1);
    const SpreadingBook book = dft_book(3);
    for (int k = 0; k < 3; ++k)
    {
        const CVector h = oracle::random_gaussian(g, 5, 1);
        const CVector u = book.sequence(k);
        const CMatrix uI = Eigen::kroneckerProduct(u, CMatrix::Identity(5, 5)).eval();
        const CVector via_matrix = uI * h;
        const CVector g_vec = effective_channel(u, h);
        EXPECT_LT((via_matrix - g_vec).norm(), 1e-14);
        EXPECT_NEAR(g_vec.squaredNorm(), 3.0 * h.squaredNorm(), 1e-12);
    }
}

TEST(EffectiveChannel, SampleCovarianceMatchesKroneckerForm)
{
    std::mt19937_64 g(2);
    const CorrelationMatrix R = CorrelationMatrix::from_matrix(oracle::random_psd(g, 3, 1.0));
    const CVector u = hadamard_book(2).sequence(1);
    const CMatrix uI = Eigen::kroneckerProduct(u, CMatrix::Identity(3, 3)).eval();
    const CMatrix expected = uI * R.matrix() * uI.adjoint();

    RandomStream rng(17);
    CMatrix acc = CMatrix::Zero(6, 6);
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i)
    {
        const CVector gv = effective_channel(u, realize_channel(R, rng));
        acc.noalias() += gv * gv.adjoint();
    }
    EXPECT_LT(oracle::frob_rel(acc / draws, expected), 0.05);
}

TEST(BuildZ, PerfectCsiIsWhiteNoise)
{
    SpreadingAssignment a;
    a.book = hadamard_book(2);
    a.code = {0, 1, 1};
    a.subcluster = {0, 0, 0};
    const std::vector<double> p{1.0, 2.0, 3.0};
    const std::vector<CMatrix> C(3, CMatrix::Zero(4, 4));
    EXPECT_EQ(build_Z(a, p, C, 0.7), 0.7 * CMatrix::Identity(8, 8));
}

TEST(BuildZ, TrivialCodeIsClassicalSum)
{
    std::mt19937_64 g(3);
    const std::vector<double> p{1.0, 0.5, 2.0};
    std::vector<CMatrix> C;
    CMatrix sum = 0.1 * CMatrix::Identity(4, 4);
    for (double pk : p)
    {
        C.push_back(oracle::random_psd(g, 4, 1.0));
        sum += pk * C.back();
    }
    EXPECT_LT((build_Z(trivial_spreading(3), p, C, 0.1) - sum).norm(), 1e-13 * sum.norm());
}

TEST(BuildZ, MatchesNaiveLoop)
{
    SpreadingAssignment a;
    a.book = hadamard_book(2);
    a.code = {1, 0};
    a.subcluster = {0, 0};
    CMatrix C0 = CMatrix::Zero(2, 2), C1 = CMatrix::Zero(2, 2);
    C0.diagonal() << 0.3, 0.1;
    C1.diagonal() << 0.05, 0.7;
    const std::vector<double> p{2.0, 0.5};
    const std::vector<CMatrix> C{C0, C1};
    const CMatrix Z = build_Z(a, p, C, 0.01);
    const CMatrix ref = oracle::naive_Z(a.book.matrix(), a.code, p, C, 0.01);
    EXPECT_LT((Z - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildZ, RandomInstancesMatchNaiveLoopAndArePositive)
{
    std::mt19937_64 g(4);
    for (int trial = 0; trial < 20; ++trial)
    {
        SpreadingAssignment a;
        a.book = orthogonal_spreading_book(trial % 2 ? 3 : 4);
        const int n = 5;
        std::vector<double> p;
        std::vector<CMatrix> C;
        for (int ue = 0; ue < n; ++ue)
        {
            a.code.push_back(static_cast<int>(g() % static_cast<unsigned>(a.book.size())));
            a.subcluster.push_back(0);
            p.push_back(0.5 + 0.1 * ue);
            C.push_back(oracle::random_psd(g, 3, 1.0, 2));
        }
        const CMatrix Z = build_Z(a, p, C, 0.2);
        const CMatrix ref = oracle::naive_Z(a.book.matrix(), a.code, p, C, 0.2);
        EXPECT_LT((Z - ref).norm(), 1e-12 * ref.norm());
        EXPECT_LT(hermitian_defect(Z), 1e-15);
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(Z);
        EXPECT_GE(eig.eigenvalues().minCoeff(), 0.2 - 1e-9);
    }
}

TEST(BuildZ, CodeBasisRotationPreservesSpectrum)
{
    // Identical C for every UE: Z = (sum over codes p_c u_c u_c^H) kron C + s I,
    // which the unitary (B/sqrt(N)) kron I maps to diag(N p_c) kron C + s I.
    std::mt19937_64 g(5);
    const CMatrix C = oracle::random_psd(g, 3, 1.0);
    SpreadingAssignment a;
    a.book = hadamard_book(4);
    a.code = {0, 1, 2, 3, 2};
    a.subcluster.assign(5, 0);
    const std::vector<double> p{1.0, 2.0, 0.5, 0.25, 1.5};
    const std::vector<CMatrix> Cs(5, C);
    const CMatrix Z = build_Z(a, p, Cs, 0.3);

    const CMatrix U = Eigen::kroneckerProduct(CMatrix(a.book.matrix() / 2.0), CMatrix::Identity(3, 3)).eval();
    const CMatrix rotated = U.adjoint() * Z * U;
    std::vector<double> code_power{1.0, 2.0, 0.5 + 1.5, 0.25};
    CMatrix expected = 0.3 * CMatrix::Identity(12, 12);
    for (int c = 0; c < 4; ++c)
        expected.block(3 * c, 3 * c, 3, 3) += 4.0 * code_power[static_cast<std::size_t>(c)] * C;
    EXPECT_LT((rotated - expected).norm(), 1e-12 * expected.norm());

    Eigen::SelfAdjointEigenSolver<CMatrix> e1(Z), e2(hermitian_part(rotated));
    EXPECT_LT((e1.eigenvalues() - e2.eigenvalues()).norm(), 1e-12 * e1.eigenvalues().norm());
}

TEST(BuildZ, DimensionErrors)
{
    const std::vector<double> p{1.0, 1.0};
    const std::vector<CMatrix> C{CMatrix::Zero(2, 2), CMatrix::Zero(3, 3)};
    EXPECT_THROW(build_Z(trivial_spreading(2), p, C, 1.0), DomainError);
    const std::vector<CMatrix> one{CMatrix::Zero(2, 2)};
    EXPECT_THROW(build_Z(trivial_spreading(2), p, one, 1.0), DomainError);
}
