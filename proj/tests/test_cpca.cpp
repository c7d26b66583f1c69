/*
 * Copyright 2026 The cnrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "cnrl/cpca.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cnrl;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> normal;
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
}

// Feature columns with distinct scales and some correlation.
MatrixXd correlated(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    const MatrixXd mix = random_matrix(rng, cols, cols);
    return random_matrix(rng, rows, cols) * mix;
}

// Rows (+-s, 0), (0, +-t): covariance diag(2 s^2 / 3, 2 t^2 / 3).
MatrixXd diagonal_sample(double var_x, double var_y)
{
    const double s = std::sqrt(1.5 * var_x), t = std::sqrt(1.5 * var_y);
    MatrixXd m(4, 2);
    m << s, 0, -s, 0, 0, t, 0, -t;
    return m;
}

void expect_sign_convention(const MatrixXd& w)
{
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        Eigen::Index arg;
        w.col(j).cwiseAbs().maxCoeff(&arg);
        EXPECT_GT(w(arg, j), 0.0);
    }
}

void expect_orthonormal(const MatrixXd& w)
{
    const MatrixXd gram = w.transpose() * w;
    EXPECT_LE((gram - MatrixXd::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff(), 1e-10);
}

// Sign convention applied to an independently computed basis.
MatrixXd fix_signs(MatrixXd w)
{
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        Eigen::Index arg;
        w.col(j).cwiseAbs().maxCoeff(&arg);
        if (w(arg, j) < 0) w.col(j) = -w.col(j);
    }
    return w;
}

} // namespace

TEST(Standardize, UnitColumn)
{
    MatrixXd t(3, 1), b(3, 1);
    t << 1, 2, 3;
    b << 5, 5, 6;
    const auto s = standardize(t, b, StandardizeMode::separate);
    EXPECT_NEAR(s.target(0, 0), -1.0, 1e-15);
    EXPECT_NEAR(s.target(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(s.target(2, 0), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(s.params.target.stddev[0], 1.0);
}

TEST(Standardize, ZeroVarianceColumnIsZeroAndFlagged)
{
    MatrixXd t(3, 2), b(3, 2);
    t << 7, 1, 7, 2, 7, 4;
    b << 1, 1, 2, 2, 3, 3;
    const auto s = standardize(t, b, StandardizeMode::separate);
    EXPECT_TRUE(s.params.target.zero_variance[0]);
    EXPECT_FALSE(s.params.target.zero_variance[1]);
    EXPECT_EQ(s.target.col(0), VectorXd::Zero(3));
    EXPECT_TRUE(s.target.allFinite());
}

TEST(Standardize, SeparateVersusConcatenated)
{
    MatrixXd t(2, 1), b(2, 1);
    t << 0, 2;
    b << 10, 12;
    const auto sep = standardize(t, b, StandardizeMode::separate);
    EXPECT_EQ(sep.target, sep.background);
    const auto cat = standardize(t, b, StandardizeMode::concatenated);
    EXPECT_NE(cat.target, cat.background);
    EXPECT_LT(cat.target.maxCoeff(), cat.background.minCoeff());
    EXPECT_NEAR(cat.target.sum() + cat.background.sum(), 0.0, 1e-12);
}

TEST(Standardize, Errors)
{
    EXPECT_THROW(standardize<double>(MatrixXd(3, 2), MatrixXd(3, 3), StandardizeMode::separate), std::invalid_argument);
    EXPECT_THROW(standardize<double>(MatrixXd::Ones(1, 2), MatrixXd::Ones(3, 2), StandardizeMode::separate), std::invalid_argument);
}

TEST(Standardize, Float)
{
    Eigen::MatrixXf t(3, 1), b(3, 1);
    t << 1, 2, 3;
    b << 1, 2, 4;
    const auto s = standardize<float>(t, b, StandardizeMode::separate);
    EXPECT_NEAR(s.target(2, 0), 1.0f, 1e-6f);
}

TEST(SymEigen, Identity)
{
    const auto e = sym_eigen_topk<double>(MatrixXd::Identity(3, 3), 2);
    EXPECT_EQ(e.values, VectorXd::Ones(2));
    expect_orthonormal(e.vectors);
    // Ties resolve to the lexicographically smaller sign-fixed vector.
    EXPECT_EQ(e.vectors.col(0), (VectorXd(3) << 0, 0, 1).finished());
    EXPECT_EQ(e.vectors.col(1), (VectorXd(3) << 0, 1, 0).finished());
}

TEST(SymEigen, Diagonal)
{
    const auto e = sym_eigen_topk<double>((MatrixXd(2, 2) << 2, 0, 0, 1).finished(), 1);
    EXPECT_DOUBLE_EQ(e.values[0], 2.0);
    EXPECT_EQ(e.vectors.col(0), (VectorXd(2) << 1, 0).finished());
}

TEST(SymEigen, OrdersByValueNotMagnitude)
{
    const auto e = sym_eigen_topk<double>((MatrixXd(2, 2) << -5, 0, 0, 1).finished(), 2);
    EXPECT_DOUBLE_EQ(e.values[0], 1.0);
    EXPECT_DOUBLE_EQ(e.values[1], -5.0);
}

TEST(SymEigen, Errors)
{
    EXPECT_THROW(sym_eigen_topk<double>((MatrixXd(2, 2) << 1, 1e-6, 0, 1).finished(), 1), std::invalid_argument);
    EXPECT_THROW(sym_eigen_topk<double>(MatrixXd::Identity(2, 2), 3), std::invalid_argument);
    EXPECT_THROW(sym_eigen_topk<double>(MatrixXd::Identity(2, 2), 0), std::invalid_argument);
    EXPECT_THROW(sym_eigen_topk<double>(MatrixXd::Identity(2, 3), 1), std::invalid_argument);
}

TEST(SymEigen, MatchesCharacteristicPolynomialRoots)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 2 + trial % 4;
        MatrixXd a = random_matrix(rng, d, d);
        const MatrixXd c = (a + a.transpose()) / 2;
        const auto e = sym_eigen_topk<double>(c, d);
        const auto roots = oracle::characteristic_roots(c);
        ASSERT_EQ(roots.size(), static_cast<std::size_t>(d)) << "trial " << trial;
        for (int i = 0; i < d; ++i) EXPECT_NEAR(e.values[i], roots[static_cast<std::size_t>(i)], 1e-8);
        expect_orthonormal(e.vectors);
        expect_sign_convention(e.vectors);
        for (int i = 0; i < d; ++i) {
            const double residual = (c * e.vectors.col(i) - e.values[i] * e.vectors.col(i)).norm();
            EXPECT_LE(residual, 1e-8 * std::max(1.0, c.norm()));
        }
    }
}

TEST(Cpca, DiagonalHandCase)
{
    const MatrixXd xt = diagonal_sample(4, 1);
    const MatrixXd xb = diagonal_sample(1, 4);
    const auto r = cpca_fit<double>(xt, xb, 1.0, 1, 1e-3);
    EXPECT_NEAR(r.eigenvalues[0], 2.999, 1e-12);
    EXPECT_NEAR(r.projection(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(r.projection(1, 0), 0.0, 1e-15);
    EXPECT_EQ(r.alpha_history, std::vector<double>{1.0});
    EXPECT_EQ(r.target_embedding, xt * r.projection);
    EXPECT_EQ(r.background_embedding, xb * r.projection);
}

TEST(Cpca, IdenticalInputsAtAlphaOne)
{
    std::mt19937_64 rng(2);
    const MatrixXd x = correlated(rng, 50, 4);
    const auto r = cpca_fit<double>(x, x, 1.0, 3, 1e-3);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(r.eigenvalues[i], -1e-3, 1e-12);
    expect_orthonormal(r.projection);
    EXPECT_EQ(r.projection, cpca_fit<double>(x, x, 1.0, 3, 1e-3).projection);
}

TEST(Cpca, AlphaZeroIsPca)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const MatrixXd xt = correlated(rng, 80, 5);
        const MatrixXd xb = correlated(rng, 60, 5);
        const auto r = cpca_fit<double>(xt, xb, 0.0, 3);
        // Principal axes from the SVD of the centered data.
        const MatrixXd centered = xt.rowwise() - xt.colwise().mean();
        Eigen::JacobiSVD<MatrixXd> svd(centered, Eigen::ComputeThinV);
        const MatrixXd pca = fix_signs(svd.matrixV().leftCols(3));
        EXPECT_LE((r.projection - pca).cwiseAbs().maxCoeff(), 1e-9);
        const VectorXd var = svd.singularValues().head(3).array().square() / 79.0;
        EXPECT_LE((r.eigenvalues - var).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Cpca, VarianceIdentity)
{
    std::mt19937_64 rng(6);
    const MatrixXd x = correlated(rng, 40, 4);
    const MatrixXd c = sample_covariance<double>(x);
    for (int trial = 0; trial < 20; ++trial) {
        VectorXd v = random_matrix(rng, 4, 1);
        v.normalize();
        const VectorXd p = x * v;
        const double var = (p.array() - p.mean()).square().sum() / 39.0;
        EXPECT_NEAR(v.dot(c * v), var, 1e-9);
    }
}

TEST(Cpca, Errors)
{
    const MatrixXd x = MatrixXd::Random(5, 3);
    EXPECT_THROW(cpca_fit<double>(x, x, -1.0, 1), std::invalid_argument);
    EXPECT_THROW(cpca_fit<double>(x, x, 1.0, 4), std::invalid_argument);
    EXPECT_THROW(cpca_fit<double>(x, MatrixXd::Random(5, 2), 1.0, 1), std::invalid_argument);
    EXPECT_THROW(auto_alpha<double>(x, x, 0), std::invalid_argument);
}

TEST(AutoAlpha, HandExampleMatchesGridSearch)
{
    const MatrixXd xt = diagonal_sample(4, 1);
    MatrixXd xb(3, 2);
    xb << 0, 1, 0, -1, 0, 0;
    const auto r = auto_alpha<double>(xt, xb, 1);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.alpha_history.front(), 4000.0, 1e-6);
    EXPECT_NEAR(r.alpha, 4000.0, 1e-6);
    EXPECT_NEAR(r.projection(0, 0), 1.0, 1e-12);

    // Grid over unit vectors (cos t, sin t).
    const MatrixXd ct = sample_covariance<double>(xt);
    MatrixXd cb = sample_covariance<double>(xb);
    cb.diagonal().array() += 1e-3;
    double best = 0;
    for (int i = 0; i < 20000; ++i) {
        const double t = M_PI * i / 20000.0;
        const VectorXd v = (VectorXd(2) << std::cos(t), std::sin(t)).finished();
        best = std::max(best, v.dot(ct * v) / v.dot(cb * v));
    }
    EXPECT_NEAR(r.alpha, best, 1e-6 * best);
}

TEST(AutoAlpha, IdenticalInputsStayBelowOne)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const MatrixXd x = correlated(rng, 60, 4);
        const auto r = auto_alpha<double>(x, x, 2);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.alpha_history.size(), 2u);
        EXPECT_LT(r.alpha, 1.0);
        EXPECT_GT(r.alpha, 0.99);
        const auto pca = cpca_fit<double>(x, x, 0.0, 2);
        EXPECT_LE((r.projection - pca.projection).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(AutoAlpha, MonotoneAndImprovesObjective)
{
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index d = 3 + trial % 5;
        const MatrixXd xt = correlated(rng, 100, d);
        MatrixXd xb = correlated(rng, 90, d);
        if (trial % 3 == 0) xb.col(0).setConstant(1.0);
        const Eigen::Index dp = 1 + trial % 2;
        const auto r = auto_alpha<double>(xt, xb, dp);
        for (std::size_t i = 1; i < r.alpha_history.size(); ++i) {
            EXPECT_GE(r.alpha_history[i], r.alpha_history[i - 1]);
        }
        EXPECT_EQ(r.alpha, r.alpha_history.back());
        EXPECT_GE(r.alpha, r.alpha_history.front());
        EXPECT_TRUE(r.converged);
        expect_orthonormal(r.projection);
        expect_sign_convention(r.projection);

        const MatrixXd ct = sample_covariance<double>(xt);
        MatrixXd cb = sample_covariance<double>(xb);
        cb.diagonal().array() += 1e-3;
        auto ratio = [&](const MatrixXd& w) {
            return (w.transpose() * ct * w).trace() / (w.transpose() * cb * w).trace();
        };
        const MatrixXd w0 = cpca_fit<double>(xt, xb, 0.0, dp).projection;
        EXPECT_GE(ratio(r.projection), ratio(w0) * (1 - 1e-12));
        // The returned W is the eigenbasis at the returned alpha.
        const auto refit = cpca_fit<double>(xt, xb, r.alpha, dp);
        EXPECT_EQ(refit.projection, r.projection);
    }
}

TEST(AutoAlpha, MaxIterClearsConvergedFlag)
{
    std::mt19937_64 rng(17);
    const MatrixXd xt = correlated(rng, 100, 6);
    const MatrixXd xb = correlated(rng, 100, 6);
    const auto full = auto_alpha<double>(xt, xb, 2, 1e-3, 1e-14, 100);
    ASSERT_GT(full.alpha_history.size(), 1u);
    const auto r = auto_alpha<double>(xt, xb, 2, 1e-3, 1e-14, 1);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.alpha_history.size(), 1u);
    EXPECT_TRUE(r.projection.allFinite());
}

TEST(Project, Examples)
{
    const MatrixXd x = (MatrixXd(2, 2) << 1, 1, -1, -1).finished();
    const MatrixXd w = MatrixXd::Constant(2, 1, 1.0 / std::sqrt(2.0));
    const MatrixXd y = project<double>(x, w);
    EXPECT_NEAR(y(0, 0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(y(1, 0), -std::sqrt(2.0), 1e-15);
    EXPECT_EQ(project<double>(x, MatrixXd::Identity(2, 2)), x);
    EXPECT_THROW(project<double>(x, MatrixXd::Identity(3, 3)), std::invalid_argument);
}

TEST(Project, OrthonormalProjectionContracts)
{
    std::mt19937_64 rng(19);
    const MatrixXd x = random_matrix(rng, 30, 5);
    const auto e = sym_eigen_topk<double>(sample_covariance<double>(x), 2);
    const MatrixXd y = project<double>(x, e.vectors);
    for (Eigen::Index i = 0; i < 30; ++i) EXPECT_LE(y.row(i).norm(), x.row(i).norm() + 1e-12);
}

TEST(AutoAlpha, FloatInstantiation)
{
    std::mt19937_64 rng(23);
    const Eigen::MatrixXf xt = correlated(rng, 50, 3).cast<float>();
    const Eigen::MatrixXf xb = correlated(rng, 50, 3).cast<float>();
    const auto r = auto_alpha<float>(xt, xb, 1);
    EXPECT_TRUE(std::isfinite(r.alpha));
    EXPECT_NEAR(r.alpha, auto_alpha<double>(xt.cast<double>(), xb.cast<double>(), 1).alpha, 1e-2 * r.alpha);
}
