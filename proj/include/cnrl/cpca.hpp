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
#pragma once

#include "cnrl/common.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Contrastive PCA: directions with high variance in a target matrix and low
// variance in a background matrix, with the contrast parameter either fixed or
// chosen automatically by solving the trace-ratio problem.

namespace cnrl {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class StandardizeMode { separate, concatenated };

inline std::string_view to_string(StandardizeMode mode)
{
    return mode == StandardizeMode::separate ? "separate" : "concatenated";
}

inline StandardizeMode standardize_mode_from_string(std::string_view name)
{
    if (name == "separate") return StandardizeMode::separate;
    if (name == "concatenated") return StandardizeMode::concatenated;
    throw std::invalid_argument("unknown standardize mode '" + std::string(name) + "'");
}

template <typename Scalar>
struct ColumnStats
{
    VectorX<Scalar> mean;
    VectorX<Scalar> stddev;       ///< sample standard deviation, divisor n-1
    std::vector<bool> zero_variance;
};

/// Under concatenated mode target and background hold the same stats.
template <typename Scalar>
struct StandardizationParams
{
    StandardizeMode mode = StandardizeMode::separate;
    ColumnStats<Scalar> target;
    ColumnStats<Scalar> background;
};

template <typename Scalar>
struct Standardized
{
    MatrixX<Scalar> target;
    MatrixX<Scalar> background;
    StandardizationParams<Scalar> params;
};

template <typename Scalar>
ColumnStats<Scalar> column_stats(const MatrixX<Scalar>& x)
{
    if (x.rows() < 2) throw std::invalid_argument("column_stats: need at least 2 rows");
    ColumnStats<Scalar> s;
    s.mean = x.colwise().mean().transpose();
    s.stddev.resize(x.cols());
    s.zero_variance.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const Scalar ss = (x.col(j).array() - s.mean[j]).square().sum();
        s.stddev[j] = std::sqrt(ss / static_cast<Scalar>(x.rows() - 1));
        s.zero_variance[static_cast<std::size_t>(j)] = !(s.stddev[j] > Scalar(0));
    }
    return s;
}

/// Zero-variance columns map to all zeros.
template <typename Scalar>
MatrixX<Scalar> apply_standardization(const MatrixX<Scalar>& x, const ColumnStats<Scalar>& s)
{
    if (x.cols() != s.mean.size()) throw std::invalid_argument("apply_standardization: column count mismatch");
    MatrixX<Scalar> out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (s.zero_variance[static_cast<std::size_t>(j)]) {
            out.col(j).setZero();
        } else {
            out.col(j) = (x.col(j).array() - s.mean[j]) / s.stddev[j];
        }
    }
    return out;
}

template <typename Scalar>
Standardized<Scalar> standardize(const MatrixX<Scalar>& target, const MatrixX<Scalar>& background,
                                 StandardizeMode mode)
{
    if (target.cols() != background.cols()) {
        throw std::invalid_argument("standardize: target and background column counts differ");
    }
    if (target.rows() < 2 || background.rows() < 2) {
        throw std::invalid_argument("standardize: each matrix needs at least 2 rows");
    }
    Standardized<Scalar> out;
    out.params.mode = mode;
    if (mode == StandardizeMode::separate) {
        out.params.target = column_stats(target);
        out.params.background = column_stats(background);
    } else {
        MatrixX<Scalar> stacked(target.rows() + background.rows(), target.cols());
        stacked << target, background;
        out.params.target = column_stats(stacked);
        out.params.background = out.params.target;
    }
    out.target = apply_standardization(target, out.params.target);
    out.background = apply_standardization(background, out.params.background);
    return out;
}

/// Sample covariance (divisor n-1), exactly symmetric.
template <typename Scalar>
MatrixX<Scalar> sample_covariance(const MatrixX<Scalar>& x)
{
    if (x.rows() < 2) throw std::invalid_argument("sample_covariance: need at least 2 rows");
    const MatrixX<Scalar> centered = x.rowwise() - x.colwise().mean();
    MatrixX<Scalar> c = (centered.transpose() * centered) / static_cast<Scalar>(x.rows() - 1);
    return (c + c.transpose()) / Scalar(2);
}

template <typename Scalar>
struct SymEigen
{
    VectorX<Scalar> values;  ///< descending
    MatrixX<Scalar> vectors; ///< orthonormal columns
};

/**
 * Top-k eigenpairs of a symmetric matrix, largest eigenvalue first. Each vector is
 * sign-fixed so its largest-magnitude entry is positive (the first such entry on
 * ties); eigenvalues equal within 1e-12 relative order their vectors lexicographically.
 */
template <typename Scalar>
SymEigen<Scalar> sym_eigen_topk(const MatrixX<Scalar>& c, Eigen::Index k)
{
    const Eigen::Index d = c.rows();
    if (c.cols() != d) throw std::invalid_argument("sym_eigen_topk: matrix must be square");
    if (k < 1 || k > d) throw std::invalid_argument("sym_eigen_topk: k must lie in [1, d]");
    const Scalar scale = std::max(Scalar(1), c.cwiseAbs().maxCoeff());
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
        throw std::invalid_argument("sym_eigen_topk: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(c);
    if (solver.info() != Eigen::Success) throw ConvergenceError("sym_eigen_topk: eigensolver did not converge");

    MatrixX<Scalar> vecs = solver.eigenvectors();
    const VectorX<Scalar>& vals = solver.eigenvalues();
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < d; ++i) {
            if (std::abs(vecs(i, j)) > std::abs(vecs(arg, j))) arg = i;
        }
        if (vecs(arg, j) < Scalar(0)) vecs.col(j) = -vecs.col(j);
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return vals[a] > vals[b]; });
    const Scalar tie = Scalar(1e-12) * scale;
    auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
        return std::lexicographical_compare(vecs.col(a).begin(), vecs.col(a).end(), vecs.col(b).begin(),
                                            vecs.col(b).end());
    };
    for (std::size_t begin = 0; begin < order.size();) {
        std::size_t end = begin + 1;
        while (end < order.size() && vals[order[end - 1]] - vals[order[end]] <= tie) ++end;
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end),
                  lex_less);
        begin = end;
    }

    SymEigen<Scalar> out;
    out.values.resize(k);
    out.vectors.resize(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        out.values[j] = vals[order[static_cast<std::size_t>(j)]];
        out.vectors.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
    }
    return out;
}

template <typename Scalar>
struct ContrastiveResult
{
    MatrixX<Scalar> projection;   ///< d x d', columns are the contrastive PCs
    VectorX<Scalar> eigenvalues;  ///< descending
    Scalar alpha = 0;
    std::vector<Scalar> alpha_history;
    Scalar epsilon = 0;
    MatrixX<Scalar> target_embedding;
    MatrixX<Scalar> background_embedding;
    bool converged = true;
};

template <typename Scalar>
MatrixX<Scalar> project(const MatrixX<Scalar>& x, const MatrixX<Scalar>& w)
{
    if (x.cols() != w.rows()) throw std::invalid_argument("project: dimension mismatch");
    return x * w;
}

namespace detail {

template <typename Scalar>
struct ContrastProblem
{
    MatrixX<Scalar> target_cov;
    MatrixX<Scalar> background_cov; ///< already regularized by epsilon * I

    ContrastProblem(const MatrixX<Scalar>& xt, const MatrixX<Scalar>& xb, Scalar epsilon)
    {
        if (xt.cols() != xb.cols()) throw std::invalid_argument("cpca: target and background column counts differ");
        if (!(epsilon >= Scalar(0))) throw std::invalid_argument("cpca: epsilon must be nonnegative");
        target_cov = sample_covariance(xt);
        background_cov = sample_covariance(xb);
        background_cov.diagonal().array() += epsilon;
    }

    SymEigen<Scalar> solve(Scalar alpha, Eigen::Index d_prime) const
    {
        return sym_eigen_topk<Scalar>(target_cov - alpha * background_cov, d_prime);
    }

    Scalar ratio(const MatrixX<Scalar>& w) const
    {
        return (w.transpose() * target_cov * w).trace() / (w.transpose() * background_cov * w).trace();
    }
};

template <typename Scalar>
ContrastiveResult<Scalar> finish(const ContrastProblem<Scalar>& problem, const MatrixX<Scalar>& xt,
                                 const MatrixX<Scalar>& xb, Scalar alpha, Eigen::Index d_prime, Scalar epsilon)
{
    const SymEigen<Scalar> eig = problem.solve(alpha, d_prime);
    ContrastiveResult<Scalar> r;
    r.projection = eig.vectors;
    r.eigenvalues = eig.values;
    r.alpha = alpha;
    r.epsilon = epsilon;
    r.target_embedding = project(xt, r.projection);
    r.background_embedding = project(xb, r.projection);
    return r;
}

inline void check_d_prime(Eigen::Index d_prime, Eigen::Index d)
{
    if (d_prime < 1 || d_prime > d) throw std::invalid_argument("cpca: d_prime must lie in [1, d]");
}

} // namespace detail

/// cPCA at a fixed alpha: top d' eigenvectors of C_T - alpha (C_B + epsilon I).
template <typename Scalar>
ContrastiveResult<Scalar> cpca_fit(const MatrixX<Scalar>& xt, const MatrixX<Scalar>& xb, Scalar alpha,
                                   Eigen::Index d_prime, Scalar epsilon = Scalar(1e-3))
{
    if (!(alpha >= Scalar(0))) throw std::invalid_argument("cpca: alpha must be nonnegative");
    detail::check_d_prime(d_prime, xt.cols());
    const detail::ContrastProblem<Scalar> problem(xt, xb, epsilon);
    auto r = detail::finish(problem, xt, xb, alpha, d_prime, epsilon);
    r.alpha_history = {alpha};
    return r;
}

/**
 * Chooses alpha by maximizing tr(W'C_T W) / tr(W'(C_B + eps I) W) over orthonormal
 * d x d' matrices W with the Dinkelbach iteration, started from plain PCA. The
 * sequence of alphas never decreases; should rounding produce a smaller value the
 * iteration ends at the previous one. Hitting \p max_iter clears \c converged and
 * returns the last iterate.
 */
template <typename Scalar>
ContrastiveResult<Scalar> auto_alpha(const MatrixX<Scalar>& xt, const MatrixX<Scalar>& xb, Eigen::Index d_prime,
                                     Scalar epsilon = Scalar(1e-3), Scalar rel_tol = Scalar(1e-3),
                                     std::size_t max_iter = 100)
{
    detail::check_d_prime(d_prime, xt.cols());
    if (!(epsilon > Scalar(0))) throw std::invalid_argument("auto_alpha: epsilon must be positive");
    if (max_iter < 1) throw std::invalid_argument("auto_alpha: max_iter must be at least 1");
    const detail::ContrastProblem<Scalar> problem(xt, xb, epsilon);

    std::vector<Scalar> history;
    Scalar alpha = problem.ratio(problem.solve(Scalar(0), d_prime).vectors);
    history.push_back(alpha);
    bool converged = false;
    while (history.size() < max_iter) {
        const Scalar next = problem.ratio(problem.solve(alpha, d_prime).vectors);
        if (next < alpha) {
            converged = true;
            break;
        }
        history.push_back(next);
        const bool done = next - alpha <= rel_tol * std::max(Scalar(1), alpha);
        alpha = next;
        if (done) {
            converged = true;
            break;
        }
    }

    auto r = detail::finish(problem, xt, xb, alpha, d_prime, epsilon);
    r.alpha_history = std::move(history);
    r.converged = converged;
    return r;
}

} // namespace cnrl
