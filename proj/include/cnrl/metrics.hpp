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
#include "cnrl/cpca.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

// Quality scores for a pair of embeddings: how far the target spreads relative to
// the background, and how far apart the two point clouds are.

namespace cnrl {

template <typename Scalar>
struct MetricReport
{
    Scalar dispersion_ratio = 0;
    Scalar bhattacharyya = 0;
    Scalar kl_divergence = 0;
};

/// Mean squared row norm of the target over that of the background, after both
/// are standardized with the statistics of their concatenation.
template <typename Scalar>
Scalar dispersion_ratio(const MatrixX<Scalar>& yt, const MatrixX<Scalar>& yb)
{
    if (yt.rows() == 0 || yb.rows() == 0) throw std::invalid_argument("dispersion_ratio: empty embedding");
    if (yt.cols() != yb.cols()) throw std::invalid_argument("dispersion_ratio: column counts differ");
    const auto s = standardize(yt, yb, StandardizeMode::concatenated);
    const Scalar background = s.background.squaredNorm() / static_cast<Scalar>(yb.rows());
    if (!(background > Scalar(0))) throw std::invalid_argument("dispersion_ratio: background trace is zero");
    return (s.target.squaredNorm() / static_cast<Scalar>(yt.rows())) / background;
}

/// Bhattacharyya distance between Gaussians fitted to the two samples, with
/// covariances regularized by 1e-9 I.
template <typename Scalar>
Scalar bhattacharyya_gaussian(const MatrixX<Scalar>& yt, const MatrixX<Scalar>& yb)
{
    const Eigen::Index d = yt.cols();
    if (yb.cols() != d) throw std::invalid_argument("bhattacharyya: column counts differ");
    if (yt.rows() < d + 1 || yb.rows() < d + 1) {
        throw std::invalid_argument("bhattacharyya: each sample needs at least d + 1 rows");
    }
    MatrixX<Scalar> st = sample_covariance(yt);
    MatrixX<Scalar> sb = sample_covariance(yb);
    st.diagonal().array() += Scalar(1e-9);
    sb.diagonal().array() += Scalar(1e-9);
    const MatrixX<Scalar> s = (st + sb) / Scalar(2);
    const VectorX<Scalar> diff = (yt.colwise().mean() - yb.colwise().mean()).transpose();

    auto log_det = [](const MatrixX<Scalar>& m) {
        Eigen::LLT<MatrixX<Scalar>> llt(m);
        if (llt.info() != Eigen::Success) throw std::invalid_argument("bhattacharyya: singular covariance");
        return Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    };
    Eigen::LLT<MatrixX<Scalar>> llt(s);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("bhattacharyya: singular covariance");
    const Scalar mahalanobis = diff.dot(llt.solve(diff));
    return mahalanobis / Scalar(8) + (log_det(s) - (log_det(st) + log_det(sb)) / Scalar(2)) / Scalar(2);
}

/**
 * k-nearest-neighbor estimate of KL(target || background):
 * (d/n_T) sum_i ln(nu_k(i) / rho_k(i)) + ln(n_B / (n_T - 1)), where rho_k is the
 * distance from target row i to its k-th nearest other target row and nu_k that
 * to its k-th nearest background row. Zero distances are clamped to 1e-12.
 */
template <typename Scalar>
Scalar kl_knn(const MatrixX<Scalar>& yt, const MatrixX<Scalar>& yb, Eigen::Index k = 1)
{
    const Eigen::Index nt = yt.rows();
    const Eigen::Index nb = yb.rows();
    if (yt.cols() != yb.cols()) throw std::invalid_argument("kl_knn: column counts differ");
    if (k < 1 || k >= nt || k > nb) throw std::invalid_argument("kl_knn: k out of range");

    auto kth_distance = [k](const MatrixX<Scalar>& pts, const auto& query, Eigen::Index skip,
                            std::vector<Scalar>& buf) {
        buf.clear();
        for (Eigen::Index r = 0; r < pts.rows(); ++r) {
            if (r == skip) continue;
            buf.push_back((pts.row(r) - query).squaredNorm());
        }
        auto nth = buf.begin() + (k - 1);
        std::nth_element(buf.begin(), nth, buf.end());
        return std::max(std::sqrt(*nth), Scalar(1e-12));
    };

    std::vector<Scalar> log_ratio(static_cast<std::size_t>(nt));
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t i) {
        std::vector<Scalar> buf;
        const auto q = yt.row(static_cast<Eigen::Index>(i));
        const Scalar rho = kth_distance(yt, q, static_cast<Eigen::Index>(i), buf);
        const Scalar nu = kth_distance(yb, q, -1, buf);
        log_ratio[i] = std::log(nu / rho);
    });
    std::sort(log_ratio.begin(), log_ratio.end());
    Scalar sum = 0;
    for (Scalar v : log_ratio) sum += v;
    const Scalar d = static_cast<Scalar>(yt.cols());
    return d / static_cast<Scalar>(nt) * sum +
           std::log(static_cast<Scalar>(nb) / static_cast<Scalar>(nt - 1));
}

template <typename Scalar>
MetricReport<Scalar> contrast_metrics(const MatrixX<Scalar>& yt, const MatrixX<Scalar>& yb, Eigen::Index k = 1)
{
    return {dispersion_ratio(yt, yb), bhattacharyya_gaussian(yt, yb), kl_knn(yt, yb, k)};
}

} // namespace cnrl
