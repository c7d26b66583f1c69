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

#include "cnrl/graph.hpp"

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace cnrl {

enum class BaseFeatureTag {
    in_degree,
    out_degree,
    total_degree,
    pagerank,
    katz,
    eigenvector,
    betweenness,
    closeness,
    kcore,
    attribute,
};

/**
 * A per-node scalar measure used as the leaf of a relational feature.
 *
 * Only the parameter relevant to the tag is meaningful: \c damping for
 * pagerank, \c attenuation for katz, \c attribute_name for attribute.
 */
struct BaseFeatureKind
{
    BaseFeatureTag tag = BaseFeatureTag::total_degree;
    double damping = 0.85;
    double attenuation = 0.01;
    std::string attribute_name;

    /// Short unique name: "pagerank", "katz", "attr[gender]", "pagerank[d=0.9]".
    std::string name() const;

    /// Throws std::invalid_argument when a parameter is out of range.
    void validate() const;

    friend bool operator==(const BaseFeatureKind& a, const BaseFeatureKind& b);
};

std::string_view to_string(BaseFeatureTag tag);
/// Accepts the tag names above ("in_degree", ..., "kcore", "attribute").
BaseFeatureTag base_feature_tag_from_string(std::string_view name);

BaseFeatureKind make_attribute_feature(std::string name);

/// The nine structural measures (everything except attributes), in tag order.
std::vector<BaseFeatureKind> all_structural_features();

// ---------------------------------------------------------------------------
// Individual measures. All return a vector of length node_count().

/// Weighted degree. The total degree of a directed graph is in + out, so a
/// reciprocal pair contributes 2 (with unit weights).
Eigen::VectorXd degree(const Graph& g, Direction direction);

/// Power iteration to an L1 residual <= 1e-10 (at most 1000 sweeps). Dangling
/// mass is spread uniformly. Sums to 1.
Eigen::VectorXd pagerank(const Graph& g, double damping = 0.85);

/// Lower and upper bounds on the spectral radius of the weighted adjacency matrix.
struct SpectralRadiusBounds
{
    double lower;
    double upper;
};

/// Collatz-Wielandt bounds from a shifted power iteration on A + I.
SpectralRadiusBounds spectral_radius_bounds(const Graph& g);

/**
 * Solves (I - a A^T) k = 1 by the Neumann series, i.e. k[v] = 1 + a * sum of
 * k over in-neighbors of v. Throws ConvergenceError when a >= 1 / rho(A).
 */
Eigen::VectorXd katz(const Graph& g, double attenuation = 0.01);

/**
 * Dominant right eigenvector of A (x[u] proportional to the sum of x over the
 * out-neighbors of u), unit L2 norm, nonnegative. Power iteration runs on A + I so
 * bipartite graphs converge. Throws ConvergenceError when the iteration stalls,
 * which happens on acyclic digraphs where the dominant eigenvalue is 0.
 */
Eigen::VectorXd eigenvector_centrality(const Graph& g);

/// Hop-count shortest-path betweenness (Brandes), normalized by (n-1)(n-2) on
/// directed graphs and (n-1)(n-2)/2 on undirected ones. All zero when n <= 2.
Eigen::VectorXd betweenness(const Graph& g);

/// (n-1) / sum of hop distances from v. NaN for every node that cannot reach
/// some other node.
Eigen::VectorXd closeness(const Graph& g);

/// Core number from peeling on total degree. Self-loops are ignored.
Eigen::VectorXd kcore(const Graph& g);

/// Dispatches on kind.tag. Throws std::invalid_argument for an empty graph, invalid
/// parameters or a missing attribute; ConvergenceError from the iterative measures.
Eigen::VectorXd compute_base_feature(const Graph& g, const BaseFeatureKind& kind);

struct DroppedFeature
{
    BaseFeatureKind kind;
    std::string reason;
};

struct BaseFeatureSelection
{
    std::vector<BaseFeatureKind> kept;
    std::vector<Eigen::VectorXd> values; ///< parallel to kept
    std::vector<DroppedFeature> dropped;
};

/**
 * Computes every kind (concurrently) and keeps those whose vector is entirely
 * finite. Failures never throw; they become entries of \c dropped with a reason.
 * The order of kept kinds follows \p kinds.
 */
BaseFeatureSelection select_valid_base_features(const Graph& g, const std::vector<BaseFeatureKind>& kinds);

} // namespace cnrl
