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
#include "cnrl/base_features.hpp"

#include "cnrl/common.hpp"
#include "cnrl/text_util.hpp"
#include "order_free_sum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace cnrl {

namespace {

constexpr double kDefaultDamping = 0.85;
constexpr double kDefaultAttenuation = 0.01;

using Index = Eigen::Index;

Index as_index(std::size_t v) { return static_cast<Index>(v); }

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

double order_free_total(const Eigen::VectorXd& x)
{
    std::vector<double> terms(x.data(), x.data() + x.size());
    return detail::order_free_sum(terms);
}

// Hop distances from source along out-neighbors; -1 for unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, NodeId source)
{
    std::vector<int> dist(g.node_count(), -1);
    std::queue<NodeId> frontier;
    dist[static_cast<std::size_t>(source)] = 0;
    frontier.push(source);
    while (!frontier.empty()) {
        const NodeId v = frontier.front();
        frontier.pop();
        for (const Neighbor& nb : g.neighbors(v, Direction::out)) {
            auto& d = dist[static_cast<std::size_t>(nb.id)];
            if (d < 0) {
                d = dist[static_cast<std::size_t>(v)] + 1;
                frontier.push(nb.id);
            }
        }
    }
    return dist;
}

} // namespace

// ---------------------------------------------------------------------------
// BaseFeatureKind

std::string_view to_string(BaseFeatureTag tag)
{
    switch (tag) {
    case BaseFeatureTag::in_degree: return "in_degree";
    case BaseFeatureTag::out_degree: return "out_degree";
    case BaseFeatureTag::total_degree: return "total_degree";
    case BaseFeatureTag::pagerank: return "pagerank";
    case BaseFeatureTag::katz: return "katz";
    case BaseFeatureTag::eigenvector: return "eigenvector";
    case BaseFeatureTag::betweenness: return "betweenness";
    case BaseFeatureTag::closeness: return "closeness";
    case BaseFeatureTag::kcore: return "kcore";
    case BaseFeatureTag::attribute: return "attribute";
    }
    return "attribute";
}

BaseFeatureTag base_feature_tag_from_string(std::string_view name)
{
    for (int t = 0; t <= static_cast<int>(BaseFeatureTag::attribute); ++t) {
        const auto tag = static_cast<BaseFeatureTag>(t);
        if (to_string(tag) == name) return tag;
    }
    throw std::invalid_argument("unknown base feature '" + std::string(name) + "'");
}

std::string BaseFeatureKind::name() const
{
    switch (tag) {
    case BaseFeatureTag::pagerank:
        return damping == kDefaultDamping ? "pagerank" : "pagerank[d=" + detail::format_double(damping) + "]";
    case BaseFeatureTag::katz:
        return attenuation == kDefaultAttenuation ? "katz" : "katz[a=" + detail::format_double(attenuation) + "]";
    case BaseFeatureTag::attribute: return "attr[" + attribute_name + "]";
    default: return std::string(to_string(tag));
    }
}

void BaseFeatureKind::validate() const
{
    if (tag == BaseFeatureTag::pagerank && !(damping > 0.0 && damping < 1.0)) {
        throw std::invalid_argument("pagerank damping must lie in (0, 1)");
    }
    if (tag == BaseFeatureTag::katz && !(attenuation > 0.0 && std::isfinite(attenuation))) {
        throw std::invalid_argument("katz attenuation must be positive");
    }
    if (tag == BaseFeatureTag::attribute && attribute_name.empty()) {
        throw std::invalid_argument("attribute feature needs an attribute name");
    }
}

bool operator==(const BaseFeatureKind& a, const BaseFeatureKind& b)
{
    if (a.tag != b.tag) return false;
    switch (a.tag) {
    case BaseFeatureTag::pagerank: return a.damping == b.damping;
    case BaseFeatureTag::katz: return a.attenuation == b.attenuation;
    case BaseFeatureTag::attribute: return a.attribute_name == b.attribute_name;
    default: return true;
    }
}

BaseFeatureKind make_attribute_feature(std::string name)
{
    BaseFeatureKind kind;
    kind.tag = BaseFeatureTag::attribute;
    kind.attribute_name = std::move(name);
    return kind;
}

std::vector<BaseFeatureKind> all_structural_features()
{
    std::vector<BaseFeatureKind> kinds;
    for (int t = 0; t < static_cast<int>(BaseFeatureTag::attribute); ++t) {
        BaseFeatureKind kind;
        kind.tag = static_cast<BaseFeatureTag>(t);
        kinds.push_back(kind);
    }
    return kinds;
}

// ---------------------------------------------------------------------------
// Measures

Eigen::VectorXd degree(const Graph& g, Direction direction)
{
    const std::size_t n = g.node_count();
    Eigen::VectorXd result(as_index(n));
    std::vector<double> terms;
    for (std::size_t v = 0; v < n; ++v) {
        terms.clear();
        for (const Neighbor& nb : g.neighbors(static_cast<NodeId>(v), direction)) terms.push_back(nb.weight);
        result[as_index(v)] = detail::order_free_sum(terms);
    }
    return result;
}

Eigen::VectorXd pagerank(const Graph& g, double damping)
{
    const std::size_t n = g.node_count();
    const double inv_n = 1.0 / static_cast<double>(n);
    const Eigen::VectorXd out_weight = degree(g, Direction::out);

    Eigen::VectorXd rank = Eigen::VectorXd::Constant(as_index(n), inv_n);
    Eigen::VectorXd next(as_index(n));
    std::vector<double> terms;
    for (int iteration = 0; iteration < 1000; ++iteration) {
        terms.clear();
        for (std::size_t v = 0; v < n; ++v) {
            if (out_weight[as_index(v)] <= 0.0) terms.push_back(rank[as_index(v)]);
        }
        const double dangling = detail::order_free_sum(terms);
        const double teleport = (1.0 - damping) * inv_n + damping * dangling * inv_n;

        for (std::size_t v = 0; v < n; ++v) {
            terms.clear();
            for (const Neighbor& nb : g.neighbors(static_cast<NodeId>(v), Direction::in)) {
                terms.push_back(rank[nb.id] * nb.weight / out_weight[nb.id]);
            }
            next[as_index(v)] = teleport + damping * detail::order_free_sum(terms);
        }
        const double residual = order_free_total((next - rank).cwiseAbs());
        rank.swap(next);
        if (residual <= 1e-10) {
            return rank;
        }
    }
    throw ConvergenceError("pagerank did not converge within 1000 iterations");
}

SpectralRadiusBounds spectral_radius_bounds(const Graph& g)
{
    const std::size_t n = g.node_count();
    Eigen::VectorXd x = Eigen::VectorXd::Ones(as_index(n));
    Eigen::VectorXd y(as_index(n));
    SpectralRadiusBounds bounds{0.0, std::numeric_limits<double>::infinity()};
    std::vector<double> terms;
    for (int iteration = 0; iteration < 2000; ++iteration) {
        for (std::size_t v = 0; v < n; ++v) {
            terms.clear();
            for (const Neighbor& nb : g.neighbors(static_cast<NodeId>(v), Direction::in)) {
                terms.push_back(nb.weight * x[nb.id]);
            }
            y[as_index(v)] = x[as_index(v)] + detail::order_free_sum(terms);
        }
        // x > 0 throughout since (A + I) x >= x.
        const Eigen::ArrayXd ratio = y.array() / x.array();
        bounds.lower = std::max(bounds.lower, ratio.minCoeff() - 1.0);
        bounds.upper = std::min(bounds.upper, ratio.maxCoeff() - 1.0);
        if (bounds.upper - bounds.lower <= 1e-9 * std::max(1.0, bounds.upper)) {
            break;
        }
        x = y / y.maxCoeff();
    }
    return bounds;
}

Eigen::VectorXd katz(const Graph& g, double attenuation)
{
    const auto bounds = spectral_radius_bounds(g);
    if (attenuation * bounds.lower >= 1.0) {
        throw ConvergenceError("katz attenuation " + detail::format_double(attenuation) +
                               " is not below 1/spectral radius (spectral radius >= " +
                               detail::format_double(bounds.lower) + ")");
    }
    const std::size_t n = g.node_count();
    Eigen::VectorXd k = Eigen::VectorXd::Ones(as_index(n));
    Eigen::VectorXd next(as_index(n));
    std::vector<double> terms;
    for (int iteration = 0; iteration < 10000; ++iteration) {
        for (std::size_t v = 0; v < n; ++v) {
            terms.clear();
            for (const Neighbor& nb : g.neighbors(static_cast<NodeId>(v), Direction::in)) {
                terms.push_back(nb.weight * k[nb.id]);
            }
            next[as_index(v)] = 1.0 + attenuation * detail::order_free_sum(terms);
        }
        if (!next.allFinite()) break;
        const double change = max_abs_diff(next, k);
        k.swap(next);
        if (change <= 1e-10 * std::max(1.0, k.cwiseAbs().maxCoeff())) {
            return k;
        }
    }
    throw ConvergenceError("katz series diverges for attenuation " + detail::format_double(attenuation) +
                           " (spectral radius <= " + detail::format_double(bounds.upper) + ")");
}

Eigen::VectorXd eigenvector_centrality(const Graph& g)
{
    const std::size_t n = g.node_count();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(as_index(n), 1.0 / std::sqrt(static_cast<double>(n)));
    Eigen::VectorXd y(as_index(n));
    std::vector<double> terms;
    for (int iteration = 0; iteration < 10000; ++iteration) {
        for (std::size_t v = 0; v < n; ++v) {
            terms.clear();
            for (const Neighbor& nb : g.neighbors(static_cast<NodeId>(v), Direction::out)) {
                terms.push_back(nb.weight * x[nb.id]);
            }
            y[as_index(v)] = x[as_index(v)] + detail::order_free_sum(terms);
        }
        terms.assign(y.data(), y.data() + y.size());
        for (double& t : terms) t *= t;
        y /= std::sqrt(detail::order_free_sum(terms));
        const double change = max_abs_diff(x, y);
        x.swap(y);
        if (change <= 1e-13) {
            // A + I has the same eigenvectors as A; a dominant eigenvalue of 0
            // means there is no meaningful centrality to report.
            Eigen::VectorXd ax(as_index(n));
            for (std::size_t v = 0; v < n; ++v) {
                terms.clear();
                for (const Neighbor& nb : g.neighbors(static_cast<NodeId>(v), Direction::out)) {
                    terms.push_back(nb.weight * x[nb.id]);
                }
                ax[as_index(v)] = detail::order_free_sum(terms);
            }
            if (ax.norm() <= 1e-12) break;
            return x;
        }
    }
    throw ConvergenceError("eigenvector centrality did not converge (no dominant eigenvalue)");
}

Eigen::VectorXd betweenness(const Graph& g)
{
    const std::size_t n = g.node_count();
    Eigen::VectorXd score = Eigen::VectorXd::Zero(as_index(n));
    if (n <= 2) return score;

    std::vector<double> sigma(n);
    std::vector<double> delta(n);
    std::vector<int> dist(n);
    std::vector<std::vector<NodeId>> predecessors(n);
    std::vector<NodeId> order;
    order.reserve(n);

    for (std::size_t s = 0; s < n; ++s) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), -1);
        for (auto& p : predecessors) p.clear();
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        std::queue<NodeId> frontier;
        frontier.push(static_cast<NodeId>(s));
        while (!frontier.empty()) {
            const NodeId v = frontier.front();
            frontier.pop();
            order.push_back(v);
            const auto vi = static_cast<std::size_t>(v);
            for (const Neighbor& nb : g.neighbors(v, Direction::out)) {
                const auto w = static_cast<std::size_t>(nb.id);
                if (w == vi) continue;
                if (dist[w] < 0) {
                    dist[w] = dist[vi] + 1;
                    frontier.push(nb.id);
                }
                if (dist[w] == dist[vi] + 1) {
                    sigma[w] += sigma[vi];
                    predecessors[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const auto w = static_cast<std::size_t>(*it);
            for (NodeId v : predecessors[w]) {
                const auto vi = static_cast<std::size_t>(v);
                delta[vi] += sigma[vi] / sigma[w] * (1.0 + delta[w]);
            }
            if (w != s) score[as_index(w)] += delta[w];
        }
    }

    const double pairs = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    // Undirected sources visit every pair twice; that doubling cancels against
    // the (n-1)(n-2)/2 normalizer, leaving the same divisor as the directed case.
    return score / pairs;
}

Eigen::VectorXd closeness(const Graph& g)
{
    const std::size_t n = g.node_count();
    Eigen::VectorXd result(as_index(n));
    for (std::size_t v = 0; v < n; ++v) {
        const auto dist = bfs_distances(g, static_cast<NodeId>(v));
        long long total = 0;
        bool reaches_all = true;
        for (int d : dist) {
            if (d < 0) {
                reaches_all = false;
                break;
            }
            total += d;
        }
        result[as_index(v)] = (reaches_all && total > 0) ? static_cast<double>(n - 1) / static_cast<double>(total)
                                                          : std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

Eigen::VectorXd kcore(const Graph& g)
{
    const std::size_t n = g.node_count();
    // Peeling multigraph: for directed graphs a node is adjacent through both its
    // out- and in-lists, so a reciprocal pair counts twice, matching total degree.
    std::vector<std::vector<NodeId>> adjacency(n);
    for (std::size_t v = 0; v < n; ++v) {
        const auto id = static_cast<NodeId>(v);
        for (const Neighbor& nb : g.neighbors(id, Direction::out)) {
            if (nb.id != id) adjacency[v].push_back(nb.id);
        }
        if (g.directed()) {
            for (const Neighbor& nb : g.neighbors(id, Direction::in)) {
                if (nb.id != id) adjacency[v].push_back(nb.id);
            }
        }
    }

    std::vector<std::size_t> deg(n);
    std::set<std::pair<std::size_t, NodeId>> queue;
    for (std::size_t v = 0; v < n; ++v) {
        deg[v] = adjacency[v].size();
        queue.emplace(deg[v], static_cast<NodeId>(v));
    }
    std::vector<bool> removed(n, false);
    Eigen::VectorXd core(as_index(n));
    std::size_t k = 0;
    while (!queue.empty()) {
        const auto [d, v] = *queue.begin();
        queue.erase(queue.begin());
        const auto vi = static_cast<std::size_t>(v);
        removed[vi] = true;
        k = std::max(k, d);
        core[as_index(vi)] = static_cast<double>(k);
        for (NodeId u : adjacency[vi]) {
            const auto ui = static_cast<std::size_t>(u);
            if (removed[ui]) continue;
            queue.erase({deg[ui], u});
            --deg[ui];
            queue.emplace(deg[ui], u);
        }
    }
    return core;
}

Eigen::VectorXd compute_base_feature(const Graph& g, const BaseFeatureKind& kind)
{
    if (g.node_count() == 0) throw std::invalid_argument("cannot compute features of an empty graph");
    kind.validate();
    switch (kind.tag) {
    case BaseFeatureTag::in_degree: return degree(g, Direction::in);
    case BaseFeatureTag::out_degree: return degree(g, Direction::out);
    case BaseFeatureTag::total_degree: return degree(g, Direction::total);
    case BaseFeatureTag::pagerank: return pagerank(g, kind.damping);
    case BaseFeatureTag::katz: return katz(g, kind.attenuation);
    case BaseFeatureTag::eigenvector: return eigenvector_centrality(g);
    case BaseFeatureTag::betweenness: return betweenness(g);
    case BaseFeatureTag::closeness: return closeness(g);
    case BaseFeatureTag::kcore: return kcore(g);
    case BaseFeatureTag::attribute: return g.attribute(kind.attribute_name);
    }
    throw std::invalid_argument("unknown base feature");
}

BaseFeatureSelection select_valid_base_features(const Graph& g, const std::vector<BaseFeatureKind>& kinds)
{
    struct Outcome
    {
        Eigen::VectorXd values;
        std::string failure;
    };
    std::vector<Outcome> outcomes(kinds.size());
    parallel_for(kinds.size(), [&](std::size_t i) {
        try {
            outcomes[i].values = compute_base_feature(g, kinds[i]);
            if (!outcomes[i].values.allFinite()) {
                outcomes[i].failure = kinds[i].tag == BaseFeatureTag::closeness
                                          ? "non-finite values: unreachable nodes"
                                          : "non-finite values";
            }
        } catch (const std::exception& e) {
            outcomes[i].failure = e.what();
        }
    });

    BaseFeatureSelection selection;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (outcomes[i].failure.empty()) {
            selection.kept.push_back(kinds[i]);
            selection.values.push_back(std::move(outcomes[i].values));
        } else {
            selection.dropped.push_back({kinds[i], std::move(outcomes[i].failure)});
        }
    }
    return selection;
}

} // namespace cnrl
