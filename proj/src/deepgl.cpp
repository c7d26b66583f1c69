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
#include "cnrl/deepgl.hpp"

#include "cnrl/common.hpp"
#include "order_free_sum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace cnrl {

namespace {

constexpr double kTieTolerance = 1e-10;

bool tied(double a, double b)
{
    if (a == b) return true;
    return std::abs(a - b) <= kTieTolerance * std::max(std::abs(a), std::abs(b));
}

class DisjointSets
{
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

std::vector<RelationalOperator> normalized_operators(const std::vector<RelationalOperator>& ops, bool directed,
                                                     std::vector<std::string>& warnings)
{
    std::vector<RelationalOperator> out;
    for (RelationalOperator op : ops) {
        if (!directed && op.direction != Direction::total) {
            warnings.push_back("operator " + op.symbol() + " normalized to total neighbors on an undirected graph");
            op.direction = Direction::total;
        }
        if (std::find(out.begin(), out.end(), op) == out.end()) out.push_back(op);
    }
    return out;
}

std::string failure_reason(const std::exception& e)
{
    return e.what();
}

} // namespace

std::string_view to_string(Summary summary)
{
    switch (summary) {
    case Summary::mean: return "mean";
    case Summary::sum: return "sum";
    case Summary::max: return "max";
    case Summary::l2norm: return "l2norm";
    }
    return "mean";
}

Summary summary_from_string(std::string_view name)
{
    if (name == "mean") return Summary::mean;
    if (name == "sum") return Summary::sum;
    if (name == "max") return Summary::max;
    if (name == "l2norm") return Summary::l2norm;
    throw std::invalid_argument("unknown summary '" + std::string(name) + "'");
}

std::string RelationalOperator::symbol() const
{
    std::string s = "Φ";
    if (direction == Direction::in) s += "⁻";
    if (direction == Direction::out) s += "⁺";
    s += "_";
    s += to_string(summary);
    return s;
}

std::vector<RelationalOperator> all_operators(bool directed)
{
    std::vector<RelationalOperator> ops;
    std::vector<Direction> dirs = directed ? std::vector<Direction>{Direction::in, Direction::out, Direction::total}
                                           : std::vector<Direction>{Direction::total};
    for (Direction d : dirs) {
        for (Summary s : {Summary::mean, Summary::sum, Summary::max, Summary::l2norm}) ops.push_back({d, s});
    }
    return ops;
}

std::string FeatureDefinition::relational_function() const
{
    if (chain.empty()) return "(x)";
    std::string s = "(";
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        if (it != chain.rbegin()) s += " ∘ ";
        s += it->symbol();
    }
    return s + ")(x)";
}

std::string FeatureDefinition::render() const
{
    if (chain.empty()) return base.name();
    std::string s = relational_function();
    s.resize(s.size() - 3);
    return s + "(" + base.name() + ")";
}

FeatureDefinition FeatureDefinition::then(const RelationalOperator& op) const
{
    FeatureDefinition next = *this;
    next.chain.push_back(op);
    return next;
}

void DeepGLConfig::validate() const
{
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("deepgl: lambda must lie in [0, 1]");
    if (!(bin_fraction >= 0.0 && bin_fraction < 1.0)) {
        throw std::invalid_argument("deepgl: bin_fraction must lie in [0, 1)");
    }
    if (max_depth > 0 && operators.empty()) {
        throw std::invalid_argument("deepgl: operators must not be empty when h > 0");
    }
    if (base_kinds.empty()) throw std::invalid_argument("deepgl: base_kinds must not be empty");
    std::set<std::string> names;
    for (const auto& kind : base_kinds) {
        kind.validate();
        if (!names.insert(kind.name()).second) {
            throw std::invalid_argument("deepgl: duplicate base feature '" + kind.name() + "'");
        }
    }
}

Eigen::VectorXd apply_operator(const Graph& g, const Eigen::VectorXd& x, const RelationalOperator& op)
{
    const std::size_t n = g.node_count();
    if (static_cast<std::size_t>(x.size()) != n) {
        throw std::invalid_argument("apply_operator: vector length does not match node count");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    std::vector<double> terms;
    for (std::size_t v = 0; v < n; ++v) {
        const auto nbrs = g.neighbors(static_cast<NodeId>(v), op.direction);
        if (nbrs.empty()) continue;
        terms.clear();
        for (const Neighbor& u : nbrs) {
            const double value = x[u.id];
            terms.push_back(op.summary == Summary::l2norm ? value * value : value);
        }
        double result = 0.0;
        switch (op.summary) {
        case Summary::sum: result = detail::order_free_sum(terms); break;
        case Summary::mean: result = detail::order_free_sum(terms) / static_cast<double>(terms.size()); break;
        case Summary::max: result = *std::max_element(terms.begin(), terms.end()); break;
        case Summary::l2norm: result = std::sqrt(detail::order_free_sum(terms)); break;
        }
        out[static_cast<Eigen::Index>(v)] = result;
    }
    return out;
}

Eigen::VectorXi log_bin(const Eigen::VectorXd& x, double fraction)
{
    if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("log_bin: fraction must lie in [0, 1)");
    if (!x.allFinite()) throw std::invalid_argument("log_bin: values must be finite");
    const auto n = static_cast<std::size_t>(x.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    Eigen::VectorXi bins(x.size());
    std::size_t pos = 0;
    int bin = 0;
    while (pos < n) {
        const std::size_t remaining = n - pos;
        auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(remaining) - 1e-9));
        take = std::clamp<std::size_t>(take, 1, remaining);
        std::size_t end = pos + take;
        while (end < n && tied(x[order[end - 1]], x[order[end]])) ++end;
        for (std::size_t i = pos; i < end; ++i) bins[order[i]] = bin;
        pos = end;
        ++bin;
    }
    return bins;
}

double feature_similarity(const Eigen::VectorXi& a, const Eigen::VectorXi& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("feature_similarity: length mismatch");
    if (a.size() == 0) throw std::invalid_argument("feature_similarity: empty vectors");
    return static_cast<double>((a.array() == b.array()).count()) / static_cast<double>(a.size());
}

std::vector<std::size_t> prune_features(std::span<const BinnedFeature> candidates,
                                        std::span<const BinnedFeature> prior, double lambda)
{
    // Indices 0..c-1 are candidates, c.. are prior features.
    const std::size_t c = candidates.size();
    const std::size_t total = c + prior.size();
    auto bins_of = [&](std::size_t i) -> const Eigen::VectorXi& {
        return i < c ? candidates[i].bins : prior[i - c].bins;
    };
    DisjointSets sets(total);
    for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < total; ++j) {
            if (j == i || (j < c && j < i)) continue;
            if (sets.find(i) == sets.find(j)) continue;
            if (feature_similarity(bins_of(i), bins_of(j)) >= lambda) sets.unite(i, j);
        }
    }

    std::map<std::size_t, bool> has_prior;
    for (std::size_t j = c; j < total; ++j) has_prior[sets.find(j)] = true;

    // Best candidate per prior-free component.
    std::map<std::size_t, std::size_t> best;
    for (std::size_t i = 0; i < c; ++i) {
        const std::size_t root = sets.find(i);
        if (has_prior.count(root)) continue;
        auto it = best.find(root);
        if (it == best.end() || candidates[i].definition.depth() < candidates[it->second].definition.depth()) {
            best[root] = i;
        }
    }
    std::vector<std::size_t> kept;
    for (const auto& [root, index] : best) kept.push_back(index);
    std::sort(kept.begin(), kept.end());
    return kept;
}

FeatureLearningResult learn_features(const Graph& g, const DeepGLConfig& config)
{
    config.validate();
    if (g.node_count() == 0) throw std::invalid_argument("learn_features: graph is empty");

    FeatureLearningResult result;
    result.features.bin_fraction = config.bin_fraction;
    const auto ops = normalized_operators(config.operators, g.directed(), result.warnings);

    BaseFeatureSelection selection = select_valid_base_features(g, config.base_kinds);
    result.dropped_base = selection.dropped;
    if (selection.kept.empty()) {
        std::string what = "no usable base feature";
        for (const auto& d : selection.dropped) what += "; " + d.kind.name() + ": " + d.reason;
        throw EmptyFeatureSetError(what, selection.dropped);
    }

    std::vector<BinnedFeature> kept;
    std::vector<Eigen::VectorXd> kept_raw;
    for (std::size_t i = 0; i < selection.kept.size(); ++i) {
        kept.push_back({FeatureDefinition{selection.kept[i], {}}, log_bin(selection.values[i], config.bin_fraction)});
        kept_raw.push_back(selection.values[i]);
    }
    result.level_sizes.push_back(kept.size());

    std::size_t level_begin = 0;
    for (std::size_t depth = 1; depth <= config.max_depth; ++depth) {
        const std::size_t level_end = kept.size();
        std::vector<BinnedFeature> candidates;
        std::vector<std::size_t> parent;
        for (std::size_t f = level_begin; f < level_end; ++f) {
            for (const auto& op : ops) {
                candidates.push_back({kept[f].definition.then(op), {}});
                parent.push_back(f);
            }
        }
        std::vector<Eigen::VectorXd> raw(candidates.size());
        std::vector<char> finite(candidates.size(), 1);
        parallel_for(candidates.size(), [&](std::size_t i) {
            raw[i] = apply_operator(g, kept_raw[parent[i]], candidates[i].definition.chain.back());
            if (!raw[i].allFinite()) {
                finite[i] = 0;
                return;
            }
            candidates[i].bins = log_bin(raw[i], config.bin_fraction);
        });

        std::vector<BinnedFeature> screened;
        std::vector<Eigen::VectorXd> screened_raw;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!finite[i]) {
                result.warnings.push_back("candidate " + candidates[i].definition.render() +
                                          " dropped: non-finite values");
                continue;
            }
            screened.push_back(std::move(candidates[i]));
            screened_raw.push_back(std::move(raw[i]));
        }

        const auto keep = prune_features(screened, kept, config.lambda);
        level_begin = kept.size();
        for (std::size_t i : keep) {
            kept.push_back(std::move(screened[i]));
            kept_raw.push_back(std::move(screened_raw[i]));
        }
        result.level_sizes.push_back(keep.size());
        if (keep.empty()) break;
    }

    const auto n = static_cast<Eigen::Index>(g.node_count());
    result.training_matrix.values.resize(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) {
        result.features.definitions.push_back(kept[j].definition);
        result.training_matrix.definitions.push_back(kept[j].definition);
        result.training_matrix.values.col(static_cast<Eigen::Index>(j)) = kept[j].bins.cast<double>();
    }
    return result;
}

FeatureEvaluation evaluate_features(const Graph& g, const FeatureSet& features)
{
    if (g.node_count() == 0) throw std::invalid_argument("evaluate_features: graph is empty");
    for (const auto& def : features.definitions) {
        if (def.base.tag == BaseFeatureTag::attribute && !g.has_attribute(def.base.attribute_name)) {
            throw std::invalid_argument("attribute '" + def.base.attribute_name + "' is missing on the graph");
        }
    }

    // Every prefix of every chain, grouped by depth, evaluated level by level.
    struct Slot
    {
        FeatureDefinition def;
        Eigen::VectorXd raw;
        std::string failure;
        std::string parent;
    };
    std::map<std::string, Slot> slots;
    std::vector<std::vector<std::string>> levels;
    for (const auto& def : features.definitions) {
        FeatureDefinition prefix{def.base, {}};
        std::string parent;
        for (std::size_t k = 0; k <= def.depth(); ++k) {
            if (k > 0) prefix = prefix.then(def.chain[k - 1]);
            std::string key = prefix.render();
            if (!slots.count(key)) {
                if (levels.size() <= k) levels.resize(k + 1);
                levels[k].push_back(key);
                slots[key] = Slot{prefix, {}, {}, parent};
            }
            parent = key;
        }
    }

    for (const auto& level : levels) {
        std::vector<Slot*> work;
        for (const auto& key : level) work.push_back(&slots.at(key));
        parallel_for(work.size(), [&](std::size_t i) {
            Slot& slot = *work[i];
            if (slot.def.depth() == 0) {
                try {
                    slot.raw = compute_base_feature(g, slot.def.base);
                } catch (const ConvergenceError& e) {
                    slot.failure = failure_reason(e);
                    return;
                }
            } else {
                const Slot& up = slots.at(slot.parent);
                if (!up.failure.empty()) {
                    slot.failure = up.failure;
                    return;
                }
                slot.raw = apply_operator(g, up.raw, slot.def.chain.back());
            }
            if (!slot.raw.allFinite()) slot.failure = "non-finite values";
        });
    }

    FeatureEvaluation eval;
    std::vector<Eigen::VectorXi> columns;
    for (std::size_t j = 0; j < features.definitions.size(); ++j) {
        const Slot& slot = slots.at(features.definitions[j].render());
        if (!slot.failure.empty()) {
            eval.failures.push_back({j, features.definitions[j].render() + ": " + slot.failure});
            continue;
        }
        eval.kept_columns.push_back(j);
        eval.matrix.definitions.push_back(features.definitions[j]);
        columns.push_back(log_bin(slot.raw, features.bin_fraction));
    }
    eval.matrix.values.resize(static_cast<Eigen::Index>(g.node_count()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        eval.matrix.values.col(static_cast<Eigen::Index>(j)) = columns[j].cast<double>();
    }
    return eval;
}

TransferResult transfer_features(const Graph& target, const Graph& background, const FeatureSet& features)
{
    if (target.directed() != background.directed()) {
        throw std::invalid_argument("target and background graphs differ in directedness");
    }
    FeatureEvaluation t = evaluate_features(target, features);
    FeatureEvaluation b = evaluate_features(background, features);

    std::map<std::size_t, std::string> failed;
    for (const auto& f : t.failures) failed[f.column] += "target " + f.reason;
    for (const auto& f : b.failures) {
        auto& reason = failed[f.column];
        if (!reason.empty()) reason += "; ";
        reason += "background " + f.reason;
    }

    auto select = [&](const FeatureEvaluation& e) {
        FeatureMatrix m;
        std::vector<Eigen::Index> cols;
        for (std::size_t k = 0; k < e.kept_columns.size(); ++k) {
            if (failed.count(e.kept_columns[k])) continue;
            m.definitions.push_back(e.matrix.definitions[k]);
            cols.push_back(static_cast<Eigen::Index>(k));
        }
        m.values = e.matrix.values(Eigen::all, cols);
        return m;
    };

    TransferResult result;
    result.target = select(t);
    result.background = select(b);
    for (const auto& [column, reason] : failed) result.dropped.push_back({column, reason});
    return result;
}

} // namespace cnrl
