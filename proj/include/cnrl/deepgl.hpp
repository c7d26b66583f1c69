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

#include "cnrl/base_features.hpp"
#include "cnrl/graph.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Relational feature learning: base features composed with neighborhood
// summaries, rank-binned, pruned by agreement, and transferable to any graph.

namespace cnrl {

enum class Summary { mean, sum, max, l2norm };

std::string_view to_string(Summary summary);
Summary summary_from_string(std::string_view name);

/// Summarizes a feature over the in-, out- or total-neighbors of each node.
struct RelationalOperator
{
    Direction direction = Direction::total;
    Summary summary = Summary::mean;

    /// "Φ_mean" (total), "Φ⁻_max" (in), "Φ⁺_sum" (out).
    std::string symbol() const;

    friend bool operator==(const RelationalOperator&, const RelationalOperator&) = default;
};

/// Every (direction, summary) pair: 12 operators for directed graphs, the 4
/// total-neighbor ones for undirected graphs.
std::vector<RelationalOperator> all_operators(bool directed);

/**
 * A base feature followed by a chain of relational operators.
 *
 * \c chain is in application order: chain.front() acts on the base feature
 * first. The rendered form reads the usual composition way round, so a chain
 * {Φ⁻_max, Φ_mean} renders as "(Φ_mean ∘ Φ⁻_max)(pagerank)".
 */
struct FeatureDefinition
{
    BaseFeatureKind base;
    std::vector<RelationalOperator> chain;

    std::size_t depth() const { return chain.size(); }

    /// Canonical, injective name. Depth 0 renders as the bare base name.
    std::string render() const;

    /// Just the relational function: "(x)" or "(Φ_mean ∘ Φ⁻_max)(x)".
    std::string relational_function() const;

    FeatureDefinition then(const RelationalOperator& op) const;

    friend bool operator==(const FeatureDefinition&, const FeatureDefinition&) = default;
};

struct DeepGLConfig
{
    std::size_t max_depth = 3;  ///< h
    double lambda = 0.5;        ///< pruning threshold on bin agreement
    double bin_fraction = 0.5;  ///< log-binning transformation parameter
    std::vector<RelationalOperator> operators;
    std::vector<BaseFeatureKind> base_kinds;

    void validate() const;
};

/// Evaluated feature columns (bin indices stored as reals) and their definitions.
struct FeatureMatrix
{
    std::vector<FeatureDefinition> definitions;
    Eigen::MatrixXd values; ///< nodes x definitions.size()

    std::size_t dimension() const { return definitions.size(); }
};

/// The learned, transferable part of a feature learning run.
struct FeatureSet
{
    std::vector<FeatureDefinition> definitions;
    double bin_fraction = 0.5;
};

/// Thrown when no base feature survives screening.
class EmptyFeatureSetError : public std::runtime_error
{
public:
    EmptyFeatureSetError(const std::string& what, std::vector<DroppedFeature> dropped)
        : std::runtime_error(what), dropped_(std::move(dropped))
    {
    }
    const std::vector<DroppedFeature>& dropped() const noexcept { return dropped_; }

private:
    std::vector<DroppedFeature> dropped_;
};

struct FeatureLearningResult
{
    FeatureSet features;
    FeatureMatrix training_matrix;
    std::vector<DroppedFeature> dropped_base;
    std::vector<std::size_t> level_sizes; ///< |F_0|, |F_1|, ...
    std::vector<std::string> warnings;
};

/// out[v] = summary of x over neighbors(v, direction); 0 for an empty neighborhood.
Eigen::VectorXd apply_operator(const Graph& g, const Eigen::VectorXd& x, const RelationalOperator& op);

/**
 * Logarithmic binning by rank. Walking the values in ascending order, bin b takes
 * the next max(1, ceil(fraction * remaining)) nodes and then every further node
 * tied with the last one taken. Values within a relative 1e-10 of each other
 * count as tied so that summation-order noise never splits a tie group.
 */
Eigen::VectorXi log_bin(const Eigen::VectorXd& x, double fraction);

/// Fraction of positions where the two bin vectors agree. Vectors must have the
/// same, nonzero length.
double feature_similarity(const Eigen::VectorXi& a, const Eigen::VectorXi& b);

struct BinnedFeature
{
    FeatureDefinition definition;
    Eigen::VectorXi bins;
};

/**
 * Similarity-graph pruning. Features are linked when their agreement is >= lambda;
 * per connected component of candidates and prior, every prior feature stays and
 * at most one candidate does: none when the component holds a prior feature,
 * otherwise the one of lowest depth, earliest in \p candidates.
 *
 * Returns the indices of the kept candidates in increasing order.
 */
std::vector<std::size_t> prune_features(std::span<const BinnedFeature> candidates,
                                        std::span<const BinnedFeature> prior, double lambda);

/// Learns F_0 .. F_h on \p g. Throws EmptyFeatureSetError when no base feature
/// is usable.
FeatureLearningResult learn_features(const Graph& g, const DeepGLConfig& config);

struct ColumnFailure
{
    std::size_t column;
    std::string reason;
};

struct FeatureEvaluation
{
    FeatureMatrix matrix;                 ///< only the columns that evaluated cleanly
    std::vector<std::size_t> kept_columns; ///< indices into the FeatureSet
    std::vector<ColumnFailure> failures;
};

/**
 * Evaluates every definition on \p g and log-bins it. Columns whose raw values are
 * non-finite or whose base feature fails to compute are reported and left out.
 * Throws std::invalid_argument when an attribute base feature is missing on \p g.
 */
FeatureEvaluation evaluate_features(const Graph& g, const FeatureSet& features);

struct TransferResult
{
    FeatureMatrix target;
    FeatureMatrix background;
    std::vector<ColumnFailure> dropped; ///< columns removed from both matrices
};

/// Evaluates one FeatureSet on both graphs; a column failing on either graph is
/// dropped from both so the matrices keep identical definitions.
TransferResult transfer_features(const Graph& target, const Graph& background, const FeatureSet& features);

} // namespace cnrl
