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
#include "cnrl/netgen.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

using namespace cnrl;

namespace {

const RelationalOperator kTotalSum{Direction::total, Summary::sum};
const RelationalOperator kTotalMean{Direction::total, Summary::mean};

Graph triangle() { return parse_edge_list("a b\nb c\nc a\n", false); }

Eigen::VectorXi bins(std::initializer_list<int> v)
{
    Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), out.data());
    return out;
}

Eigen::VectorXd values(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), out.data());
    return out;
}

BinnedFeature binned(BaseFeatureTag tag, std::size_t depth, Eigen::VectorXi b)
{
    FeatureDefinition def{{tag}, std::vector<RelationalOperator>(depth, kTotalMean)};
    return {def, std::move(b)};
}

DeepGLConfig default_config(bool directed)
{
    DeepGLConfig cfg;
    cfg.max_depth = 3;
    cfg.lambda = 0.5;
    cfg.operators = all_operators(directed);
    cfg.base_kinds = {{BaseFeatureTag::total_degree}, {BaseFeatureTag::pagerank}, {BaseFeatureTag::betweenness},
                      {BaseFeatureTag::katz}};
    return cfg;
}

// Reference: ranks by value with a simple group walk over distinct values.
Eigen::VectorXi reference_log_bin(const Eigen::VectorXd& x, double fraction)
{
    const auto n = static_cast<std::size_t>(x.size());
    std::vector<double> sorted(x.data(), x.data() + n);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, int>> value_bin;
    std::size_t pos = 0;
    int bin = 0;
    while (pos < n) {
        std::size_t take = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * (n - pos) - 1e-9)));
        std::size_t end = std::min(n, pos + take);
        const double last = sorted[end - 1];
        while (end < n && sorted[end] == last) ++end;
        for (std::size_t i = pos; i < end; ++i) value_bin.push_back({sorted[i], bin});
        pos = end;
        ++bin;
    }
    Eigen::VectorXi out(x.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [v, b] : value_bin) {
            if (v == x[static_cast<Eigen::Index>(i)]) {
                out[static_cast<Eigen::Index>(i)] = b;
                break;
            }
        }
    }
    return out;
}

} // namespace

TEST(ApplyOperator, TriangleSum)
{
    EXPECT_EQ(apply_operator(triangle(), values({1, 2, 3}), kTotalSum), values({5, 4, 3}));
}

TEST(ApplyOperator, DirectedEdge)
{
    const Graph g = parse_edge_list("a b\n", true);
    EXPECT_EQ(apply_operator(g, values({2, 4}), {Direction::in, Summary::mean}), values({0, 2}));
    EXPECT_EQ(apply_operator(g, values({2, 4}), {Direction::out, Summary::max}), values({4, 0}));
}

TEST(ApplyOperator, StarL2NormAndEmptyNeighborhood)
{
    const Graph g = parse_edge_list("c a\nc b\nc d\nc e\n# node: iso\n", false);
    const Eigen::VectorXd out = apply_operator(g, Eigen::VectorXd::Ones(6), {Direction::total, Summary::l2norm});
    EXPECT_DOUBLE_EQ(out[0], 2.0);
    EXPECT_DOUBLE_EQ(out[5], 0.0);
    for (Summary s : {Summary::mean, Summary::sum, Summary::max, Summary::l2norm}) {
        EXPECT_EQ(apply_operator(g, Eigen::VectorXd::Ones(6), {Direction::total, s})[5], 0.0);
    }
}

TEST(ApplyOperator, MaxOfNegativeValues)
{
    const Graph g = parse_edge_list("a b\na c\n", false);
    EXPECT_EQ(apply_operator(g, values({0, -3, -2}), {Direction::total, Summary::max})[0], -2.0);
}

TEST(LogBin, SpecExamples)
{
    EXPECT_EQ(log_bin(values({5, 5, 5, 5}), 0.5), bins({0, 0, 0, 0}));
    EXPECT_EQ(log_bin(values({1, 2, 3, 4}), 0.5), bins({0, 0, 1, 2}));
    EXPECT_EQ(log_bin(values({1, 1, 1, 2}), 0.5), bins({0, 0, 0, 1}));
    EXPECT_EQ(log_bin(values({4, 3, 2, 1}), 0.5), bins({2, 1, 0, 0}));
}

TEST(LogBin, ZeroFractionIsDenseRank)
{
    EXPECT_EQ(log_bin(values({3.5, -1, 3.5, 10, 2}), 0.0), bins({2, 0, 2, 3, 1}));
}

TEST(LogBin, RejectsBadInput)
{
    EXPECT_THROW(log_bin(values({1, 2}), 1.0), std::invalid_argument);
    EXPECT_THROW(log_bin(values({1, 2}), -0.1), std::invalid_argument);
    EXPECT_THROW(log_bin(values({1, std::nan("")}), 0.5), std::invalid_argument);
}

TEST(LogBin, MatchesReferenceOnRandomVectors)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> small(0, 6);
    std::uniform_int_distribution<int> len(1, 60);
    for (int trial = 0; trial < 300; ++trial) {
        Eigen::VectorXd x(len(rng));
        for (auto& v : x) v = small(rng);
        for (double f : {0.0, 0.3, 0.5, 0.9}) EXPECT_EQ(log_bin(x, f), reference_log_bin(x, f));
    }
}

TEST(LogBin, MonotoneInValue)
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x(40);
        for (auto& v : x) v = normal(rng);
        const Eigen::VectorXi b = log_bin(x, 0.5);
        for (int i = 0; i < 40; ++i) {
            for (int j = 0; j < 40; ++j) {
                if (x[i] < x[j]) EXPECT_LE(b[i], b[j]);
            }
        }
        EXPECT_EQ(b.minCoeff(), 0);
    }
}

TEST(LogBin, AbsorbsRoundingNoiseIntoTies)
{
    const double third = 1.0 / 3.0;
    EXPECT_EQ(log_bin(values({third, third + 1e-17 + 1e-16, 1.0}), 0.3), log_bin(values({third, third, 1.0}), 0.3));
}

TEST(Similarity, AgreementFraction)
{
    EXPECT_DOUBLE_EQ(feature_similarity(bins({0, 1, 2}), bins({0, 1, 2})), 1.0);
    EXPECT_DOUBLE_EQ(feature_similarity(bins({0, 0, 0}), bins({1, 1, 1})), 0.0);
    EXPECT_DOUBLE_EQ(feature_similarity(bins({0, 0, 1, 2}), bins({0, 1, 1, 2})), 0.75);
    EXPECT_THROW(feature_similarity(bins({0}), bins({0, 1})), std::invalid_argument);
    EXPECT_THROW(feature_similarity(Eigen::VectorXi(), Eigen::VectorXi()), std::invalid_argument);
}

TEST(Prune, LambdaOneKeepsDistinctCandidates)
{
    const std::vector<BinnedFeature> c = {binned(BaseFeatureTag::pagerank, 1, bins({0, 1, 2})),
                                          binned(BaseFeatureTag::katz, 1, bins({0, 0, 1})),
                                          binned(BaseFeatureTag::kcore, 1, bins({1, 0, 0}))};
    EXPECT_EQ(prune_features(c, {}, 1.0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Prune, IdenticalCandidatesKeepEarlier)
{
    const std::vector<BinnedFeature> c = {binned(BaseFeatureTag::pagerank, 1, bins({0, 1, 2, 3})),
                                          binned(BaseFeatureTag::katz, 1, bins({0, 1, 2, 3}))};
    EXPECT_EQ(prune_features(c, {}, 0.7), (std::vector<std::size_t>{0}));
}

TEST(Prune, ChainCollapsesToOneRepresentative)
{
    // A~B and B~C at 0.75, A~C only 0.5.
    const std::vector<BinnedFeature> c = {binned(BaseFeatureTag::pagerank, 1, bins({0, 0, 0, 0})),
                                          binned(BaseFeatureTag::katz, 1, bins({0, 0, 0, 1})),
                                          binned(BaseFeatureTag::kcore, 1, bins({0, 0, 1, 1}))};
    EXPECT_DOUBLE_EQ(feature_similarity(c[0].bins, c[2].bins), 0.5);
    EXPECT_EQ(prune_features(c, {}, 0.75), (std::vector<std::size_t>{0}));
}

TEST(Prune, PriorFeatureAbsorbsItsComponent)
{
    const std::vector<BinnedFeature> prior = {binned(BaseFeatureTag::pagerank, 0, bins({0, 1, 2, 3}))};
    const std::vector<BinnedFeature> c = {binned(BaseFeatureTag::pagerank, 1, bins({0, 1, 2, 2})),
                                          binned(BaseFeatureTag::katz, 1, bins({3, 3, 0, 0}))};
    EXPECT_EQ(prune_features(c, prior, 0.7), (std::vector<std::size_t>{1}));
}

TEST(Prune, LowerDepthWinsInsideComponent)
{
    const std::vector<BinnedFeature> c = {binned(BaseFeatureTag::pagerank, 2, bins({0, 1, 2})),
                                          binned(BaseFeatureTag::katz, 1, bins({0, 1, 2}))};
    EXPECT_EQ(prune_features(c, {}, 0.9), (std::vector<std::size_t>{1}));
}

TEST(Definition, RenderingIsCanonical)
{
    FeatureDefinition def{{BaseFeatureTag::pagerank}, {{Direction::in, Summary::max}, {Direction::total, Summary::mean}}};
    EXPECT_EQ(def.render(), "(Φ_mean ∘ Φ⁻_max)(pagerank)");
    EXPECT_EQ(def.relational_function(), "(Φ_mean ∘ Φ⁻_max)(x)");
    EXPECT_EQ(FeatureDefinition{{BaseFeatureTag::kcore}}.render(), "kcore");
    EXPECT_EQ(FeatureDefinition{{BaseFeatureTag::kcore}}.relational_function(), "(x)");
    EXPECT_EQ((RelationalOperator{Direction::out, Summary::l2norm}.symbol()), "Φ⁺_l2norm");
}

TEST(Definition, RenderingIsInjective)
{
    std::set<std::string> seen;
    std::size_t count = 0;
    const auto ops = all_operators(true);
    for (const auto& base : all_structural_features()) {
        std::vector<FeatureDefinition> frontier = {{base, {}}};
        for (int depth = 0; depth <= 2; ++depth) {
            std::vector<FeatureDefinition> next;
            for (const auto& f : frontier) {
                seen.insert(f.render());
                ++count;
                if (depth < 2) {
                    for (const auto& op : ops) next.push_back(f.then(op));
                }
            }
            frontier = std::move(next);
        }
    }
    EXPECT_EQ(seen.size(), count);
}

TEST(Config, Validation)
{
    DeepGLConfig cfg = default_config(false);
    EXPECT_NO_THROW(cfg.validate());
    cfg.lambda = 1.2;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = default_config(false);
    cfg.bin_fraction = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = default_config(false);
    cfg.operators.clear();
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.max_depth = 0;
    EXPECT_NO_THROW(cfg.validate());
    cfg.base_kinds.push_back(cfg.base_kinds.front());
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Learn, DepthZeroKeepsValidBaseFeatures)
{
    const Graph g = parse_edge_list("a b\nb c\nc d\nd a\na c\n", false);
    DeepGLConfig cfg = default_config(false);
    cfg.max_depth = 0;
    const auto r = learn_features(g, cfg);
    ASSERT_EQ(r.features.definitions.size(), cfg.base_kinds.size());
    for (std::size_t i = 0; i < cfg.base_kinds.size(); ++i) {
        EXPECT_EQ(r.features.definitions[i].base, cfg.base_kinds[i]);
        EXPECT_EQ(r.features.definitions[i].depth(), 0u);
    }
}

TEST(Learn, EmptyBaseSetAfterScreeningThrows)
{
    const Graph g = parse_edge_list("a b\nc d\n", false);
    DeepGLConfig cfg = default_config(false);
    cfg.base_kinds = {{BaseFeatureTag::closeness}};
    try {
        learn_features(g, cfg);
        FAIL() << "expected EmptyFeatureSetError";
    } catch (const EmptyFeatureSetError& e) {
        ASSERT_EQ(e.dropped().size(), 1u);
        EXPECT_EQ(e.dropped()[0].kind.tag, BaseFeatureTag::closeness);
    }
}

TEST(Learn, CycleCollapsesToBaseFeatures)
{
    GraphBuilder b(false);
    for (int v = 0; v < 12; ++v) b.add_edge(std::to_string(v), std::to_string((v + 1) % 12));
    const Graph g = std::move(b).build();
    const auto r = learn_features(g, default_config(false));
    EXPECT_LE(r.features.definitions.size(), 4u);
    EXPECT_EQ(r.training_matrix.values, Eigen::MatrixXd::Zero(12, static_cast<Eigen::Index>(r.features.definitions.size())));
}

TEST(Learn, UndirectedOperatorsNormalizedWithWarning)
{
    const Graph g = netgen::gilbert(40, 0.15, false, 2);
    DeepGLConfig cfg = default_config(true);
    const auto r = learn_features(g, cfg);
    EXPECT_FALSE(r.warnings.empty());
    for (const auto& def : r.features.definitions) {
        for (const auto& op : def.chain) EXPECT_EQ(op.direction, Direction::total);
    }
    DeepGLConfig total = default_config(false);
    EXPECT_EQ(learn_features(g, total).features.definitions, r.features.definitions);
}

TEST(Learn, InvariantsOnRandomGraphs)
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 6; ++trial) {
        const bool directed = trial % 2 == 1;
        const Graph g = oracle::random_graph(rng, 40, 0.1, directed, true);
        DeepGLConfig cfg = default_config(directed);
        cfg.lambda = 0.8;
        const auto r = learn_features(g, cfg);
        const auto& defs = r.features.definitions;
        const auto& m = r.training_matrix.values;
        ASSERT_EQ(static_cast<std::size_t>(m.cols()), defs.size());
        EXPECT_EQ(r.training_matrix.definitions, defs);
        EXPECT_TRUE(m.allFinite());
        EXPECT_GE(m.minCoeff(), 0.0);
        EXPECT_EQ(m, m.array().round().matrix());
        std::size_t total = 0;
        for (auto s : r.level_sizes) total += s;
        EXPECT_EQ(total, defs.size());
        std::set<std::string> names;
        for (std::size_t j = 0; j < defs.size(); ++j) {
            EXPECT_LE(defs[j].depth(), cfg.max_depth);
            EXPECT_TRUE(names.insert(defs[j].render()).second);
            if (j > 0) EXPECT_LE(defs[j - 1].depth(), defs[j].depth());
            // Every composed feature disagrees with every earlier kept feature.
            for (std::size_t i = 0; i < j; ++i) {
                if (defs[j].depth() == 0) continue;
                const Eigen::VectorXi a = m.col(static_cast<Eigen::Index>(i)).cast<int>();
                const Eigen::VectorXi b = m.col(static_cast<Eigen::Index>(j)).cast<int>();
                EXPECT_LT(feature_similarity(a, b), cfg.lambda);
            }
        }
    }
}

TEST(Learn, Deterministic)
{
    const Graph g = netgen::price(200, 3, 1);
    const DeepGLConfig cfg = default_config(true);
    const auto a = learn_features(g, cfg);
    const auto b = learn_features(g, cfg);
    EXPECT_EQ(a.features.definitions, b.features.definitions);
    EXPECT_EQ(a.training_matrix.values, b.training_matrix.values);
}

TEST(Learn, MoreFeaturesAsLambdaGrows)
{
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 4; ++trial) {
        const Graph g = oracle::random_graph(rng, 60, 0.08, false, true);
        DeepGLConfig cfg = default_config(false);
        std::size_t previous = 0;
        for (double lambda : {0.3, 0.5, 0.7, 0.9}) {
            cfg.lambda = lambda;
            const std::size_t d = learn_features(g, cfg).features.definitions.size();
            EXPECT_GE(d, previous) << "lambda " << lambda;
            previous = d;
        }
    }
}

TEST(Evaluate, TrainingGraphReproducesLearnedMatrix)
{
    const Graph g = netgen::price(150, 3, 2);
    DeepGLConfig cfg = default_config(true);
    cfg.lambda = 0.9;
    const auto r = learn_features(g, cfg);
    const auto e = evaluate_features(g, r.features);
    EXPECT_TRUE(e.failures.empty());
    EXPECT_EQ(e.matrix.definitions, r.features.definitions);
    EXPECT_EQ(e.matrix.values, r.training_matrix.values);
}

TEST(Evaluate, DepthZeroIsBinnedBaseFeature)
{
    const Graph g = triangle();
    FeatureSet fs{{{{BaseFeatureTag::total_degree}, {}}, {{BaseFeatureTag::pagerank}, {}}}, 0.5};
    const auto e = evaluate_features(g, fs);
    EXPECT_EQ(e.matrix.values.col(0), log_bin(degree(g, Direction::total), 0.5).cast<double>());
    EXPECT_EQ(e.matrix.values.col(1), log_bin(pagerank(g), 0.5).cast<double>());
}

TEST(Evaluate, ChainWithoutStoredPrefixes)
{
    const Graph g = netgen::gilbert(30, 0.2, true, 4);
    FeatureDefinition def{{BaseFeatureTag::in_degree}, {{Direction::out, Summary::sum}, {Direction::in, Summary::max}}};
    const auto e = evaluate_features(g, {{def}, 0.5});
    const Eigen::VectorXd raw = apply_operator(g, apply_operator(g, degree(g, Direction::in), def.chain[0]), def.chain[1]);
    EXPECT_EQ(e.matrix.values.col(0), log_bin(raw, 0.5).cast<double>());
}

TEST(Evaluate, MissingAttributeThrows)
{
    FeatureSet fs{{{make_attribute_feature("gender"), {}}}, 0.5};
    EXPECT_THROW(evaluate_features(triangle(), fs), std::invalid_argument);
}

TEST(Transfer, DropsColumnsFailingOnEitherGraph)
{
    const Graph t = parse_edge_list("a b\nb c\nc a\n", false);
    const Graph b = parse_edge_list("a b\nc d\n", false);
    FeatureSet fs{{{{BaseFeatureTag::total_degree}, {}}, {{BaseFeatureTag::closeness}, {}}, {{BaseFeatureTag::closeness}, {kTotalSum}}}, 0.5};
    const auto r = transfer_features(t, b, fs);
    ASSERT_EQ(r.dropped.size(), 2u);
    EXPECT_EQ(r.dropped[0].column, 1u);
    EXPECT_EQ(r.target.definitions, r.background.definitions);
    EXPECT_EQ(r.target.values.cols(), 1);
    EXPECT_EQ(r.background.values.rows(), 4);
}

TEST(Transfer, RejectsMixedDirectedness)
{
    FeatureSet fs{{{{BaseFeatureTag::total_degree}, {}}}, 0.5};
    EXPECT_THROW(transfer_features(triangle(), parse_edge_list("a b\n", true), fs), std::invalid_argument);
}

TEST(Transfer, PermutedGraphGivesPermutedMatrix)
{
    std::mt19937_64 rng(55);
    for (bool directed : {false, true}) {
        const Graph g = oracle::random_graph(rng, 50, 0.08, directed, true);
        DeepGLConfig cfg = default_config(directed);
        cfg.lambda = 0.9;
        const auto learned = learn_features(g, cfg);

        std::vector<int> perm(50);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        GraphBuilder b(directed);
        for (int v = 0; v < 50; ++v) b.add_node(std::to_string(perm[v]));
        std::vector<Edge> edges = g.edges();
        std::shuffle(edges.begin(), edges.end(), rng);
        for (const auto& e : edges) b.add_edge(std::to_string(e.source), std::to_string(e.target));
        const Graph h = std::move(b).build();

        const auto r = transfer_features(g, h, learned.features);
        ASSERT_TRUE(r.dropped.empty());
        for (int v = 0; v < 50; ++v) {
            const NodeId w = *h.find_node(std::to_string(v));
            EXPECT_EQ(r.background.values.row(w), r.target.values.row(v)) << "directed=" << directed;
        }
    }
}
