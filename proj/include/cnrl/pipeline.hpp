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

#include "cnrl/cpca.hpp"
#include "cnrl/deepgl.hpp"
#include "cnrl/graph.hpp"
#include "cnrl/metrics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// End-to-end contrastive network representation learning: learn features on the
// target, transfer them to the background, contrast with cPCA, and serialize.

namespace cnrl {

/// A well-formed input whose content is semantically invalid (bad parameter
/// values, nothing left to embed, mismatched inputs).
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct CpcaConfig
{
    Eigen::Index d_prime = 2;
    std::optional<double> alpha; ///< empty selects alpha automatically
    double epsilon = 1e-3;
    StandardizeMode mode = StandardizeMode::separate;
    double rel_tol = 1e-3;
    std::size_t max_iter = 100;
};

struct PipelineConfig
{
    DeepGLConfig deepgl;
    bool use_all_operators = false; ///< operators resolved from the graph's directedness
    CpcaConfig cpca;
    std::map<std::string, double> attribute_encoding;
    std::uint64_t seed = 0;
    std::string output_dir = ".";

    DeepGLConfig resolve_deepgl(bool directed) const;
};

/**
 * Reads a JSON config:
 *
 *     {"deepgl": {"h": 3, "lambda": 0.7, "bin_fraction": 0.5,
 *                 "operators": "all" | [{"direction": "total", "summary": "mean"}, ...],
 *                 "base_features": ["pagerank", {"kind": "katz", "attenuation": 0.01}, ...]},
 *      "cpca": {"d_prime": 2, "alpha": "auto" | 72.0, "epsilon": 1e-3,
 *               "standardize_mode": "separate", "rel_tol": 1e-3, "max_iter": 100},
 *      "attribute_encoding": {"male": 0, "female": 1},
 *      "seed": 0, "output_dir": "out"}
 *
 * Missing keys take the defaults above (base_features defaults to every
 * structural measure). Throws ParseError for malformed JSON and ConfigError for
 * unknown keys or invalid values.
 */
PipelineConfig parse_pipeline_config(std::string_view json_text);

/// JSON array of {"base", "params", "chain": [{"direction", "summary"}]} plus
/// the bin fraction, wrapped as {"bin_fraction": f, "features": [...]}.
std::string feature_set_to_json(const FeatureSet& features);
FeatureSet feature_set_from_json(std::string_view json_text);

/// Header `node,<canonical definition>...`, one row per node in id order.
std::string feature_matrix_csv(const Graph& g, const FeatureMatrix& matrix);

struct EmbedResult
{
    DeepGLConfig deepgl;
    CpcaConfig cpca;
    FeatureLearningResult learning;
    TransferResult transfer;
    StandardizationParams<double> standardization;
    ContrastiveResult<double> contrast;
    std::vector<std::string> warnings;
    std::uint64_t seed = 0;
};

/// Throws ConfigError on mismatched directedness or an empty feature set, and
/// EmptyFeatureSetError when screening leaves no base feature.
EmbedResult run_embed(const Graph& target, const Graph& background, const PipelineConfig& config);

/// `feature,relational_function,base_feature,cpc1..cpcK`; feature ids are F1..Fd.
std::string loadings_csv(const EmbedResult& result);

/// `node,network,cpc1..cpcK`, target rows (network T) then background rows (B).
std::string embedding_csv(const Graph& target, const Graph& background, const EmbedResult& result);

/// Run summary. \p wall_seconds is only written when given, so repeated runs stay
/// byte-identical by default.
std::string report_json(const EmbedResult& result, std::optional<double> wall_seconds = std::nullopt);

struct EmbeddingTable
{
    std::vector<std::string> nodes;
    std::vector<bool> is_target;
    std::vector<std::string> columns; ///< embedding column names (cpc1, ...)
    Eigen::MatrixXd values;

    Eigen::MatrixXd target() const;
    Eigen::MatrixXd background() const;
};

/// Throws ParseError on a malformed header or row.
EmbeddingTable parse_embedding_csv(std::string_view text);

std::string metrics_json(const MetricReport<double>& report);

/// A numeric table with a `node` first column, as written by feature_matrix_csv.
struct NodeTable
{
    std::vector<std::string> columns;
    std::vector<std::string> nodes;
    Eigen::MatrixXd values;

    /// By exact header name or by 1-based position "F<k>". Throws ConfigError.
    Eigen::Index column_index(std::string_view name) const;
};

NodeTable parse_node_table_csv(std::string_view text);

} // namespace cnrl
