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
#include "cnrl/pipeline.hpp"

#include "cnrl/common.hpp"
#include "cnrl/text_util.hpp"

#include <json.hpp>

#include <set>
#include <sstream>

namespace cnrl {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, const char* what)
{
    try {
        return json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": malformed JSON: " + e.what());
    }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("invalid value for '" + key + "' in " + where);
    }
}

BaseFeatureKind base_kind_from_json(const json& j)
{
    BaseFeatureKind kind;
    try {
        if (j.is_string()) {
            kind.tag = base_feature_tag_from_string(j.get<std::string>());
            if (kind.tag == BaseFeatureTag::attribute) {
                throw ConfigError("attribute base features need an object with a \"name\"");
            }
            return kind;
        }
        reject_unknown_keys(j, {"kind", "damping", "attenuation", "name"}, "base feature");
        kind.tag = base_feature_tag_from_string(get_as<std::string>(j, "kind", "base feature"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("damping")) kind.damping = get_as<double>(j, "damping", "base feature");
    if (j.contains("attenuation")) kind.attenuation = get_as<double>(j, "attenuation", "base feature");
    if (j.contains("name")) kind.attribute_name = get_as<std::string>(j, "name", "base feature");
    try {
        kind.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return kind;
}

json base_params_to_json(const BaseFeatureKind& kind)
{
    json params = json::object();
    if (kind.tag == BaseFeatureTag::pagerank) params["damping"] = kind.damping;
    if (kind.tag == BaseFeatureTag::katz) params["attenuation"] = kind.attenuation;
    if (kind.tag == BaseFeatureTag::attribute) params["name"] = kind.attribute_name;
    return params;
}

RelationalOperator operator_from_json(const json& j)
{
    reject_unknown_keys(j, {"direction", "summary"}, "operator");
    try {
        return {direction_from_string(get_as<std::string>(j, "direction", "operator")),
                summary_from_string(get_as<std::string>(j, "summary", "operator"))};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json string_list(const std::vector<std::string>& items)
{
    json out = json::array();
    for (const auto& s : items) out.push_back(s);
    return out;
}

} // namespace

DeepGLConfig PipelineConfig::resolve_deepgl(bool directed) const
{
    DeepGLConfig cfg = deepgl;
    if (use_all_operators) cfg.operators = all_operators(directed);
    return cfg;
}

PipelineConfig parse_pipeline_config(std::string_view json_text)
{
    const json root = parse_json(json_text, "config");
    reject_unknown_keys(root, {"deepgl", "cpca", "attribute_encoding", "seed", "output_dir"}, "config");

    PipelineConfig cfg;
    cfg.deepgl.base_kinds = all_structural_features();
    cfg.use_all_operators = true;

    if (root.contains("deepgl")) {
        const json& d = root["deepgl"];
        reject_unknown_keys(d, {"h", "lambda", "bin_fraction", "operators", "base_features"}, "deepgl");
        if (d.contains("h")) {
            const auto h = get_as<long long>(d, "h", "deepgl");
            if (h < 0) throw ConfigError("deepgl: h must be nonnegative");
            cfg.deepgl.max_depth = static_cast<std::size_t>(h);
        }
        if (d.contains("lambda")) cfg.deepgl.lambda = get_as<double>(d, "lambda", "deepgl");
        if (d.contains("bin_fraction")) cfg.deepgl.bin_fraction = get_as<double>(d, "bin_fraction", "deepgl");
        if (d.contains("operators")) {
            const json& ops = d["operators"];
            if (ops.is_string()) {
                if (ops.get<std::string>() != "all") throw ConfigError("deepgl: operators must be \"all\" or a list");
            } else if (ops.is_array()) {
                cfg.use_all_operators = false;
                for (const auto& op : ops) cfg.deepgl.operators.push_back(operator_from_json(op));
            } else {
                throw ConfigError("deepgl: operators must be \"all\" or a list");
            }
        }
        if (d.contains("base_features")) {
            const json& bases = d["base_features"];
            if (!bases.is_array()) throw ConfigError("deepgl: base_features must be a list");
            cfg.deepgl.base_kinds.clear();
            for (const auto& b : bases) cfg.deepgl.base_kinds.push_back(base_kind_from_json(b));
        }
    }

    if (root.contains("cpca")) {
        const json& c = root["cpca"];
        reject_unknown_keys(c, {"d_prime", "alpha", "epsilon", "standardize_mode", "rel_tol", "max_iter"}, "cpca");
        if (c.contains("d_prime")) {
            const auto k = get_as<long long>(c, "d_prime", "cpca");
            if (k < 1) throw ConfigError("cpca: d_prime must be at least 1");
            cfg.cpca.d_prime = static_cast<Eigen::Index>(k);
        }
        if (c.contains("alpha")) {
            const json& a = c["alpha"];
            if (a.is_string()) {
                if (a.get<std::string>() != "auto") throw ConfigError("cpca: alpha must be \"auto\" or a number");
            } else {
                const double alpha = get_as<double>(c, "alpha", "cpca");
                if (!(alpha >= 0.0)) throw ConfigError("cpca: alpha must be nonnegative");
                cfg.cpca.alpha = alpha;
            }
        }
        if (c.contains("epsilon")) cfg.cpca.epsilon = get_as<double>(c, "epsilon", "cpca");
        if (!(cfg.cpca.epsilon > 0.0)) throw ConfigError("cpca: epsilon must be positive");
        if (c.contains("standardize_mode")) {
            try {
                cfg.cpca.mode = standardize_mode_from_string(get_as<std::string>(c, "standardize_mode", "cpca"));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        if (c.contains("rel_tol")) cfg.cpca.rel_tol = get_as<double>(c, "rel_tol", "cpca");
        if (!(cfg.cpca.rel_tol > 0.0)) throw ConfigError("cpca: rel_tol must be positive");
        if (c.contains("max_iter")) {
            const auto m = get_as<long long>(c, "max_iter", "cpca");
            if (m < 1) throw ConfigError("cpca: max_iter must be at least 1");
            cfg.cpca.max_iter = static_cast<std::size_t>(m);
        }
    }

    if (root.contains("attribute_encoding")) {
        const json& enc = root["attribute_encoding"];
        if (!enc.is_object()) throw ConfigError("attribute_encoding must be an object");
        for (const auto& [key, value] : enc.items()) {
            if (!value.is_number()) throw ConfigError("attribute_encoding: '" + key + "' must map to a number");
            cfg.attribute_encoding[key] = value.get<double>();
        }
    }
    if (root.contains("seed")) {
        const json& s = root["seed"];
        if (!s.is_number_integer() || s.get<long long>() < 0) throw ConfigError("seed must be a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    if (root.contains("output_dir")) cfg.output_dir = get_as<std::string>(root, "output_dir", "config");

    try {
        DeepGLConfig probe = cfg.resolve_deepgl(true);
        probe.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

std::string feature_set_to_json(const FeatureSet& features)
{
    json list = json::array();
    for (const auto& def : features.definitions) {
        json chain = json::array();
        for (const auto& op : def.chain) {
            chain.push_back({{"direction", std::string(to_string(op.direction))},
                             {"summary", std::string(to_string(op.summary))}});
        }
        list.push_back({{"base", std::string(to_string(def.base.tag))},
                        {"params", base_params_to_json(def.base)},
                        {"chain", chain}});
    }
    json root = {{"bin_fraction", features.bin_fraction}, {"features", list}};
    return root.dump(2) + "\n";
}

FeatureSet feature_set_from_json(std::string_view json_text)
{
    const json root = parse_json(json_text, "feature set");
    reject_unknown_keys(root, {"bin_fraction", "features"}, "feature set");
    FeatureSet fs;
    if (root.contains("bin_fraction")) fs.bin_fraction = get_as<double>(root, "bin_fraction", "feature set");
    if (!(fs.bin_fraction >= 0.0 && fs.bin_fraction < 1.0)) {
        throw ConfigError("feature set: bin_fraction must lie in [0, 1)");
    }
    if (!root.contains("features") || !root["features"].is_array()) {
        throw ConfigError("feature set: 'features' must be a list");
    }
    for (const auto& f : root["features"]) {
        reject_unknown_keys(f, {"base", "params", "chain"}, "feature");
        json base = f.contains("params") ? f["params"] : json::object();
        if (!base.is_object()) throw ConfigError("feature: params must be an object");
        base["kind"] = get_as<std::string>(f, "base", "feature");
        FeatureDefinition def{base_kind_from_json(base), {}};
        if (f.contains("chain")) {
            if (!f["chain"].is_array()) throw ConfigError("feature: chain must be a list");
            for (const auto& op : f["chain"]) def.chain.push_back(operator_from_json(op));
        }
        fs.definitions.push_back(std::move(def));
    }
    return fs;
}

std::string feature_matrix_csv(const Graph& g, const FeatureMatrix& matrix)
{
    std::ostringstream out;
    out << "node";
    for (const auto& def : matrix.definitions) out << ',' << csv_field(def.render());
    out << '\n';
    for (Eigen::Index v = 0; v < matrix.values.rows(); ++v) {
        out << csv_field(g.label(static_cast<NodeId>(v)));
        for (Eigen::Index j = 0; j < matrix.values.cols(); ++j) out << ',' << detail::format_double(matrix.values(v, j));
        out << '\n';
    }
    return out.str();
}

EmbedResult run_embed(const Graph& target, const Graph& background, const PipelineConfig& config)
{
    if (target.directed() != background.directed()) {
        throw ConfigError("target and background graphs must both be directed or both undirected");
    }
    EmbedResult result;
    result.seed = config.seed;
    result.cpca = config.cpca;
    result.deepgl = config.resolve_deepgl(target.directed());
    try {
        result.deepgl.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    result.learning = learn_features(target, result.deepgl);
    result.warnings = result.learning.warnings;
    for (const auto& d : result.learning.dropped_base) {
        result.warnings.push_back("base feature " + d.kind.name() + " dropped: " + d.reason);
    }
    try {
        result.transfer = transfer_features(target, background, result.learning.features);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (const auto& d : result.transfer.dropped) {
        result.warnings.push_back("feature column " + std::to_string(d.column + 1) + " dropped from both graphs: " +
                                  d.reason);
    }

    const auto& xt = result.transfer.target.values;
    const auto& xb = result.transfer.background.values;
    const auto d = xt.cols();
    if (d == 0) throw ConfigError("no feature column is usable on both graphs");
    if (config.cpca.d_prime > d) {
        throw ConfigError("cpca: d_prime (" + std::to_string(config.cpca.d_prime) + ") exceeds the feature count (" +
                          std::to_string(d) + ")");
    }
    if (xt.rows() < 2 || xb.rows() < 2) throw ConfigError("both graphs need at least 2 nodes");

    const auto std_result = standardize<double>(xt, xb, config.cpca.mode);
    result.standardization = std_result.params;
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        const std::string name = result.transfer.target.definitions[idx].render();
        if (std_result.params.target.zero_variance[idx]) {
            result.warnings.push_back("zero variance on the target: " + name);
        }
        if (config.cpca.mode == StandardizeMode::separate && std_result.params.background.zero_variance[idx]) {
            result.warnings.push_back("zero variance on the background: " + name);
        }
    }

    if (config.cpca.alpha) {
        result.contrast = cpca_fit<double>(std_result.target, std_result.background, *config.cpca.alpha,
                                           config.cpca.d_prime, config.cpca.epsilon);
    } else {
        result.contrast = auto_alpha<double>(std_result.target, std_result.background, config.cpca.d_prime,
                                             config.cpca.epsilon, config.cpca.rel_tol, config.cpca.max_iter);
        if (!result.contrast.converged) {
            result.warnings.push_back("automatic alpha selection stopped at max_iter before converging");
        }
    }
    return result;
}

std::string loadings_csv(const EmbedResult& result)
{
    const auto& w = result.contrast.projection;
    std::ostringstream out;
    out << "feature,relational_function,base_feature";
    for (Eigen::Index k = 0; k < w.cols(); ++k) out << ",cpc" << k + 1;
    out << '\n';
    const auto& defs = result.transfer.target.definitions;
    for (std::size_t j = 0; j < defs.size(); ++j) {
        out << 'F' << j + 1 << ',' << csv_field(defs[j].relational_function()) << ',' << csv_field(defs[j].base.name());
        for (Eigen::Index k = 0; k < w.cols(); ++k) {
            out << ',' << detail::format_double(w(static_cast<Eigen::Index>(j), k));
        }
        out << '\n';
    }
    return out.str();
}

std::string embedding_csv(const Graph& target, const Graph& background, const EmbedResult& result)
{
    std::ostringstream out;
    out << "node,network";
    for (Eigen::Index k = 0; k < result.contrast.projection.cols(); ++k) out << ",cpc" << k + 1;
    out << '\n';
    auto rows = [&](const Graph& g, const Eigen::MatrixXd& y, char tag) {
        for (Eigen::Index v = 0; v < y.rows(); ++v) {
            out << csv_field(g.label(static_cast<NodeId>(v))) << ',' << tag;
            for (Eigen::Index k = 0; k < y.cols(); ++k) out << ',' << detail::format_double(y(v, k));
            out << '\n';
        }
    };
    rows(target, result.contrast.target_embedding, 'T');
    rows(background, result.contrast.background_embedding, 'B');
    return out.str();
}

std::string report_json(const EmbedResult& result, std::optional<double> wall_seconds)
{
    const auto& c = result.contrast;
    json report;
    report["alpha"] = c.alpha;
    report["alpha_mode"] = result.cpca.alpha ? "fixed" : "auto";
    report["alpha_history"] = c.alpha_history;
    report["converged"] = c.converged;
    report["iterations"] = c.alpha_history.size();
    report["eigenvalues"] = std::vector<double>(c.eigenvalues.data(), c.eigenvalues.data() + c.eigenvalues.size());
    report["epsilon"] = c.epsilon;
    report["d"] = c.projection.rows();
    report["d_prime"] = c.projection.cols();
    report["mode"] = std::string(to_string(result.cpca.mode));
    report["seed"] = result.seed;
    report["lambda"] = result.deepgl.lambda;
    report["h"] = result.deepgl.max_depth;
    report["bin_fraction"] = result.deepgl.bin_fraction;
    report["level_sizes"] = result.learning.level_sizes;

    std::vector<std::string> features;
    for (const auto& def : result.transfer.target.definitions) features.push_back(def.render());
    report["features"] = string_list(features);

    json dropped = json::array();
    for (const auto& d : result.learning.dropped_base) {
        dropped.push_back({{"feature", d.kind.name()}, {"stage", "base screening"}, {"reason", d.reason}});
    }
    for (const auto& d : result.transfer.dropped) {
        dropped.push_back({{"feature", result.learning.features.definitions[d.column].render()},
                           {"stage", "transfer"},
                           {"reason", d.reason}});
    }
    report["dropped_features"] = dropped;
    report["warnings"] = string_list(result.warnings);
    if (wall_seconds) report["wall_time_seconds"] = *wall_seconds;
    return report.dump(2) + "\n";
}

Eigen::MatrixXd EmbeddingTable::target() const
{
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < is_target.size(); ++i) {
        if (is_target[i]) rows.push_back(static_cast<Eigen::Index>(i));
    }
    return values(rows, Eigen::all);
}

Eigen::MatrixXd EmbeddingTable::background() const
{
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < is_target.size(); ++i) {
        if (!is_target[i]) rows.push_back(static_cast<Eigen::Index>(i));
    }
    return values(rows, Eigen::all);
}

EmbeddingTable parse_embedding_csv(std::string_view text)
{
    const auto lines = detail::split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw ParseError("embedding CSV is empty");
    const auto header = detail::split_csv_line(lines[first]);
    if (header.size() < 3 || header[0] != "node" || header[1] != "network") {
        throw ParseError("embedding CSV header must start with node,network followed by embedding columns", first + 1);
    }
    EmbeddingTable table;
    table.columns.assign(header.begin() + 2, header.end());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto cells = detail::split_csv_line(lines[i]);
        if (cells.size() != header.size()) throw ParseError("wrong number of fields", i + 1);
        const std::string net(detail::trim(cells[1]));
        if (net != "T" && net != "B") throw ParseError("network must be T or B", i + 1);
        std::vector<double> row;
        for (std::size_t k = 2; k < cells.size(); ++k) {
            const auto v = detail::parse_double(detail::trim(cells[k]));
            if (!v || !std::isfinite(*v)) throw ParseError("non-numeric embedding value '" + cells[k] + "'", i + 1);
            row.push_back(*v);
        }
        table.nodes.push_back(cells[0]);
        table.is_target.push_back(net == "T");
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < rows[r].size(); ++k) {
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
        }
    }
    return table;
}

std::string metrics_json(const MetricReport<double>& report)
{
    json j = {{"dispersion_ratio", report.dispersion_ratio},
              {"bhattacharyya", report.bhattacharyya},
              {"kl_divergence", report.kl_divergence}};
    return j.dump(2) + "\n";
}

Eigen::Index NodeTable::column_index(std::string_view name) const
{
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] == name) return static_cast<Eigen::Index>(j);
    }
    if (name.size() > 1 && name[0] == 'F') {
        if (auto k = detail::parse_integer(name.substr(1)); k && *k >= 1 && static_cast<std::size_t>(*k) <= columns.size()) {
            return static_cast<Eigen::Index>(*k - 1);
        }
    }
    throw ConfigError("no column '" + std::string(name) + "' in the feature table");
}

NodeTable parse_node_table_csv(std::string_view text)
{
    const auto lines = detail::split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() && detail::trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw ParseError("feature table is empty");
    const auto header = detail::split_csv_line(lines[first]);
    if (header.empty() || header[0] != "node") throw ParseError("feature table header must start with node", first + 1);
    NodeTable table;
    table.columns.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        const auto cells = detail::split_csv_line(lines[i]);
        if (cells.size() != header.size()) throw ParseError("wrong number of fields", i + 1);
        std::vector<double> row;
        for (std::size_t k = 1; k < cells.size(); ++k) {
            const auto v = detail::parse_double(detail::trim(cells[k]));
            if (!v) throw ParseError("non-numeric value '" + cells[k] + "'", i + 1);
            row.push_back(*v);
        }
        table.nodes.push_back(cells[0]);
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t k = 0; k < rows[r].size(); ++k) {
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
        }
    }
    return table;
}

} // namespace cnrl
