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
// cnrl: contrastive network representation learning from the command line.
//
//   cnrl gen price --n 100 --m 3 -o price.txt
//   cnrl features --target t.txt --background b.txt --config cfg.json
//   cnrl embed --target t.txt --background b.txt --config cfg.json
//   cnrl metrics out/embedding.csv
//   cnrl plot --embedding out/embedding.csv --color-by F1 --target-features out/target_features.csv
//
// Exit codes: 0 success, 2 input or I/O error, 3 semantic or config error.

#include "cnrl/common.hpp"
#include "cnrl/graph.hpp"
#include "cnrl/metrics.hpp"
#include "cnrl/netgen.hpp"
#include "cnrl/pipeline.hpp"
#include "cnrl/svg_plot.hpp"
#include "cnrl/text_util.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace cnrl;

namespace {

constexpr int kInputError = 2;
constexpr int kSemanticError = 3;

// Input-side failure that maps to exit code 2.
struct InputError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct GraphInput
{
    std::string path;
    std::string attributes;
    bool force_directed = false;
    bool force_undirected = false;
    bool weighted = false;
};

Graph load_graph(const GraphInput& in, const std::map<std::string, double>& encoding)
{
    const std::string text = detail::read_file(in.path);
    bool directed = false;
    if (in.force_directed) {
        directed = true;
    } else if (in.force_undirected) {
        directed = false;
    } else if (auto d = sniff_directed(text)) {
        directed = *d;
    } else {
        std::cerr << "note: " << in.path << " has no '# directed:' line; reading it as undirected\n";
    }
    Graph g = [&] {
        try {
            return parse_edge_list(text, directed, in.weighted);
        } catch (const ParseError& e) {
            throw InputError(in.path + ": " + e.what());
        }
    }();
    if (!in.attributes.empty()) {
        std::vector<AttributeRow> rows;
        try {
            rows = parse_attribute_csv(detail::read_file(in.attributes));
        } catch (const ParseError& e) {
            throw InputError(in.attributes + ": " + e.what());
        }
        try {
            g = attach_attributes(g, rows, encoding);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(in.attributes + ": " + e.what());
        }
    }
    return g;
}

PipelineConfig load_config(const std::string& path)
{
    if (path.empty()) return parse_pipeline_config("{}");
    return parse_pipeline_config(detail::read_file(path));
}

void write(const fs::path& path, const std::string& contents)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    detail::write_file_atomic(path, contents);
}

void add_graph_options(CLI::App* cmd, GraphInput& in, const std::string& role, bool required)
{
    auto* opt = cmd->add_option("--" + role, in.path, role + " edge-list file");
    if (required) opt->required();
    cmd->add_option("--" + role + "-attributes", in.attributes, "node attribute CSV for the " + role + " graph");
}

void add_direction_flags(CLI::App* cmd, GraphInput& t, GraphInput& b)
{
    auto* d = cmd->add_flag_callback("--directed", [&] { t.force_directed = b.force_directed = true; },
                                     "read both graphs as directed");
    auto* u = cmd->add_flag_callback("--undirected", [&] { t.force_undirected = b.force_undirected = true; },
                                     "read both graphs as undirected");
    d->excludes(u);
    cmd->add_flag_callback("--weighted", [&] { t.weighted = b.weighted = true; },
                           "use the third column as edge weight (ignored by default)");
}

int run_guarded(const std::function<void()>& body)
{
    try {
        body();
        return 0;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const detail::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const EmptyFeatureSetError& e) {
        std::cerr << "error: no base feature survived screening\n";
        for (const auto& d : e.dropped()) std::cerr << "  " << d.kind.name() << ": " << d.reason << '\n';
        return kSemanticError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSemanticError;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Contrastive network representation learning"};
    app.require_subcommand(1);

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic network");
    std::string model;
    std::size_t n = 0, m = 3;
    double p = 0.0;
    bool gen_directed = false;
    std::vector<std::size_t> kappa;
    std::vector<double> probs;
    std::uint64_t seed = 0;
    std::string gen_out;
    gen->add_option("model", model, "gilbert, price or enhanced_price")
        ->required()
        ->check(CLI::IsMember({"gilbert", "price", "enhanced_price"}));
    gen->add_option("--n", n, "number of nodes")->required();
    gen->add_option("--p", p, "edge probability (gilbert)");
    gen->add_option("--m", m, "out-edges per new node (price)");
    gen->add_option("--kappa", kappa, "candidate out-degrees (enhanced_price)")->delimiter(',');
    gen->add_option("--probs", probs, "probability of each candidate (enhanced_price)")->delimiter(',');
    gen->add_flag("--directed", gen_directed, "directed pairs (gilbert)");
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("-o,--out", gen_out, "output edge-list file (stdout when omitted)");

    // features / embed -------------------------------------------------------
    GraphInput target, background;
    std::string config_path, out_dir;
    bool timing = false;

    auto* features = app.add_subcommand("features", "learn features on a target graph and transfer them");
    add_graph_options(features, target, "target", true);
    add_graph_options(features, background, "background", false);
    add_direction_flags(features, target, background);
    features->add_option("--config", config_path, "JSON pipeline config");
    features->add_option("--out-dir", out_dir, "output directory (overrides the config)");

    auto* embed = app.add_subcommand("embed", "run the full contrastive pipeline");
    add_graph_options(embed, target, "target", true);
    add_graph_options(embed, background, "background", true);
    add_direction_flags(embed, target, background);
    embed->add_option("--config", config_path, "JSON pipeline config");
    embed->add_option("--out-dir", out_dir, "output directory (overrides the config)");
    embed->add_flag("--timing", timing, "record wall time in report.json");

    // metrics ------------------------------------------------------------------
    auto* metrics = app.add_subcommand("metrics", "score a joint embedding");
    std::string embedding_path, metrics_out;
    Eigen::Index knn = 1;
    metrics->add_option("embedding", embedding_path, "embedding CSV")->required();
    metrics->add_option("--k", knn, "neighbor rank of the KL estimator");
    metrics->add_option("-o,--out", metrics_out, "write the JSON report here");

    // plot ---------------------------------------------------------------------
    auto* plot = app.add_subcommand("plot", "draw a joint embedding as SVG");
    std::string plot_embedding, plot_out, color_by, target_features, background_features, title, dot_graph, dot_out;
    plot->add_option("--embedding", plot_embedding, "embedding CSV")->required();
    plot->add_option("-o,--out", plot_out, "output SVG")->required();
    plot->add_option("--color-by", color_by, "feature column (header name or F<k>) to color nodes by");
    plot->add_option("--target-features", target_features, "target feature-matrix CSV");
    plot->add_option("--background-features", background_features, "background feature-matrix CSV");
    plot->add_option("--title", title, "plot title");
    plot->add_option("--graph", dot_graph, "target edge list to export as colored DOT");
    plot->add_option("--dot", dot_out, "DOT output path (with --graph)");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        return run_guarded([&] {
            Graph g = [&] {
                try {
                    if (model == "gilbert") return netgen::gilbert(n, p, gen_directed, seed);
                    if (model == "price") return netgen::price(n, m, seed);
                    return netgen::enhanced_price({kappa, probs, n, seed});
                } catch (const std::invalid_argument& e) {
                    throw InputError(e.what());
                }
            }();
            const std::string text = serialize_edge_list(g);
            if (gen_out.empty()) {
                std::cout << text;
            } else {
                write(gen_out, text);
            }
            std::cerr << "n=" << g.node_count() << " l=" << g.edge_count() << '\n';
        });
    }

    if (features->parsed()) {
        return run_guarded([&] {
            const PipelineConfig cfg = load_config(config_path);
            const fs::path dir = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
            const Graph gt = load_graph(target, cfg.attribute_encoding);
            const auto learned = learn_features(gt, cfg.resolve_deepgl(gt.directed()));
            for (const auto& w : learned.warnings) std::cerr << "warning: " << w << '\n';
            write(dir / "features.json", feature_set_to_json(learned.features));
            write(dir / "target_features.csv", feature_matrix_csv(gt, learned.training_matrix));
            if (!background.path.empty()) {
                const Graph gb = load_graph(background, cfg.attribute_encoding);
                const auto tr = transfer_features(gt, gb, learned.features);
                for (const auto& d : tr.dropped) std::cerr << "warning: dropped column: " << d.reason << '\n';
                write(dir / "target_features.csv", feature_matrix_csv(gt, tr.target));
                write(dir / "background_features.csv", feature_matrix_csv(gb, tr.background));
            }
            std::cout << "learned " << learned.features.definitions.size() << " features; wrote " << dir.string()
                      << '\n';
        });
    }

    if (embed->parsed()) {
        return run_guarded([&] {
            const auto start = std::chrono::steady_clock::now();
            const PipelineConfig cfg = load_config(config_path);
            const fs::path dir = out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(out_dir);
            const Graph gt = load_graph(target, cfg.attribute_encoding);
            const Graph gb = load_graph(background, cfg.attribute_encoding);
            const EmbedResult r = run_embed(gt, gb, cfg);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
            std::optional<double> wall;
            if (timing) wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write(dir / "features.json", feature_set_to_json(r.learning.features));
            write(dir / "target_features.csv", feature_matrix_csv(gt, r.transfer.target));
            write(dir / "background_features.csv", feature_matrix_csv(gb, r.transfer.background));
            write(dir / "embedding.csv", embedding_csv(gt, gb, r));
            write(dir / "loadings.csv", loadings_csv(r));
            write(dir / "report.json", report_json(r, wall));
            std::cout << "d=" << r.contrast.projection.rows() << " d'=" << r.contrast.projection.cols()
                      << " alpha=" << r.contrast.alpha << " iterations=" << r.contrast.alpha_history.size()
                      << "; wrote " << dir.string() << '\n';
        });
    }

    if (metrics->parsed()) {
        return run_guarded([&] {
            const EmbeddingTable table = parse_embedding_csv(detail::read_file(embedding_path));
            const Eigen::MatrixXd yt = table.target();
            const Eigen::MatrixXd yb = table.background();
            if (yt.rows() == 0 || yb.rows() == 0) {
                throw ConfigError("the embedding must contain both target (T) and background (B) rows");
            }
            const MetricReport<double> report = contrast_metrics<double>(yt, yb, knn);
            std::cout << "dispersion_ratio=" << report.dispersion_ratio << " bhattacharyya=" << report.bhattacharyya
                      << " kl_divergence=" << report.kl_divergence << '\n';
            if (!metrics_out.empty()) write(metrics_out, metrics_json(report));
        });
    }

    if (plot->parsed()) {
        return run_guarded([&] {
            const EmbeddingTable table = parse_embedding_csv(detail::read_file(plot_embedding));
            if (table.values.cols() < 2) throw ConfigError("plotting needs at least 2 embedding columns");

            std::map<std::string, double> t_colors, b_colors;
            std::string color_label;
            auto load_colors = [&](const std::string& path, std::map<std::string, double>& out) {
                if (path.empty()) return;
                const NodeTable nt = parse_node_table_csv(detail::read_file(path));
                const Eigen::Index col = nt.column_index(color_by);
                color_label = nt.columns[static_cast<std::size_t>(col)];
                for (std::size_t i = 0; i < nt.nodes.size(); ++i) {
                    out[nt.nodes[i]] = nt.values(static_cast<Eigen::Index>(i), col);
                }
            };
            if (!color_by.empty()) {
                if (target_features.empty() && background_features.empty()) {
                    throw ConfigError("--color-by needs --target-features or --background-features");
                }
                load_colors(target_features, t_colors);
                load_colors(background_features, b_colors);
            }

            std::vector<ScatterPoint> points;
            for (std::size_t i = 0; i < table.nodes.size(); ++i) {
                ScatterPoint pt;
                pt.x = table.values(static_cast<Eigen::Index>(i), 0);
                pt.y = table.values(static_cast<Eigen::Index>(i), 1);
                pt.target = table.is_target[i];
                const auto& colors = pt.target ? t_colors : b_colors;
                if (auto it = colors.find(table.nodes[i]); it != colors.end()) pt.color_value = it->second;
                points.push_back(pt);
            }
            ScatterOptions options;
            options.title = title;
            options.color_label = color_label;
            write(plot_out, render_scatter_svg(points, options));

            if (!dot_graph.empty()) {
                if (dot_out.empty()) throw ConfigError("--graph needs --dot");
                const Graph g = load_graph({dot_graph, "", false, false}, {});
                double lo = 0, hi = 0;
                bool first = true;
                for (const auto& [label, v] : t_colors) {
                    lo = first ? v : std::min(lo, v);
                    hi = first ? v : std::max(hi, v);
                    first = false;
                }
                std::vector<std::string> fills;
                if (!t_colors.empty()) {
                    for (NodeId v = 0; v < static_cast<NodeId>(g.node_count()); ++v) {
                        auto it = t_colors.find(g.label(v));
                        fills.push_back(it == t_colors.end() ? "#bbbbbb"
                                                             : sequential_color(hi > lo ? (it->second - lo) / (hi - lo)
                                                                                        : 0.0));
                    }
                }
                write(dot_out, to_dot(g, fills));
            }
        });
    }
    return 0;
}
