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
#include "cnrl/graph.hpp"

#include "cnrl/common.hpp"
#include "cnrl/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cnrl {

std::string_view to_string(Direction direction)
{
    switch (direction) {
    case Direction::in: return "in";
    case Direction::out: return "out";
    case Direction::total: return "total";
    }
    return "total";
}

Direction direction_from_string(std::string_view name)
{
    if (name == "in") return Direction::in;
    if (name == "out") return Direction::out;
    if (name == "total") return Direction::total;
    throw std::invalid_argument("unknown neighbor direction '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// GraphBuilder

GraphBuilder::GraphBuilder(bool directed) : directed_(directed) {}

NodeId GraphBuilder::add_node(std::string_view label)
{
    auto [it, inserted] = ids_.try_emplace(std::string(label), static_cast<NodeId>(labels_.size()));
    if (inserted) {
        labels_.emplace_back(label);
    }
    return it->second;
}

bool GraphBuilder::add_edge(std::string_view source, std::string_view target, double weight)
{
    const NodeId s = add_node(source);
    const NodeId t = add_node(target);
    return add_edge(s, t, weight);
}

bool GraphBuilder::add_edge(NodeId source, NodeId target, double weight)
{
    const auto n = static_cast<NodeId>(labels_.size());
    if (source < 0 || target < 0 || source >= n || target >= n) {
        throw std::out_of_range("edge endpoint is not a registered node");
    }
    auto a = static_cast<std::uint32_t>(source);
    auto b = static_cast<std::uint32_t>(target);
    if (!directed_ && a > b) {
        std::swap(a, b);
    }
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    auto [it, inserted] = edge_index_.try_emplace(key, edges_.size());
    if (!inserted) {
        return false;
    }
    edges_.push_back({source, target, weight});
    return true;
}

Graph GraphBuilder::build() &&
{
    Graph g;
    g.directed_ = directed_;
    g.labels_ = std::move(labels_);
    g.ids_ = std::move(ids_);
    g.edges_ = std::move(edges_);

    const std::size_t n = g.labels_.size();
    std::vector<std::vector<Neighbor>> out(n);
    std::vector<std::vector<Neighbor>> in(n);
    for (const Edge& e : g.edges_) {
        const auto s = static_cast<std::size_t>(e.source);
        const auto t = static_cast<std::size_t>(e.target);
        if (directed_) {
            out[s].push_back({e.target, e.weight});
            in[t].push_back({e.source, e.weight});
        } else {
            out[s].push_back({e.target, e.weight});
            if (s != t) {
                out[t].push_back({e.source, e.weight});
            }
        }
    }

    auto by_id = [](const Neighbor& x, const Neighbor& y) { return x.id < y.id; };
    auto to_csr = [&](std::vector<std::vector<Neighbor>>& rows) {
        Graph::Csr csr;
        csr.offsets.assign(n + 1, 0);
        for (std::size_t v = 0; v < n; ++v) {
            std::sort(rows[v].begin(), rows[v].end(), by_id);
            csr.offsets[v + 1] = csr.offsets[v] + rows[v].size();
        }
        csr.entries.reserve(csr.offsets[n]);
        for (auto& row : rows) {
            csr.entries.insert(csr.entries.end(), row.begin(), row.end());
        }
        return csr;
    };

    if (directed_) {
        std::vector<std::vector<Neighbor>> total(n);
        for (std::size_t v = 0; v < n; ++v) {
            std::sort(out[v].begin(), out[v].end(), by_id);
            std::sort(in[v].begin(), in[v].end(), by_id);
            // Merge the two sorted rows, summing weights of ids present in both.
            std::size_t i = 0, j = 0;
            while (i < out[v].size() || j < in[v].size()) {
                if (j == in[v].size() || (i < out[v].size() && out[v][i].id < in[v][j].id)) {
                    total[v].push_back(out[v][i++]);
                } else if (i == out[v].size() || in[v][j].id < out[v][i].id) {
                    total[v].push_back(in[v][j++]);
                } else {
                    total[v].push_back({out[v][i].id, out[v][i].weight + in[v][j].weight});
                    ++i;
                    ++j;
                }
            }
        }
        g.out_ = to_csr(out);
        g.in_ = to_csr(in);
        g.total_ = to_csr(total);
    } else {
        g.out_ = to_csr(out);
        g.in_ = g.out_;
        g.total_ = g.out_;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Graph

std::span<const Neighbor> Graph::neighbors(NodeId v, Direction direction) const
{
    if (v < 0 || static_cast<std::size_t>(v) >= node_count()) {
        throw std::out_of_range("node id " + std::to_string(v) + " out of range");
    }
    const auto idx = static_cast<std::size_t>(v);
    switch (direction) {
    case Direction::in: return in_.row(idx);
    case Direction::out: return out_.row(idx);
    case Direction::total: return total_.row(idx);
    }
    return total_.row(idx);
}

std::optional<NodeId> Graph::find_node(std::string_view label) const
{
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const Eigen::VectorXd& Graph::attribute(const std::string& name) const
{
    auto it = attributes_.find(name);
    if (it == attributes_.end()) {
        throw std::invalid_argument("graph has no attribute '" + name + "'");
    }
    return it->second;
}

Graph Graph::with_attributes(const std::map<std::string, Eigen::VectorXd>& columns) const
{
    Graph g = *this;
    for (const auto& [name, values] : columns) {
        if (static_cast<std::size_t>(values.size()) != node_count()) {
            throw std::invalid_argument("attribute '" + name + "' has " + std::to_string(values.size()) +
                                        " entries, expected " + std::to_string(node_count()));
        }
        if (!values.allFinite()) {
            throw std::invalid_argument("attribute '" + name + "' has non-finite entries");
        }
        if (!g.attributes_.emplace(name, values).second) {
            throw std::invalid_argument("attribute '" + name + "' already exists");
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

bool is_separator(char c)
{
    return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<std::string_view> split_tokens(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_separator(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_separator(line[j])) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

// Returns the directive value for "# key: value" comment lines.
std::optional<std::string_view> directive(std::string_view line, std::string_view key)
{
    line = detail::trim(line);
    if (line.empty() || line.front() != '#') return std::nullopt;
    line = detail::trim(line.substr(1));
    if (line.size() <= key.size() || line.substr(0, key.size()) != key || line[key.size()] != ':') {
        return std::nullopt;
    }
    return detail::trim(line.substr(key.size() + 1));
}

} // namespace

Graph parse_edge_list(std::string_view text, bool directed, bool weighted)
{
    GraphBuilder builder(directed);
    std::size_t line_no = 0;
    for (std::string_view line : detail::split_lines(text)) {
        ++line_no;
        const std::string_view trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            if (auto count = directive(trimmed, "nodes")) {
                const auto n = detail::parse_integer(*count);
                if (!n || *n < 0) throw ParseError("invalid node count '" + std::string(*count) + "'", line_no);
                for (long long v = 0; v < *n; ++v) builder.add_node(std::to_string(v));
            } else if (auto label = directive(trimmed, "node")) {
                if (split_tokens(*label).size() != 1) {
                    throw ParseError("node label must be a single token", line_no);
                }
                builder.add_node(*label);
            }
            continue;
        }
        const auto tokens = split_tokens(trimmed);
        if (tokens.size() != 2 && tokens.size() != 3) {
            throw ParseError("expected 'source target [weight]', got " + std::to_string(tokens.size()) + " tokens",
                             line_no);
        }
        double weight = 1.0;
        if (tokens.size() == 3) {
            const auto parsed = detail::parse_double(tokens[2]);
            if (!parsed || !std::isfinite(*parsed)) {
                throw ParseError("non-numeric weight '" + std::string(tokens[2]) + "'", line_no);
            }
            if (weighted) weight = *parsed;
        }
        builder.add_edge(tokens[0], tokens[1], weight);
    }
    return std::move(builder).build();
}

std::optional<bool> sniff_directed(std::string_view text)
{
    for (std::string_view line : detail::split_lines(text)) {
        const std::string_view trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() != '#') break;
        if (auto value = directive(trimmed, "directed")) {
            if (*value == "true") return true;
            if (*value == "false") return false;
        }
    }
    return std::nullopt;
}

std::string serialize_edge_list(const Graph& g)
{
    std::ostringstream out;
    out << "# directed: " << (g.directed() ? "true" : "false") << '\n';
    bool canonical = true;
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        if (g.labels()[v] != std::to_string(v)) {
            canonical = false;
            break;
        }
    }
    if (canonical) {
        out << "# nodes: " << g.node_count() << '\n';
    } else {
        for (const auto& label : g.labels()) out << "# node: " << label << '\n';
    }
    const bool weighted = std::any_of(g.edges().begin(), g.edges().end(), [](const Edge& e) { return e.weight != 1.0; });
    for (const Edge& e : g.edges()) {
        out << g.label(e.source) << ' ' << g.label(e.target);
        if (weighted) out << ' ' << detail::format_double(e.weight);
        out << '\n';
    }
    return out.str();
}

Graph attach_attributes(const Graph& g,
                        const std::vector<AttributeRow>& table,
                        const std::map<std::string, double>& encoding)
{
    if (table.empty()) return g;

    const std::size_t n = g.node_count();
    std::map<std::string, Eigen::VectorXd> columns;
    std::map<std::string, std::vector<bool>> seen;
    for (const AttributeRow& row : table) {
        const auto id = g.find_node(row.node);
        if (!id) throw std::invalid_argument("attribute table names unknown node '" + row.node + "'");

        double value = 0.0;
        if (auto numeric = detail::parse_double(row.value); numeric && std::isfinite(*numeric)) {
            value = *numeric;
        } else if (auto it = encoding.find(row.value); it != encoding.end()) {
            value = it->second;
        } else {
            throw std::invalid_argument("no encoding for categorical value '" + row.value + "' in column '" +
                                        row.column + "'");
        }

        auto [col, fresh] = columns.try_emplace(row.column, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
        auto& mask = seen[row.column];
        if (fresh) mask.assign(n, false);
        const auto idx = static_cast<std::size_t>(*id);
        if (mask[idx]) {
            throw std::invalid_argument("duplicate value for node '" + row.node + "' in column '" + row.column + "'");
        }
        mask[idx] = true;
        col->second[static_cast<Eigen::Index>(idx)] = value;
    }
    for (const auto& [name, mask] : seen) {
        const auto missing = std::find(mask.begin(), mask.end(), false);
        if (missing != mask.end()) {
            const auto v = static_cast<NodeId>(missing - mask.begin());
            throw std::invalid_argument("column '" + name + "' has no value for node '" + g.label(v) + "'");
        }
    }
    return g.with_attributes(columns);
}

std::vector<AttributeRow> parse_attribute_csv(std::string_view text)
{
    std::vector<AttributeRow> rows;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    for (std::string_view line : detail::split_lines(text)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (header.empty()) {
            if (fields.empty() || fields.front() != "node") {
                throw ParseError("attribute table header must start with 'node'", line_no);
            }
            header = std::move(fields);
            continue;
        }
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c].empty()) continue;
            rows.push_back({fields[0], header[c], fields[c]});
        }
    }
    return rows;
}

std::string node_table_csv(const Graph& g)
{
    std::ostringstream out;
    out << "node";
    for (const auto& [name, values] : g.attributes()) out << ',' << name;
    out << '\n';
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        out << g.labels()[v];
        for (const auto& [name, values] : g.attributes()) {
            out << ',' << detail::format_double(values[static_cast<Eigen::Index>(v)]);
        }
        out << '\n';
    }
    return out.str();
}

std::string to_dot(const Graph& g, const std::vector<std::string>& colors)
{
    if (!colors.empty() && colors.size() != g.node_count()) {
        throw std::invalid_argument("need one color per node");
    }
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + '"';
    };
    std::ostringstream out;
    out << (g.directed() ? "digraph" : "graph") << " G {\n";
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        out << "  " << quote(g.labels()[v]);
        if (!colors.empty()) out << " [style=filled, fillcolor=" << quote(colors[v]) << ']';
        out << ";\n";
    }
    const char* arrow = g.directed() ? " -> " : " -- ";
    for (const Edge& e : g.edges()) {
        out << "  " << quote(g.label(e.source)) << arrow << quote(g.label(e.target)) << ";\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace cnrl
