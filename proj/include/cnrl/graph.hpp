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

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cnrl {

using NodeId = std::int32_t;

enum class Direction { in, out, total };

std::string_view to_string(Direction direction);
Direction direction_from_string(std::string_view name);

struct Neighbor
{
    NodeId id;
    double weight;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct Edge
{
    NodeId source;
    NodeId target;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

class Graph;

/**
 * Accumulates nodes and edges and freezes them into an immutable Graph.
 *
 * Node ids are handed out densely in order of first appearance. Parallel edges
 * are collapsed (the first weight wins); for undirected graphs (a, b) and (b, a)
 * are the same edge. Self-loops are kept.
 */
class GraphBuilder
{
public:
    explicit GraphBuilder(bool directed);

    /// Returns the id of \p label, registering it if it is new.
    NodeId add_node(std::string_view label);

    /// Returns false when the edge was already present and got collapsed.
    bool add_edge(std::string_view source, std::string_view target, double weight = 1.0);
    bool add_edge(NodeId source, NodeId target, double weight = 1.0);

    std::size_t node_count() const { return labels_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    Graph build() &&;

private:
    bool directed_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> ids_;
    std::vector<Edge> edges_;
    std::unordered_map<std::uint64_t, std::size_t> edge_index_;
};

/**
 * A simple (no parallel edges) directed or undirected graph with optional
 * real-valued node attribute columns.
 *
 * Adjacency is stored as three CSR arrays (out, in, total). For undirected
 * graphs all three views coincide. The total view of a directed graph merges a
 * reciprocal pair u->v, v->u into one neighbor entry whose weight is the sum of
 * the two, so a node is never listed twice.
 *
 * A Graph is immutable once built and safe to share across threads.
 */
class Graph
{
public:
    Graph() = default;

    bool directed() const noexcept { return directed_; }
    std::size_t node_count() const noexcept { return labels_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    /// Throws std::out_of_range when \p v is not a node id.
    std::span<const Neighbor> neighbors(NodeId v, Direction direction) const;

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(NodeId v) const { return labels_.at(static_cast<std::size_t>(v)); }
    std::optional<NodeId> find_node(std::string_view label) const;

    /// Edges in ingestion order (ids, not labels).
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    bool has_attribute(const std::string& name) const { return attributes_.count(name) != 0; }
    const Eigen::VectorXd& attribute(const std::string& name) const;
    const std::map<std::string, Eigen::VectorXd>& attributes() const noexcept { return attributes_; }

    /// Copy of this graph with \p columns added. Each column must have node_count()
    /// finite entries and must not already exist.
    Graph with_attributes(const std::map<std::string, Eigen::VectorXd>& columns) const;

private:
    friend class GraphBuilder;

    struct Csr
    {
        std::vector<std::size_t> offsets;
        std::vector<Neighbor> entries;

        std::span<const Neighbor> row(std::size_t v) const
        {
            return {entries.data() + offsets[v], offsets[v + 1] - offsets[v]};
        }
    };

    bool directed_ = false;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, NodeId> ids_;
    std::vector<Edge> edges_;
    Csr out_;
    Csr in_;
    Csr total_;
    std::map<std::string, Eigen::VectorXd> attributes_;
};

/**
 * Parses the edge-list text format: one edge per line as `source target [weight]`,
 * tokens separated by whitespace and/or commas, `#` starting a comment line.
 *
 * Two comment directives are understood: `# nodes: N` pre-registers the labels
 * "0" .. "N-1" (so isolated nodes survive a round trip), and `# node: LABEL`
 * registers a single label. Registration order fixes the dense ids.
 *
 * Weights are validated but only stored when \p weighted is true; otherwise every
 * edge weighs 1.0. Throws ParseError with the offending line number.
 */
Graph parse_edge_list(std::string_view text, bool directed, bool weighted = false);

/// Value of a `# directed: true|false` directive, if the text carries one.
std::optional<bool> sniff_directed(std::string_view text);

/**
 * Writes \p g in the edge-list format. The output re-parses to a graph with the
 * same ids, adjacency and edge count. Weights are written only when some edge
 * weight differs from 1.
 */
std::string serialize_edge_list(const Graph& g);

/// One cell of an attribute table.
struct AttributeRow
{
    std::string node;
    std::string column;
    std::string value;
};

/**
 * Adds attribute columns to a copy of \p g.
 *
 * Raw values that parse as numbers are used as-is; anything else must be a key
 * of \p encoding. Every column present in \p table must cover every node.
 * Throws std::invalid_argument on unknown labels, uncovered categorical values,
 * duplicate (node, column) cells or incomplete columns.
 */
Graph attach_attributes(const Graph& g,
                        const std::vector<AttributeRow>& table,
                        const std::map<std::string, double>& encoding);

/// Reads a CSV table with header `node,<column>,...` into attribute rows.
std::vector<AttributeRow> parse_attribute_csv(std::string_view text);

/// Node table CSV: header `node,<attr...>`, one row per node in id order.
std::string node_table_csv(const Graph& g);

/**
 * Graphviz DOT export. \p colors, when non-empty, holds one fill color per node
 * (any string Graphviz accepts, e.g. "#440154").
 */
std::string to_dot(const Graph& g, const std::vector<std::string>& colors = {});

} // namespace cnrl
