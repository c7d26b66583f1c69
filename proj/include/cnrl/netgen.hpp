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

#include <cstdint>
#include <random>
#include <vector>

// Synthetic network models. Every generator draws from std::mt19937_64 seeded
// with the given seed and converts raw 64-bit outputs to doubles itself (top 53
// bits), so the same seed yields the same edge list on every platform.
// Node labels are "0" .. "n-1".

namespace cnrl::netgen {

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
double uniform01(std::mt19937_64& engine);

/// Each ordered (directed) or unordered (undirected) pair of distinct nodes is
/// linked independently with probability p. Throws std::invalid_argument for p
/// outside [0, 1].
Graph gilbert(std::size_t n, double p, bool directed, std::uint64_t seed);

/**
 * Price preferential attachment. Node j (j >= 1) adds min(m_out, j) out-edges to
 * distinct older nodes, each successive target drawn with probability
 * proportional to (in-degree + 1) among the not-yet-chosen older nodes.
 */
Graph price(std::size_t n, std::size_t m_out, std::uint64_t seed);

struct EnhancedPriceParams
{
    std::vector<std::size_t> kappa; ///< candidate out-degrees, each >= 1
    std::vector<double> probs;      ///< selection probability of each candidate
    std::size_t n = 0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;
};

/// Price's model with the out-degree of each new node drawn from kappa with
/// probabilities probs (then capped by the number of older nodes).
Graph enhanced_price(const EnhancedPriceParams& params);

} // namespace cnrl::netgen
