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
#include "cnrl/netgen.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cnrl::netgen {

namespace {

GraphBuilder builder_with_nodes(std::size_t n, bool directed)
{
    GraphBuilder builder(directed);
    for (std::size_t v = 0; v < n; ++v) builder.add_node(std::to_string(v));
    return builder;
}

// Fenwick tree over nonnegative weights with weighted sampling by prefix search.
class WeightTree
{
public:
    explicit WeightTree(std::size_t capacity) : tree_(capacity + 1, 0.0), weights_(capacity, 0.0) {}

    void set(std::size_t i, double w)
    {
        const double delta = w - weights_[i];
        weights_[i] = w;
        for (std::size_t k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += delta;
    }

    double weight(std::size_t i) const { return weights_[i]; }

    double total(std::size_t count) const
    {
        double sum = 0.0;
        for (std::size_t k = count; k > 0; k -= k & (~k + 1)) sum += tree_[k];
        return sum;
    }

    // Smallest i < count whose prefix sum exceeds target, skipping zero weights.
    std::size_t find(double target, std::size_t count) const
    {
        std::size_t pos = 0;
        std::size_t step = 1;
        while (step * 2 < tree_.size()) step *= 2;
        for (; step > 0; step /= 2) {
            if (pos + step < tree_.size() && tree_[pos + step] <= target) {
                pos += step;
                target -= tree_[pos];
            }
        }
        // Rounding can land on a zero-weight slot or past the live range.
        std::size_t i = std::min(pos, count - 1);
        while (i > 0 && weights_[i] == 0.0) --i;
        while (weights_[i] == 0.0 && i + 1 < count) ++i;
        return i;
    }

private:
    std::vector<double> tree_;
    std::vector<double> weights_;
};

Graph grow_price(std::size_t n, const std::function<std::size_t(std::mt19937_64&)>& draw_out_degree,
                 std::mt19937_64& engine)
{
    GraphBuilder builder = builder_with_nodes(n, true);
    if (n == 0) return std::move(builder).build();

    WeightTree attach(n);
    std::vector<std::size_t> in_degree(n, 0);
    attach.set(0, 1.0);
    std::vector<std::size_t> chosen;
    for (std::size_t j = 1; j < n; ++j) {
        const std::size_t k = std::min(draw_out_degree(engine), j);
        chosen.clear();
        for (std::size_t e = 0; e < k; ++e) {
            const double target = uniform01(engine) * attach.total(j);
            const std::size_t t = attach.find(target, j);
            chosen.push_back(t);
            attach.set(t, 0.0);
        }
        for (std::size_t t : chosen) {
            builder.add_edge(static_cast<NodeId>(j), static_cast<NodeId>(t));
            ++in_degree[t];
        }
        for (std::size_t t : chosen) attach.set(t, static_cast<double>(in_degree[t] + 1));
        attach.set(j, 1.0);
    }
    return std::move(builder).build();
}

} // namespace

double uniform01(std::mt19937_64& engine)
{
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

Graph gilbert(std::size_t n, double p, bool directed, std::uint64_t seed)
{
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gilbert: p must lie in [0, 1]");
    std::mt19937_64 engine(seed);
    GraphBuilder builder = builder_with_nodes(n, directed);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = directed ? 0 : u + 1; v < n; ++v) {
            if (u == v) continue;
            if (uniform01(engine) < p) builder.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
        }
    }
    return std::move(builder).build();
}

Graph price(std::size_t n, std::size_t m_out, std::uint64_t seed)
{
    if (n < 1) throw std::invalid_argument("price: n must be at least 1");
    if (m_out < 1) throw std::invalid_argument("price: m_out must be at least 1");
    std::mt19937_64 engine(seed);
    return grow_price(n, [m_out](std::mt19937_64&) { return m_out; }, engine);
}

void EnhancedPriceParams::validate() const
{
    if (kappa.empty()) throw std::invalid_argument("enhanced_price: kappa must not be empty");
    if (kappa.size() != probs.size()) {
        throw std::invalid_argument("enhanced_price: kappa and probs must have the same length");
    }
    for (std::size_t k : kappa) {
        if (k < 1) throw std::invalid_argument("enhanced_price: every kappa must be a positive integer");
    }
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("enhanced_price: probs must be nonnegative");
    }
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("enhanced_price: probs must sum to 1 (got " + std::to_string(sum) + ")");
    }
    if (n < 1) throw std::invalid_argument("enhanced_price: n must be at least 1");
}

Graph enhanced_price(const EnhancedPriceParams& params)
{
    params.validate();
    std::vector<double> cumulative(params.probs.size());
    std::partial_sum(params.probs.begin(), params.probs.end(), cumulative.begin());
    std::mt19937_64 engine(params.seed);
    auto draw = [&](std::mt19937_64& rng) {
        const double u = uniform01(rng) * cumulative.back();
        for (std::size_t i = 0; i < cumulative.size(); ++i) {
            if (u < cumulative[i]) return params.kappa[i];
        }
        return params.kappa.back();
    };
    return grow_price(params.n, draw, engine);
}

} // namespace cnrl::netgen
