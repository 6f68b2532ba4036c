// Mix-R: randomized memoryless selection over the pending set.
//
// Each step the pending packets are filtered down to a chain h_1..h_m of
// mutually non-dominated packets with strictly decreasing weights and
// strictly decreasing deadlines. Probabilities are assigned greedily,
// p_i = 1 - w_{i+1}/w_i while unassigned mass remains, and the transmitted
// packet is sampled from that distribution. The construction depends only
// on the multiset of (weight, deadline order) pairs, so the algorithm is
// memoryless and scale-invariant.

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "pktsched/packet.hpp"
#include "pktsched/rng.hpp"

namespace pktsched {

// Residual probability mass below this is rounding noise and is clamped to 0.
inline constexpr double kProbResidualEps = 1e-12;

struct Chain {
    std::vector<Packet> items;  // h_1..h_m
    std::vector<double> probs;  // p_1..p_m
    int support = 0;            // n: count of strictly positive probabilities

    int length() const { return static_cast<int>(items.size()); }
    bool empty() const { return items.empty(); }

    double top_weight() const { return items.front().weight; }

    // Sum p_i w_i, the expected gain of one step.
    double expected_gain() const {
        double g = 0.0;
        for (int i = 0; i < support; ++i) g += probs[i] * items[i].weight;
        return g;
    }
};

// The dominance-filtered sequence h_1..h_m: repeatedly take the heaviest
// packet that is not strictly dominated, then drop everything it dominates.
// Equivalently (after sorting by weight desc, deadline asc, id asc): keep a
// packet iff its deadline is strictly below the running minimum.
inline std::vector<Packet> build_chain(std::span<const Packet> pending) {
    std::vector<Packet> sorted(pending.begin(), pending.end());
    std::sort(sorted.begin(), sorted.end(), heavier_first);
    std::vector<Packet> chain;
    for (const Packet& p : sorted) {
        if (chain.empty() || p.deadline < chain.back().deadline) chain.push_back(p);
    }
    return chain;
}

struct Distribution {
    std::vector<double> probs;
    int support = 0;
};

// Greedy assignment over strictly decreasing weights: each p_i takes
// min(1 - w_{i+1}/w_i, remaining mass); the last item takes the residual.
inline Distribution build_distribution(std::span<const double> weights) {
    const std::size_t m = weights.size();
    if (m == 0) return {};
    for (std::size_t i = 0; i < m; ++i) {
        if (!(weights[i] > 0.0))
            throw ContractViolation("chain weights must be positive");
        if (i + 1 < m && !(weights[i + 1] < weights[i]))
            throw ContractViolation("chain weights must be strictly decreasing");
    }
    Distribution dist;
    dist.probs.resize(m, 0.0);
    double remaining = 1.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        double cap = 1.0 - weights[i + 1] / weights[i];
        double p = std::min(cap, remaining);
        dist.probs[i] = p;
        remaining -= p;
        if (std::abs(remaining) < kProbResidualEps) remaining = 0.0;
    }
    dist.probs[m - 1] = remaining;
    for (std::size_t i = 0; i < m; ++i)
        if (dist.probs[i] > 0.0) dist.support = static_cast<int>(i) + 1;
    return dist;
}

inline Chain make_chain(std::vector<Packet> items) {
    Chain chain;
    chain.items = std::move(items);
    std::vector<double> weights;
    weights.reserve(chain.items.size());
    for (const Packet& p : chain.items) weights.push_back(p.weight);
    Distribution dist = build_distribution(weights);
    chain.probs = std::move(dist.probs);
    chain.support = dist.support;
    return chain;
}

// Full per-step state: chain plus probabilities. Empty pending gives an
// empty chain, meaning a no-op step.
inline Chain mixr_chain(std::span<const Packet> pending) {
    if (pending.empty()) return {};
    return make_chain(build_chain(pending));
}

// Chain restricted to a support set S: the construction starts from S
// instead of the whole pending set. S must be a non-empty subset of pending.
inline Chain restricted_chain(std::span<const Packet> pending, std::span<const Packet> support_set) {
    if (support_set.empty())
        throw ContractViolation("restricted chain: support set must be non-empty");
    for (const Packet& s : support_set) {
        bool found = false;
        for (const Packet& p : pending)
            if (p.id == s.id) {
                found = true;
                break;
            }
        if (!found)
            throw ContractViolation("restricted chain: support set packet " +
                                    std::to_string(s.id) + " is not pending");
    }
    return make_chain(build_chain(support_set));
}

// Samples h_i with probability p_i using a single uniform draw and
// cumulative sums. Returns the 0-based chain index.
inline int select_index(const Chain& chain, RunRng& rng) {
    if (chain.empty()) throw ContractViolation("select on empty chain");
    double u = rng.next_unit();
    double acc = 0.0;
    for (int i = 0; i < chain.support; ++i) {
        acc += chain.probs[i];
        if (u < acc) return i;
    }
    return chain.support - 1;  // absorb the last ulp of rounding
}

inline const Packet& select(const Chain& chain, RunRng& rng) {
    return chain.items[static_cast<std::size_t>(select_index(chain, rng))];
}

// The baseline: heaviest pending packet, ties broken by earliest deadline
// then lowest id.
inline std::optional<Packet> greedy_select(std::span<const Packet> pending) {
    if (pending.empty()) return std::nullopt;
    const Packet* best = &pending[0];
    for (const Packet& p : pending.subspan(1))
        if (heavier_first(p, *best)) best = &p;
    return *best;
}

}  // namespace pktsched
