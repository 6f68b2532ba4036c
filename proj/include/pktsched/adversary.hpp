// Adversaries: oblivious trace generators, the adaptive-strategy interface,
// and the geometric-queue strategy that realizes the lower-bound game.

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pktsched/mixr.hpp"
#include "pktsched/packet.hpp"
#include "pktsched/rng.hpp"
#include "pktsched/trace.hpp"

namespace pktsched {

// ---------------------------------------------------------------------------
// Oblivious instance generators
// ---------------------------------------------------------------------------

enum class TraceKind { s_uniform, s_bounded, two_weight, agreeable };

struct GenParams {
    TraceKind kind = TraceKind::s_bounded;
    Step steps = 100;        // number of injection steps (0 .. steps-1)
    double rate = 1.0;       // mean injections per step (Poisson)
    Step s = 2;              // lifespan value (s_uniform) or bound (others)
    double wmin = 0.5;       // weight range; for two_weight these are the two weights
    double wmax = 10.0;
};

inline void validate_gen_params(const GenParams& p) {
    if (p.steps < 1) throw InputError("generator: steps must be >= 1");
    if (!(p.rate > 0.0)) throw InputError("generator: rate must be positive");
    if (p.s < 1) throw InputError("generator: lifespan bound s must be >= 1");
    if (!(p.wmin > 0.0) || !(p.wmax >= p.wmin))
        throw InputError("generator: need 0 < wmin <= wmax");
    if (p.kind == TraceKind::two_weight && !(p.wmin < p.wmax))
        throw InputError("generator: two_weight needs two distinct weights");
}

inline Trace generate(const GenParams& params, RunRng& rng) {
    validate_gen_params(params);
    Trace trace;
    Step last_deadline = 0;  // agreeable: deadlines non-decreasing in release order
    for (Step t = 0; t < params.steps; ++t) {
        TraceStep step;
        step.t = t;
        int count = rng.next_poisson(params.rate);
        for (int i = 0; i < count; ++i) {
            Injection inj;
            switch (params.kind) {
                case TraceKind::s_uniform:
                    inj.weight = rng.next_in(params.wmin, params.wmax);
                    inj.lifespan = params.s;
                    break;
                case TraceKind::s_bounded:
                    inj.weight = rng.next_in(params.wmin, params.wmax);
                    inj.lifespan = 1 + static_cast<Step>(rng.next_below(
                                           static_cast<std::uint64_t>(params.s)));
                    break;
                case TraceKind::two_weight:
                    inj.weight = rng.next_bool() ? params.wmax : params.wmin;
                    inj.lifespan = 1 + static_cast<Step>(rng.next_below(
                                           static_cast<std::uint64_t>(params.s)));
                    break;
                case TraceKind::agreeable: {
                    inj.weight = rng.next_in(params.wmin, params.wmax);
                    Step d = std::max(last_deadline, t + 1 + static_cast<Step>(rng.next_below(
                                                             static_cast<std::uint64_t>(params.s))));
                    last_deadline = d;
                    inj.lifespan = d - t;
                    break;
                }
            }
            step.inject.push_back(inj);
        }
        if (!step.inject.empty()) trace.steps.push_back(std::move(step));
    }
    return trace;
}

// Structural predicates for generated traces (checked post-hoc in tests).
inline bool is_s_uniform(const Trace& tr, Step s) {
    for (const auto& st : tr.steps)
        for (const auto& inj : st.inject)
            if (inj.lifespan != s) return false;
    return true;
}

inline bool is_s_bounded(const Trace& tr, Step s) {
    for (const auto& st : tr.steps)
        for (const auto& inj : st.inject)
            if (inj.lifespan < 1 || inj.lifespan > s) return false;
    return true;
}

inline bool is_agreeable(const Trace& tr) {
    // r_i < r_j implies d_i <= d_j
    Step max_deadline_so_far = 0;
    for (const auto& st : tr.steps) {
        Step step_min = 0;
        bool any = false;
        for (const auto& inj : st.inject) {
            Step d = st.t + inj.lifespan;
            if (!any || d < step_min) step_min = d, any = true;
        }
        if (any && step_min < max_deadline_so_far) return false;
        for (const auto& inj : st.inject)
            max_deadline_so_far = std::max(max_deadline_so_far, st.t + inj.lifespan);
    }
    return true;
}

inline std::size_t distinct_weight_count(const Trace& tr) {
    std::set<double> seen;
    for (const auto& st : tr.steps)
        for (const auto& inj : st.inject) seen.insert(inj.weight);
    return seen.size();
}

// ---------------------------------------------------------------------------
// Adaptive strategies
// ---------------------------------------------------------------------------

class IdAllocator {
public:
    PacketId next() { return next_++; }

private:
    PacketId next_ = 1;
};

struct StepEdits {
    std::vector<PacketId> deletions;  // queue-semantics strategies only
    std::vector<Packet> injections;   // released at t+1
};

// An adaptive opponent. The engine calls choose_transmission before the
// algorithm's random draw for the step, and post_step after both
// transmissions are revealed. Strategies that return true from
// allows_deletions play the dynamic-queue generalization: their deletions
// remove items from both buffers at the step boundary.
class AdversaryStrategy {
public:
    virtual ~AdversaryStrategy() = default;

    virtual std::string name() const = 0;

    virtual std::vector<Packet> initial_injections(IdAllocator&) { return {}; }

    virtual std::optional<PacketId> choose_transmission(const Buffer& own, const Buffer& alg,
                                                        Step t) = 0;

    virtual StepEdits post_step(Step t, const std::optional<Packet>& alg_sent,
                                IdAllocator& ids) = 0;

    virtual bool allows_deletions() const { return false; }
};

// ---------------------------------------------------------------------------
// Geometric-queue strategy analytics
// ---------------------------------------------------------------------------

// Amortized-to-expected gain ratio of strategy k against an algorithm that
// picks item a^j with probability q_j from the queue 1, a, ..., a^n:
// (a^k + sum_{j>k} q_j a^j) / (sum_j q_j a^j).
inline double geometric_expected_ratio(int n, double a, std::span<const double> q, int k) {
    if (n < 0) throw ContractViolation("geometric_expected_ratio: n must be >= 0");
    if (!(a > 1.0)) throw ContractViolation("geometric_expected_ratio: need a > 1");
    if (k < 0 || k > n) throw ContractViolation("geometric_expected_ratio: k out of range");
    if (q.size() != static_cast<std::size_t>(n + 1))
        throw ContractViolation("geometric_expected_ratio: q must have n+1 entries");
    double total = 0.0;
    for (double qi : q) total += qi;
    if (std::abs(total - 1.0) > 1e-9)
        throw ContractViolation("geometric_expected_ratio: q is not normalized");

    double alg = 0.0, tail = 0.0;
    for (int j = 0; j <= n; ++j) {
        double term = q[static_cast<std::size_t>(j)] * std::pow(a, j);
        alg += term;
        if (j > k) tail += term;
    }
    return (std::pow(a, k) + tail) / alg;
}

// Coefficients v_0..v_n that average the per-k ratios into the closed-form
// bound a^{n+1}/M with M = a^{n+1} - n(a-1). Requires a small enough that
// v_n stays non-negative; a = 1 + 1/n always qualifies.
inline std::vector<double> geometric_mixing_weights(int n, double a) {
    if (n < 0) throw ContractViolation("geometric_mixing_weights: n must be >= 0");
    if (!(a > 1.0)) throw ContractViolation("geometric_mixing_weights: need a > 1");
    double vn_numer = a - static_cast<double>(n) * (a - 1.0);
    if (vn_numer < -1e-12)
        throw ContractViolation(
            "geometric_mixing_weights: a - n(a-1) < 0 makes v_n negative (a too large for n)");
    double m = std::pow(a, n + 1) - static_cast<double>(n) * (a - 1.0);
    std::vector<double> v(static_cast<std::size_t>(n + 1));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = std::pow(a, n - k) * (a - 1.0) / m;
    v[static_cast<std::size_t>(n)] = std::max(vn_numer, 0.0) / m;
    return v;
}

// Strategy index maximizing the expected ratio; near-ties resolve to the
// smallest k.
inline int auto_best_k(int n, double a, std::span<const double> q) {
    int best = 0;
    double best_ratio = geometric_expected_ratio(n, a, q, 0);
    for (int k = 1; k <= n; ++k) {
        double r = geometric_expected_ratio(n, a, q, k);
        if (r > best_ratio * (1.0 + 1e-12)) {
            best = k;
            best_ratio = r;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Geometric-queue strategy
// ---------------------------------------------------------------------------

enum class GeometricMode { queue, packet_emulation };

struct GeometricConfig {
    int n = 1;                 // queue holds n+1 weights a^0..a^n
    double a = 0.0;            // growth factor; 0 means the maximizing 1 + 1/n
    int k = -1;                // strategy index; -1 = choose by analytic argmax
    GeometricMode mode = GeometricMode::queue;
    Step horizon = 100000;     // planned main-phase length T (emulation deadlines)
};

// The lower-bound strategy: keep the algorithm's queue equal to the n+1
// weights a^0..a^n (in increasing deadline order) and collect a^k every step.
//
// Queue mode realizes the dynamic-queue game directly: class j occupies a
// fixed far-future deadline slot BIG+j (never expires), and each step the
// strategy deletes classes 0..k and reissues them, plus a copy of any
// heavier item the algorithm consumed.
//
// Packet-emulation mode encodes the k=0 strategy with real deadlines: class 0
// is reinjected every step with lifespan 1, classes 1..n sit at distinct
// beyond-horizon deadlines and are reinjected at their original deadline when
// consumed. Strategies k >= 1 cannot be emulated with expiry-driven removal:
// class 0 must occupy relative deadline 1 every step, so any class above it
// would have to vanish before reaching relative deadline 1, which only a
// deletion can do. Asking for k >= 1 in emulation mode is therefore an error.
class GeometricQueueStrategy final : public AdversaryStrategy {
public:
    explicit GeometricQueueStrategy(const GeometricConfig& config) : cfg_(config) {
        if (cfg_.n < 1) throw InputError("geometric strategy: n must be >= 1");
        if (cfg_.a == 0.0) cfg_.a = 1.0 + 1.0 / static_cast<double>(cfg_.n);
        if (!(cfg_.a > 1.0)) throw InputError("geometric strategy: need a > 1");
        if (cfg_.horizon < 0) throw InputError("geometric strategy: horizon must be >= 0");
        weights_.resize(static_cast<std::size_t>(cfg_.n + 1));
        for (int j = 0; j <= cfg_.n; ++j)
            weights_[static_cast<std::size_t>(j)] = std::pow(cfg_.a, j);
        if (cfg_.k < 0) cfg_.k = auto_best_k(cfg_.n, cfg_.a, algorithm_distribution());
        if (cfg_.k > cfg_.n) throw InputError("geometric strategy: k must be in 0..n");
        if (cfg_.mode == GeometricMode::packet_emulation && cfg_.k != 0)
            throw InputError(
                "geometric strategy: packet-emulation mode supports only k=0 "
                "(higher k needs queue deletions)");
        live_.resize(static_cast<std::size_t>(cfg_.n + 1), 0);
    }

    std::string name() const override {
        return "geometric:n=" + std::to_string(cfg_.n) + ",k=" + std::to_string(cfg_.k) +
               (cfg_.mode == GeometricMode::queue ? ",queue" : ",packet");
    }

    int n() const { return cfg_.n; }
    double a() const { return cfg_.a; }
    int k() const { return cfg_.k; }
    GeometricMode mode() const { return cfg_.mode; }

    // Mix-R's per-class selection probabilities on this queue (q_j indexed by
    // class, i.e. by increasing weight).
    std::vector<double> algorithm_distribution() const {
        std::vector<double> desc(weights_.rbegin(), weights_.rend());
        Distribution dist = build_distribution(desc);
        std::vector<double> q(weights_.size());
        for (std::size_t i = 0; i < q.size(); ++i) q[q.size() - 1 - i] = dist.probs[i];
        return q;
    }

    bool allows_deletions() const override { return cfg_.mode == GeometricMode::queue; }

    std::vector<Packet> initial_injections(IdAllocator& ids) override {
        std::vector<Packet> out;
        for (int j = 0; j <= cfg_.n; ++j) out.push_back(fresh_copy(j, ids, 0));
        return out;
    }

    std::optional<PacketId> choose_transmission(const Buffer& own, const Buffer&, Step) override {
        PacketId id = live_[static_cast<std::size_t>(cfg_.k)];
        if (!own.contains(id))
            throw ContractViolation("geometric strategy lost its class-k copy");
        return id;
    }

    StepEdits post_step(Step t, const std::optional<Packet>& alg_sent, IdAllocator& ids) override {
        StepEdits edits;
        if (cfg_.mode == GeometricMode::queue) {
            for (int j = 0; j <= cfg_.k; ++j)
                edits.deletions.push_back(live_[static_cast<std::size_t>(j)]);
            for (int j = 0; j <= cfg_.k; ++j)
                edits.injections.push_back(fresh_copy(j, ids, t + 1));
        } else {
            edits.injections.push_back(fresh_copy(0, ids, t + 1));  // lifespan-1 class 0
        }
        if (alg_sent) {
            int j = class_of(alg_sent->id);
            if (j > cfg_.k) edits.injections.push_back(fresh_copy(j, ids, t + 1));
        }
        return edits;
    }

private:
    static constexpr Step kQueueBase = Step{1} << 40;

    Step class_deadline(int j, Step release) const {
        if (cfg_.mode == GeometricMode::queue) return kQueueBase + j;
        if (j == 0) return release + 1;
        // distinct beyond-horizon slots, increasing with weight; far enough
        // that the adversary can drain every accumulated copy in time
        return 2 * cfg_.horizon + 2 * static_cast<Step>(cfg_.n) + 32 + j;
    }

    Packet fresh_copy(int j, IdAllocator& ids, Step release) {
        Packet p{ids.next(), weights_[static_cast<std::size_t>(j)], release,
                 class_deadline(j, release)};
        live_[static_cast<std::size_t>(j)] = p.id;
        class_by_id_.emplace(p.id, j);
        return p;
    }

    int class_of(PacketId id) const {
        auto it = class_by_id_.find(id);
        if (it == class_by_id_.end())
            throw ContractViolation("geometric strategy saw a foreign packet id");
        return it->second;
    }

    GeometricConfig cfg_;
    std::vector<double> weights_;
    std::vector<PacketId> live_;  // current copy of each class in the algorithm's queue
    std::unordered_map<PacketId, int> class_by_id_;
};

}  // namespace pktsched
