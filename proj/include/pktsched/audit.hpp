// Per-step analytic audits of the chain distribution, and the buffer-sync
// referee that replays the amortized accounting used in the competitive
// analysis.
//
// For a chain h_1..h_m with probabilities p_1..p_m and support n, the audit
// checks two inequalities that must hold at every step:
//
//   max_z ( w_z + sum_{i<z} p_i w_i ) <= w_1   (equality for z <= n)
//   sum_i p_i w_i >= w_1 (1 - (1 - 1/n)^n)
//
// Both are computed analytically from the distribution, so a violation is a
// real bug, not sampling noise.

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "pktsched/mixr.hpp"
#include "pktsched/packet.hpp"

namespace pktsched {

inline constexpr double kAuditRelTol = 1e-9;

// One simulation step as seen by the harness. Indices are 1-based chain
// positions; 0 means "no transmission" (or unmapped for the adversary).
struct StepRecord {
    Step t = 0;
    Chain chain;
    int alg_index = 0;         // f
    int adv_index = 0;         // z
    double alg_gain = 0.0;
    double adv_gain = 0.0;     // weight the adversary actually transmitted
    double adv_amortized = 0.0;  // referee credit for the step, when the referee ran
};

struct StepObserver {
    virtual ~StepObserver() = default;
    virtual void on_step(const StepRecord& record) = 0;
};

struct AuditError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string describe_chain(const Chain& chain) {
    std::ostringstream os;
    os.precision(17);
    os << "chain m=" << chain.length() << " n=" << chain.support << " w=[";
    for (int i = 0; i < chain.length(); ++i) os << (i ? "," : "") << chain.items[i].weight;
    os << "] d=[";
    for (int i = 0; i < chain.length(); ++i) os << (i ? "," : "") << chain.items[i].deadline;
    os << "] p=[";
    for (int i = 0; i < chain.length(); ++i) os << (i ? "," : "") << chain.probs[i];
    os << "]";
    return os.str();
}

struct StepAudit {
    std::vector<double> adv_gain_by_z;  // E[G_ADV | z], 1-based z stored at index z-1
    double adv_gain_max = 0.0;
    double alg_expected_gain = 0.0;
    double alg_lower_bound = 0.0;  // w_1 (1 - (1 - 1/n)^n)
    double worst_ratio = 0.0;      // adv_gain_max / alg_expected_gain
};

// Analytic audit of one chain; throws AuditError (with the full chain in the
// message) if either inequality fails.
inline StepAudit audit_step(const Chain& chain) {
    if (chain.empty()) throw ContractViolation("audit_step: empty chain");
    const int m = chain.length();
    const int n = chain.support;
    const double w1 = chain.top_weight();
    const double tol = kAuditRelTol * w1;

    StepAudit audit;
    audit.adv_gain_by_z.resize(static_cast<std::size_t>(m));
    double prefix = 0.0;  // sum_{i<z} p_i w_i
    for (int z = 1; z <= m; ++z) {
        double g = chain.items[static_cast<std::size_t>(z - 1)].weight + prefix;
        audit.adv_gain_by_z[static_cast<std::size_t>(z - 1)] = g;
        audit.adv_gain_max = std::max(audit.adv_gain_max, g);
        prefix += chain.probs[static_cast<std::size_t>(z - 1)] *
                  chain.items[static_cast<std::size_t>(z - 1)].weight;
        if (g > w1 + tol)
            throw AuditError("adversary amortized gain exceeds w1 at z=" + std::to_string(z) +
                             ": " + std::to_string(g) + " > " + std::to_string(w1) + "; " +
                             describe_chain(chain));
        if (z <= n && std::abs(g - w1) > tol)
            throw AuditError("adversary amortized gain not equalized at z=" + std::to_string(z) +
                             ": " + std::to_string(g) + " != " + std::to_string(w1) + "; " +
                             describe_chain(chain));
    }

    audit.alg_expected_gain = chain.expected_gain();
    audit.alg_lower_bound =
        w1 * (1.0 - std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(n)));
    if (audit.alg_expected_gain < audit.alg_lower_bound - tol)
        throw AuditError("expected gain below w1(1-(1-1/n)^n): " +
                         std::to_string(audit.alg_expected_gain) + " < " +
                         std::to_string(audit.alg_lower_bound) + "; " + describe_chain(chain));
    audit.worst_ratio = audit.adv_gain_max / audit.alg_expected_gain;
    return audit;
}

// 1/(1 - (1 - 1/N)^N): the competitive-ratio bound as a function of the
// maximum per-step support size. Increases toward e/(e-1).
inline double ratio_bound(int n_max) {
    if (n_max < 1) throw ContractViolation("ratio_bound: N must be >= 1");
    if (n_max == 1) return 1.0;
    double q = std::pow(1.0 - 1.0 / static_cast<double>(n_max), static_cast<double>(n_max));
    return 1.0 / (1.0 - q);
}

struct RatioBound {
    int n_max = 1;
    double bound = 1.0;
};

inline RatioBound make_ratio_bound(int n_max) { return {n_max, ratio_bound(n_max)}; }

// Max over steps of the number of packets with positive probability.
inline int track_support_max(std::span<const StepRecord> transcript) {
    int n_max = 0;
    for (const auto& rec : transcript) n_max = std::max(n_max, rec.chain.support);
    return n_max;
}

struct RefereeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Replays the proof's buffer accounting: a shadow copy of the adversary's
// buffer starts equal to the algorithm's and is patched after each pair of
// transmissions (replace h_f by a copy of h_z when d_f <= d_z; otherwise the
// adversary additionally transmits h_f and a copy of h_z is injected).
// Either way the shadow must match the algorithm's buffer at every step
// boundary, and the adversary's credit is w_z, or w_z + w_f in the second
// case. Buffers are compared as multisets of (weight, deadline) values.
class BufferSyncReferee {
public:
    struct Outcome {
        int z = 0;           // 1-based chain index of the adversary's packet
        int case_id = 0;     // 1: d_f <= d_z, 2: d_f > d_z
        double amortized = 0.0;
    };

    // Maps the adversary's transmitted packet to its chain representative by
    // (weight, deadline) equality and applies the case rule. f is 1-based.
    Outcome on_transmissions(const Chain& chain, int alg_index, const Packet& adv_sent) {
        if (chain.empty() || alg_index < 1)
            throw RefereeError("referee requires the algorithm to transmit from a chain");
        int z = 0;
        for (int i = 1; i <= chain.length(); ++i) {
            const Packet& h = chain.items[static_cast<std::size_t>(i - 1)];
            if (h.weight == adv_sent.weight && h.deadline == adv_sent.deadline) {
                z = i;
                break;
            }
        }
        if (z == 0)
            throw RefereeError("adversary packet (w=" + std::to_string(adv_sent.weight) +
                               ", d=" + std::to_string(adv_sent.deadline) +
                               ") has no chain representative; " + describe_chain(chain));

        const Packet& hf = chain.items[static_cast<std::size_t>(alg_index - 1)];
        const Packet& hz = chain.items[static_cast<std::size_t>(z - 1)];

        Outcome out;
        out.z = z;
        erase_value(hz);  // the adversary transmits h_z
        if (z == alg_index) {
            // both sides removed the same value; buffers already agree
            out.case_id = 1;
            out.amortized = hz.weight;
        } else if (hf.deadline <= hz.deadline) {
            out.case_id = 1;
            out.amortized = hz.weight;
            erase_value(hf);   // h_f upgraded to a copy of h_z
            shadow_.insert({hz.weight, hz.deadline});
        } else {
            out.case_id = 2;
            out.amortized = hz.weight + hf.weight;
            erase_value(hf);   // additionally transmitted by the adversary
            shadow_.insert({hz.weight, hz.deadline});  // injected copy
        }
        return out;
    }

    void on_injections(std::span<const Packet> injected) {
        for (const Packet& p : injected) shadow_.insert({p.weight, p.deadline});
    }

    // Deletions/expiries that hit the algorithm's buffer hit the shadow too.
    void on_removed_from_alg(std::span<const Packet> removed) {
        for (const Packet& p : removed) erase_value(p);
    }

    // The core bookkeeping invariant: shadow == algorithm's buffer, as value
    // multisets, at the step boundary.
    void check_equal(const Buffer& alg_buffer) const {
        if (shadow_.size() != alg_buffer.size())
            throw RefereeError("shadow buffer size " + std::to_string(shadow_.size()) +
                               " != algorithm buffer size " + std::to_string(alg_buffer.size()));
        std::multiset<std::pair<double, Step>> actual;
        for (const Packet& p : alg_buffer.pending()) actual.insert({p.weight, p.deadline});
        if (actual != shadow_)
            throw RefereeError("shadow buffer diverged from algorithm buffer");
    }

private:
    void erase_value(const Packet& p) {
        auto it = shadow_.find({p.weight, p.deadline});
        if (it == shadow_.end())
            throw RefereeError("value (w=" + std::to_string(p.weight) +
                               ", d=" + std::to_string(p.deadline) + ") missing from shadow buffer");
        shadow_.erase(it);
    }

    std::multiset<std::pair<double, Step>> shadow_;
};

}  // namespace pktsched
