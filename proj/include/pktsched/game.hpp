// Game engines: the adaptive game against a strategy, and oblivious replay
// of a fixed trace. Step order is fixed: both players commit transmissions
// (adversary first, before the algorithm's draw), then queue deletions (when
// the strategy plays the dynamic-queue game), then expiry, then injection.
//
// After the main phase a drain lets both sides transmit their remaining
// pending packets, one per step, with no further injections.

#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "pktsched/adversary.hpp"
#include "pktsched/audit.hpp"
#include "pktsched/mixr.hpp"
#include "pktsched/packet.hpp"
#include "pktsched/rng.hpp"
#include "pktsched/trace.hpp"

namespace pktsched {

enum class AlgorithmKind { mixr, greedy };

inline const char* algorithm_name(AlgorithmKind kind) {
    return kind == AlgorithmKind::mixr ? "mixr" : "greedy";
}

struct GameOptions {
    bool audit = true;            // analytic per-step audit of every chain (mixr only)
    bool referee = false;         // buffer-sync accounting; needs a chain-playing opponent
    StepObserver* observer = nullptr;
    double audit_fault_p1 = 0.0;  // test hook: offset added to p_1 before auditing
};

struct GameResult {
    double alg_gain = 0.0;
    double adv_gain = 0.0;            // raw transmitted weight (adaptive games)
    Step main_steps = 0;
    Step drain_steps = 0;
    int track_n = 0;                  // max support over steps
    std::uint64_t audited_steps = 0;
    double adv_amortized_total = 0.0;  // referee credit over the main phase
};

namespace detail {

struct AlgState {
    AlgorithmKind kind;
    Buffer buffer{0};
    RunRng* rng;

    // One transmission; returns the chain (empty for greedy / empty buffer).
    std::pair<Chain, std::optional<Packet>> transmit(int* index_out) {
        *index_out = 0;
        auto pending = buffer.pending();
        if (pending.empty()) return {Chain{}, std::nullopt};
        if (kind == AlgorithmKind::greedy) {
            auto pick = greedy_select(pending);
            return {Chain{}, buffer.take(pick->id)};
        }
        Chain chain = mixr_chain(pending);
        int f = select_index(chain, *rng);
        *index_out = f + 1;
        Packet sent = buffer.take(chain.items[static_cast<std::size_t>(f)].id);
        return {std::move(chain), sent};
    }
};

inline void run_audit(const Chain& chain, const GameOptions& opts, GameResult& result) {
    if (!opts.audit || chain.empty()) return;
    if (opts.audit_fault_p1 != 0.0) {
        Chain faulted = chain;
        faulted.probs[0] += opts.audit_fault_p1;
        audit_step(faulted);
    } else {
        audit_step(chain);
    }
    ++result.audited_steps;
}

}  // namespace detail

// Plays T adaptive steps plus the drain. Throws ContractViolation if the
// strategy transmits a non-pending or strictly dominated packet, AuditError /
// RefereeError on a failed per-step check.
inline GameResult play_adaptive(AlgorithmKind alg_kind, AdversaryStrategy& strategy, Step T,
                                RunRng& rng, const GameOptions& opts = {}) {
    if (T < 0) throw ContractViolation("play_adaptive: T must be >= 0");
    if (opts.referee && alg_kind != AlgorithmKind::mixr)
        throw ContractViolation("referee accounting requires the chain-building algorithm");

    GameResult result;
    IdAllocator ids;
    detail::AlgState alg{alg_kind, Buffer{0}, &rng};
    Buffer adv{0};
    BufferSyncReferee referee;

    auto initial = strategy.initial_injections(ids);
    for (const Packet& p : initial) {
        if (p.release != 0)
            throw ContractViolation("initial injection must have release 0");
        alg.buffer.insert(p);
        adv.insert(p);
    }
    if (opts.referee) referee.on_injections(initial);

    for (Step t = 0; t < T; ++t) {
        // Adversary commits before the algorithm's draw.
        auto adv_choice = strategy.choose_transmission(adv, alg.buffer, t);
        std::optional<Packet> adv_sent;
        if (adv_choice) {
            const Packet* p = adv.find(*adv_choice);
            if (!p)
                throw ContractViolation("step " + std::to_string(t) +
                                        ": strategy transmitted non-pending packet " +
                                        std::to_string(*adv_choice));
            if (adv.strictly_dominates_any(*p))
                throw ContractViolation("step " + std::to_string(t) +
                                        ": strategy transmitted a strictly dominated packet " +
                                        std::to_string(*adv_choice));
            adv_sent = adv.take(*adv_choice);
        }

        int f = 0;
        auto [chain, alg_sent] = alg.transmit(&f);
        detail::run_audit(chain, opts, result);
        result.track_n = std::max(result.track_n, chain.support);

        StepRecord rec;
        rec.t = t;
        rec.alg_index = f;
        if (alg_sent) result.alg_gain += alg_sent->weight, rec.alg_gain = alg_sent->weight;
        if (adv_sent) result.adv_gain += adv_sent->weight, rec.adv_gain = adv_sent->weight;

        if (opts.referee && adv_sent) {
            auto outcome = referee.on_transmissions(chain, f, *adv_sent);
            rec.adv_index = outcome.z;
            rec.adv_amortized = outcome.amortized;
            result.adv_amortized_total += outcome.amortized;
        }

        StepEdits edits = strategy.post_step(t, alg_sent, ids);
        if (!edits.deletions.empty() && !strategy.allows_deletions())
            throw ContractViolation("step " + std::to_string(t) +
                                    ": strategy without queue semantics requested deletions");
        std::vector<Packet> removed_from_alg;
        for (PacketId id : edits.deletions) {
            if (auto p = alg.buffer.erase_if_present(id)) removed_from_alg.push_back(*p);
            adv.erase_if_present(id);
        }

        auto alg_expired = alg.buffer.advance(edits.injections);
        adv.advance(edits.injections);

        if (opts.referee) {
            referee.on_removed_from_alg(removed_from_alg);
            referee.on_removed_from_alg(alg_expired);
            referee.on_injections(edits.injections);
            referee.check_equal(alg.buffer);
        }

        if (opts.observer) {
            rec.chain = std::move(chain);
            opts.observer->on_step(rec);
        }
        ++result.main_steps;
    }

    // Drain: no injections; the algorithm keeps playing its policy, the
    // adversary collects earliest-deadline first.
    while (!alg.buffer.empty() || !adv.empty()) {
        int f = 0;
        auto [chain, alg_sent] = alg.transmit(&f);
        detail::run_audit(chain, opts, result);
        result.track_n = std::max(result.track_n, chain.support);
        if (alg_sent) result.alg_gain += alg_sent->weight;
        if (auto pick = adv.earliest_deadline()) {
            result.adv_gain += pick->weight;
            adv.take(pick->id);
        }
        alg.buffer.advance({});
        adv.advance({});
        ++result.drain_steps;
        if (opts.observer) {
            StepRecord rec;
            rec.t = T + result.drain_steps - 1;
            rec.alg_index = f;
            rec.alg_gain = alg_sent ? alg_sent->weight : 0.0;
            rec.chain = std::move(chain);
            opts.observer->on_step(rec);
        }
    }
    return result;
}

// Replays a fixed trace against the algorithm. The adversary gain fields are
// unused; compare against opt_schedule(trace).gain.
inline GameResult simulate_trace(AlgorithmKind alg_kind, const Trace& trace, RunRng& rng,
                                 const GameOptions& opts = {}) {
    validate_trace(trace);
    GameResult result;
    detail::AlgState alg{alg_kind, Buffer{0}, &rng};

    auto packets = trace_packets(trace);
    std::size_t next_packet = 0;
    auto injections_released_at = [&](Step t) {
        std::vector<Packet> out;
        while (next_packet < packets.size() && packets[next_packet].release == t)
            out.push_back(packets[next_packet++]);
        return out;
    };

    for (const Packet& p : injections_released_at(0)) alg.buffer.insert(p);

    Step t = 0;
    while (!alg.buffer.empty() || next_packet < packets.size()) {
        int f = 0;
        auto [chain, alg_sent] = alg.transmit(&f);
        detail::run_audit(chain, opts, result);
        result.track_n = std::max(result.track_n, chain.support);
        if (alg_sent) result.alg_gain += alg_sent->weight;

        auto injections = injections_released_at(t + 1);
        alg.buffer.advance(injections);

        if (opts.observer) {
            StepRecord rec;
            rec.t = t;
            rec.alg_index = f;
            rec.alg_gain = alg_sent ? alg_sent->weight : 0.0;
            rec.chain = std::move(chain);
            opts.observer->on_step(rec);
        }
        ++t;
        ++result.main_steps;
    }
    return result;
}

}  // namespace pktsched
