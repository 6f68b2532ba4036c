// Exact offline optimum for a fixed instance.
//
// Feasible packet sets form a transversal matroid (packets vs. the unit time
// slots in their [release, deadline) windows), so greedy by weight with an
// exact feasibility test is optimal. Feasibility is decided by an
// augmenting-path search on the packet-slot bipartite graph.

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "pktsched/packet.hpp"
#include "pktsched/trace.hpp"

namespace pktsched {

struct Assignment {
    Step t = 0;
    PacketId id = 0;
    double weight = 0.0;
};

struct Schedule {
    std::vector<Assignment> assignments;  // sorted by step
    double gain = 0.0;
};

namespace detail {

class SlotMatcher {
public:
    SlotMatcher(std::span<const Packet> packets, Step start, Step end)
        : packets_(packets.begin(), packets.end()), start_(start) {
        if (end < start) end = start;
        if (end - start > (1 << 22))
            throw InputError("schedule horizon too large for slot matching");
        match_.assign(static_cast<std::size_t>(end - start), -1);
        stamp_.assign(match_.size(), 0);
    }

    // Greedy by weight (ties: earlier deadline, then id); augment per packet.
    Schedule solve() {
        std::vector<int> order(packets_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return heavier_first(packets_[static_cast<std::size_t>(a)],
                                 packets_[static_cast<std::size_t>(b)]);
        });
        for (int idx : order) {
            ++round_;
            augment(idx);
        }
        Schedule sched;
        for (std::size_t s = 0; s < match_.size(); ++s) {
            if (match_[s] < 0) continue;
            const Packet& p = packets_[static_cast<std::size_t>(match_[s])];
            sched.assignments.push_back({start_ + static_cast<Step>(s), p.id, p.weight});
            sched.gain += p.weight;
        }
        return sched;
    }

private:
    bool augment(int pkt) {
        const Packet& p = packets_[static_cast<std::size_t>(pkt)];
        Step lo = std::max(p.release, start_);
        for (Step t = lo; t < p.deadline; ++t) {
            auto s = static_cast<std::size_t>(t - start_);
            if (s >= match_.size()) break;
            if (stamp_[s] == round_) continue;
            stamp_[s] = round_;
            if (match_[s] < 0 || augment(match_[s])) {
                match_[s] = pkt;
                return true;
            }
        }
        return false;
    }

    std::vector<Packet> packets_;
    Step start_;
    std::vector<int> match_;
    std::vector<std::uint32_t> stamp_;
    std::uint32_t round_ = 0;
};

}  // namespace detail

// Maximum-weight schedule of the given packets over slots [start, horizon).
inline Schedule opt_schedule(std::span<const Packet> packets, Step start) {
    Step end = start;
    for (const Packet& p : packets) end = std::max(end, p.deadline);
    detail::SlotMatcher matcher(packets, start, end);
    return matcher.solve();
}

inline Schedule opt_schedule(const Trace& trace) {
    validate_trace(trace);
    auto packets = trace_packets(trace);
    return opt_schedule(packets, 0);
}

// Exhaustive oracle: every per-step choice (each pending packet or idle) is
// explored, with a (step, used-set) memo. Kept independent of the matching
// path above.
inline double brute_force_opt(const Trace& trace) {
    validate_trace(trace);
    auto packets = trace_packets(trace);
    const Step horizon = trace.horizon();
    if (packets.size() > 12)
        throw InputError("brute_force_opt: more than 12 packets");
    if (horizon > 8)
        throw InputError("brute_force_opt: horizon exceeds 8 steps");

    const int n = static_cast<int>(packets.size());
    const std::size_t masks = std::size_t{1} << n;
    const auto states = static_cast<std::size_t>(horizon + 1) * masks;
    std::vector<double> memo(states, 0.0);
    std::vector<bool> seen(states, false);

    auto solve = [&](auto&& self, Step t, std::uint32_t used) -> double {
        if (t >= horizon) return 0.0;
        std::size_t key = static_cast<std::size_t>(t) * masks + used;
        if (seen[key]) return memo[key];
        double best = self(self, t + 1, used);  // idle
        for (int i = 0; i < n; ++i) {
            if (used & (1u << i)) continue;
            const Packet& p = packets[static_cast<std::size_t>(i)];
            if (!p.pending_at(t)) continue;
            best = std::max(best, p.weight + self(self, t + 1, used | (1u << i)));
        }
        seen[key] = true;
        memo[key] = best;
        return best;
    };
    return solve(solve, 0, 0);
}

struct Provisional {
    Schedule schedule;
    std::vector<Packet> support_set;  // earliest-deadline and heaviest scheduled packet
};

// Optimal schedule of the current pending set assuming no further
// injections, plus the two-packet support set it induces.
inline Provisional provisional_schedule(std::span<const Packet> pending, Step now) {
    for (const Packet& p : pending) {
        if (!p.pending_at(now))
            throw ContractViolation("provisional schedule: packet " + std::to_string(p.id) +
                                    " not pending at step " + std::to_string(now));
    }
    Provisional result;
    result.schedule = opt_schedule(pending, now);
    if (result.schedule.assignments.empty()) return result;

    std::unordered_map<PacketId, Packet> by_id;
    for (const Packet& p : pending) by_id.emplace(p.id, p);

    const Packet* earliest = nullptr;
    const Packet* heaviest = nullptr;
    for (const auto& a : result.schedule.assignments) {
        const Packet& p = by_id.at(a.id);
        if (!earliest || p.deadline < earliest->deadline ||
            (p.deadline == earliest->deadline &&
             (p.weight > earliest->weight ||
              (p.weight == earliest->weight && p.id < earliest->id))))
            earliest = &p;
        if (!heaviest || heavier_first(p, *heaviest)) heaviest = &p;
    }
    result.support_set.push_back(*earliest);
    if (heaviest->id != earliest->id) result.support_set.push_back(*heaviest);
    return result;
}

}  // namespace pktsched
