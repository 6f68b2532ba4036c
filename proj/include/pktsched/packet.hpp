// Packet and buffer model for slotted-time scheduling with deadlines.
//
// Time is divided into unit steps. In step t a player may transmit one
// pending packet; at the boundary to t+1 packets whose absolute deadline
// equals t+1 expire, then new packets (released at t+1) are injected.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace pktsched {

using Step = std::int64_t;
using PacketId = std::uint64_t;

// A caller broke an API precondition. This is a bug in the caller, not bad input.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed or out-of-range external input (files, CLI parameters).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Weighted unit job. Transmittable in steps t with release <= t < deadline.
struct Packet {
    PacketId id = 0;
    double weight = 0.0;
    Step release = 0;
    Step deadline = 0;  // absolute; the packet expires when time reaches it

    Step lifespan() const { return deadline - release; }
    Step relative_deadline(Step now) const { return deadline - now; }
    bool pending_at(Step now) const { return release <= now && now < deadline; }

    bool same_value(const Packet& o) const {
        return weight == o.weight && deadline == o.deadline;
    }
};

inline void validate_packet(const Packet& p) {
    if (!(p.weight > 0.0))
        throw ContractViolation("packet weight must be positive (id " + std::to_string(p.id) + ")");
    if (p.deadline <= p.release)
        throw ContractViolation("packet lifespan must be >= 1 (id " + std::to_string(p.id) + ")");
}

// a is dominated by b: b is at least as heavy and expires no later.
inline bool is_dominated(const Packet& a, const Packet& b) {
    return a.weight <= b.weight && a.deadline >= b.deadline;
}

// Strict when one of the two comparisons is strict.
inline bool is_strictly_dominated(const Packet& a, const Packet& b) {
    return is_dominated(a, b) && (a.weight < b.weight || a.deadline > b.deadline);
}

// Preference order for "heaviest" picks: max weight, then earliest deadline,
// then lowest id. A maximal packet under this order is never strictly
// dominated, and the deadline tie-break keeps chains deterministic.
inline bool heavier_first(const Packet& a, const Packet& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.deadline != b.deadline) return a.deadline < b.deadline;
    return a.id < b.id;
}

inline bool id_less(const Packet& a, const Packet& b) { return a.id < b.id; }

// Pending-packet store for one player.
//
// Packets are bucketed by absolute deadline so a step boundary costs
// O(expiring + injected) even when the buffer grows with the horizon
// (adversary buffers in long games do). Each bucket keeps a weight multiset
// so strict-dominance queries cost O(distinct deadlines).
class Buffer {
public:
    Buffer() = default;
    explicit Buffer(Step start) : now_(start) {}

    Step current_step() const { return now_; }
    std::size_t size() const { return by_id_.size(); }
    bool empty() const { return by_id_.empty(); }

    bool contains(PacketId id) const { return by_id_.count(id) != 0; }

    const Packet* find(PacketId id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &it->second;
    }

    void insert(const Packet& p) {
        validate_packet(p);
        if (!p.pending_at(now_))
            throw ContractViolation("packet " + std::to_string(p.id) +
                                    " not live at step " + std::to_string(now_));
        if (!by_id_.emplace(p.id, p).second)
            throw ContractViolation("duplicate packet id " + std::to_string(p.id));
        auto& bucket = by_deadline_[p.deadline];
        bucket.ids.insert(p.id);
        bucket.weights.insert(p.weight);
    }

    // Removes and returns a pending packet; hard error if absent.
    Packet take(PacketId id) {
        auto it = by_id_.find(id);
        if (it == by_id_.end())
            throw ContractViolation("packet " + std::to_string(id) +
                                    " is not pending at step " + std::to_string(now_));
        Packet p = it->second;
        by_id_.erase(it);
        detach_from_bucket(p);
        return p;
    }

    // Removes if present; returns the packet when it was.
    std::optional<Packet> erase_if_present(PacketId id) {
        if (!contains(id)) return std::nullopt;
        return take(id);
    }

    // Snapshot of the pending set sorted by id.
    std::vector<Packet> pending() const {
        std::vector<Packet> out;
        out.reserve(by_id_.size());
        for (const auto& [_, p] : by_id_) out.push_back(p);
        std::sort(out.begin(), out.end(), id_less);
        return out;
    }

    // Is x strictly dominated by some pending packet? Scans deadline buckets
    // up to x.deadline, so cheap whenever distinct deadlines are few.
    bool strictly_dominates_any(const Packet& x) const {
        for (auto it = by_deadline_.begin(); it != by_deadline_.end(); ++it) {
            if (it->first > x.deadline) break;
            if (it->second.weights.empty()) continue;
            double max_w = *it->second.weights.rbegin();
            if (it->first < x.deadline ? max_w >= x.weight : max_w > x.weight) return true;
        }
        return false;
    }

    // Earliest-deadline pending packet (lowest id within the bucket).
    std::optional<Packet> earliest_deadline() const {
        if (by_deadline_.empty()) return std::nullopt;
        const auto& bucket = by_deadline_.begin()->second;
        return *find(*bucket.ids.begin());
    }

    // One step boundary: advance time, expire, inject. Transmissions must
    // already have been taken out via take(). Returns expired packets
    // sorted by id.
    std::vector<Packet> advance(std::span<const Packet> injections) {
        ++now_;
        std::vector<Packet> expired;
        while (!by_deadline_.empty() && by_deadline_.begin()->first <= now_) {
            for (PacketId id : by_deadline_.begin()->second.ids) {
                auto it = by_id_.find(id);
                expired.push_back(it->second);
                by_id_.erase(it);
            }
            by_deadline_.erase(by_deadline_.begin());
        }
        std::sort(expired.begin(), expired.end(), id_less);
        for (const Packet& p : injections) {
            if (p.release != now_)
                throw ContractViolation("injection release " + std::to_string(p.release) +
                                        " != new step " + std::to_string(now_));
            insert(p);
        }
        return expired;
    }

    void check_invariants() const {
        for (const auto& [_, p] : by_id_) {
            if (!p.pending_at(now_))
                throw ContractViolation("buffer holds non-pending packet " + std::to_string(p.id));
        }
    }

private:
    struct Bucket {
        std::set<PacketId> ids;
        std::multiset<double> weights;
    };

    void detach_from_bucket(const Packet& p) {
        auto bit = by_deadline_.find(p.deadline);
        bit->second.ids.erase(p.id);
        bit->second.weights.erase(bit->second.weights.find(p.weight));
        if (bit->second.ids.empty()) by_deadline_.erase(bit);
    }

    Step now_ = 0;
    std::unordered_map<PacketId, Packet> by_id_;
    std::map<Step, Bucket> by_deadline_;
};

// The single-step transition named in the model: remove the transmitted
// packet (if any), advance time, expire, inject. Returns the expired packets.
inline std::vector<Packet> advance(Buffer& buffer, std::optional<PacketId> transmitted,
                                   std::span<const Packet> injections) {
    if (transmitted) buffer.take(*transmitted);
    return buffer.advance(injections);
}

}  // namespace pktsched
