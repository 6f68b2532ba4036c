// Oblivious instance serialization. A trace lists, per step, the packets
// injected at that step as (weight, lifespan) pairs. On disk it is
// line-delimited JSON: {"t": <int>, "inject": [{"w": <float>, "l": <int>}, ...]}

#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pktsched/packet.hpp"

namespace pktsched {

struct Injection {
    double weight = 0.0;
    Step lifespan = 0;
};

struct TraceStep {
    Step t = 0;
    std::vector<Injection> inject;
};

struct Trace {
    std::vector<TraceStep> steps;  // strictly increasing t

    bool empty() const { return steps.empty(); }

    Step last_step() const { return steps.empty() ? -1 : steps.back().t; }

    Step max_lifespan() const {
        Step m = 0;
        for (const auto& s : steps)
            for (const auto& inj : s.inject) m = std::max(m, inj.lifespan);
        return m;
    }

    std::size_t packet_count() const {
        std::size_t n = 0;
        for (const auto& s : steps) n += s.inject.size();
        return n;
    }

    // First step past which nothing can still be pending.
    Step horizon() const { return empty() ? 0 : last_step() + max_lifespan(); }
};

inline void validate_trace(const Trace& trace) {
    Step prev = -1;
    for (const auto& s : trace.steps) {
        if (s.t < 0) throw InputError("trace step index must be non-negative");
        if (s.t <= prev) throw InputError("trace step indices must be strictly increasing");
        prev = s.t;
        for (const auto& inj : s.inject) {
            if (!(inj.weight > 0.0)) throw InputError("trace packet weight must be positive");
            if (inj.lifespan < 1) throw InputError("trace packet lifespan must be >= 1");
        }
    }
}

// Materializes the trace's packets with ids assigned in file order (from 1).
inline std::vector<Packet> trace_packets(const Trace& trace) {
    std::vector<Packet> out;
    PacketId next_id = 1;
    for (const auto& s : trace.steps)
        for (const auto& inj : s.inject)
            out.push_back(Packet{next_id++, inj.weight, s.t, s.t + inj.lifespan});
    return out;
}

inline Trace load_trace(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            TraceStep step;
            step.t = rec.at("t").get<Step>();
            for (const auto& item : rec.at("inject")) {
                Injection inj;
                inj.weight = item.at("w").get<double>();
                inj.lifespan = item.at("l").get<Step>();
                step.inject.push_back(inj);
            }
            trace.steps.push_back(std::move(step));
        } catch (const nlohmann::json::exception& e) {
            throw InputError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        validate_trace(trace);
    } catch (const InputError& e) {
        throw InputError(std::string(e.what()) + " (while validating loaded trace)");
    }
    return trace;
}

inline void save_trace(const Trace& trace, std::ostream& out) {
    for (const auto& s : trace.steps) {
        nlohmann::json rec;
        rec["t"] = s.t;
        auto arr = nlohmann::json::array();
        for (const auto& inj : s.inject) arr.push_back({{"w", inj.weight}, {"l", inj.lifespan}});
        rec["inject"] = std::move(arr);
        out << rec.dump() << "\n";
    }
}

}  // namespace pktsched
