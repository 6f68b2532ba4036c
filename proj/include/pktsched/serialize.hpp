// Line-delimited record output (jsonl and a flat csv projection) shared by
// the CLI subcommands. Every emitted stream starts with the full config and
// seed so a run can be replayed byte-for-byte.

#pragma once

#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pktsched/audit.hpp"
#include "pktsched/estimate.hpp"
#include "pktsched/offline_opt.hpp"

namespace pktsched {

using nlohmann::json;

inline json chain_to_json(const Chain& chain) {
    json j;
    j["m"] = chain.length();
    j["n"] = chain.support;
    auto w = json::array(), d = json::array(), p = json::array();
    for (int i = 0; i < chain.length(); ++i) {
        w.push_back(chain.items[static_cast<std::size_t>(i)].weight);
        d.push_back(chain.items[static_cast<std::size_t>(i)].deadline);
        p.push_back(chain.probs[static_cast<std::size_t>(i)]);
    }
    j["w"] = std::move(w);
    j["d"] = std::move(d);
    j["p"] = std::move(p);
    return j;
}

inline json step_record_to_json(const StepRecord& rec) {
    json j;
    j["type"] = "step";
    j["t"] = rec.t;
    j["f"] = rec.alg_index;
    j["alg_gain"] = rec.alg_gain;
    if (rec.adv_index > 0) {
        j["z"] = rec.adv_index;
        j["adv_amortized"] = rec.adv_amortized;
    }
    j["adv_gain"] = rec.adv_gain;
    j["chain"] = chain_to_json(rec.chain);
    return j;
}

inline json game_result_to_json(const GameResult& res) {
    json j;
    j["type"] = "result";
    j["alg_gain"] = res.alg_gain;
    j["adv_gain"] = res.adv_gain;
    j["main_steps"] = res.main_steps;
    j["drain_steps"] = res.drain_steps;
    j["track_N"] = res.track_n;
    j["audited_steps"] = res.audited_steps;
    return j;
}

inline json ratio_estimate_to_json(const RatioEstimate& est) {
    json j;
    j["type"] = "ratio_estimate";
    j["ratio"] = est.ratio;
    j["std_error"] = est.std_error;
    j["alg_gain_total"] = est.alg_total;
    j["adv_gain_total"] = est.adv_total;
    j["runs"] = est.runs;
    j["base_seed"] = est.base_seed;
    j["track_N"] = est.track_n;
    j["bound_at_track_N"] = est.bound_at_track_n;
    j["audited_steps"] = est.audited_steps;
    auto seeds = json::array();
    for (const auto& r : est.per_run) seeds.push_back(r.seed);
    j["run_seeds"] = std::move(seeds);
    return j;
}

// --- csv projections -------------------------------------------------------

inline std::string csv_step_header() { return "t,f,alg_gain,z,adv_amortized,adv_gain,m,n"; }

inline std::string step_record_to_csv(const StepRecord& rec) {
    std::ostringstream os;
    os.precision(17);
    os << rec.t << ',' << rec.alg_index << ',' << rec.alg_gain << ',' << rec.adv_index << ','
       << rec.adv_amortized << ',' << rec.adv_gain << ',' << rec.chain.length() << ','
       << rec.chain.support;
    return os.str();
}

inline std::string csv_ratio_header() {
    return "ratio,std_error,alg_gain_total,adv_gain_total,runs,base_seed,track_N,bound_at_track_N";
}

inline std::string ratio_estimate_to_csv(const RatioEstimate& est) {
    std::ostringstream os;
    os.precision(17);
    os << est.ratio << ',' << est.std_error << ',' << est.alg_total << ',' << est.adv_total << ','
       << est.runs << ',' << est.base_seed << ',' << est.track_n << ',' << est.bound_at_track_n;
    return os.str();
}

inline void write_schedule(const Schedule& sched, std::ostream& out) {
    for (const auto& a : sched.assignments) {
        json j;
        j["t"] = a.t;
        j["id"] = std::to_string(a.id);
        j["w"] = a.weight;
        out << j.dump() << "\n";
    }
    json tail;
    tail["gain"] = sched.gain;
    out << tail.dump() << "\n";
}

}  // namespace pktsched
