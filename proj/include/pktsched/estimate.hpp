// Monte Carlo competitive-ratio estimation over independent seeded runs.
//
// The ratio is computed as the ratio of summed gains across runs (the
// expectation-level definition, no additive slack), never as a mean of
// per-run ratios. The standard error comes from the linearized ratio
// estimator: Var(R) ~ sum (adv_i - R alg_i)^2 scaled by the squared total.

#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "pktsched/adversary.hpp"
#include "pktsched/audit.hpp"
#include "pktsched/game.hpp"
#include "pktsched/offline_opt.hpp"

namespace pktsched {

struct RunGains {
    std::uint64_t seed = 0;
    double alg = 0.0;
    double adv = 0.0;
    int track_n = 0;
};

struct RatioEstimate {
    double alg_total = 0.0;
    double adv_total = 0.0;
    double ratio = 0.0;
    double std_error = 0.0;
    int runs = 0;
    std::uint64_t base_seed = 0;
    int track_n = 0;                 // max over runs
    double bound_at_track_n = 0.0;   // ratio_bound(track_n), 0 when track_n == 0
    std::uint64_t audited_steps = 0;
    std::vector<RunGains> per_run;
};

inline RatioEstimate aggregate_ratio(std::vector<RunGains> runs, std::uint64_t base_seed) {
    RatioEstimate est;
    est.per_run = std::move(runs);
    est.runs = static_cast<int>(est.per_run.size());
    est.base_seed = base_seed;
    for (const auto& r : est.per_run) {
        est.alg_total += r.alg;
        est.adv_total += r.adv;
        est.track_n = std::max(est.track_n, r.track_n);
    }
    est.ratio = est.alg_total > 0.0 ? est.adv_total / est.alg_total : 0.0;
    if (est.runs > 1 && est.alg_total > 0.0) {
        double ss = 0.0;
        for (const auto& r : est.per_run) {
            double resid = r.adv - est.ratio * r.alg;
            ss += resid * resid;
        }
        double scale = static_cast<double>(est.runs) / (est.runs - 1.0);
        est.std_error = std::sqrt(scale * ss) / est.alg_total;
    }
    if (est.track_n >= 1) est.bound_at_track_n = ratio_bound(est.track_n);
    return est;
}

using StrategyFactory = std::function<std::unique_ptr<AdversaryStrategy>()>;

// Adaptive opponent: run seeds are base_seed .. base_seed + runs - 1, one
// fresh strategy instance per run.
inline RatioEstimate estimate_ratio(AlgorithmKind alg, const StrategyFactory& make_strategy,
                                    Step T, int runs, std::uint64_t base_seed,
                                    const GameOptions& opts = {}) {
    if (runs < 1) throw ContractViolation("estimate_ratio: runs must be >= 1");
    std::vector<RunGains> gains;
    std::uint64_t audited = 0;
    for (int i = 0; i < runs; ++i) {
        std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        RunRng rng(seed);
        auto strategy = make_strategy();
        GameResult res = play_adaptive(alg, *strategy, T, rng, opts);
        gains.push_back({seed, res.alg_gain, res.adv_gain, res.track_n});
        audited += res.audited_steps;
    }
    auto est = aggregate_ratio(std::move(gains), base_seed);
    est.audited_steps = audited;
    return est;
}

// Oblivious opponent: the offline optimum of the fixed trace.
inline RatioEstimate estimate_ratio(AlgorithmKind alg, const Trace& trace, int runs,
                                    std::uint64_t base_seed, const GameOptions& opts = {}) {
    if (runs < 1) throw ContractViolation("estimate_ratio: runs must be >= 1");
    const double opt_gain = opt_schedule(trace).gain;
    std::vector<RunGains> gains;
    std::uint64_t audited = 0;
    for (int i = 0; i < runs; ++i) {
        std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        RunRng rng(seed);
        GameResult res = simulate_trace(alg, trace, rng, opts);
        gains.push_back({seed, res.alg_gain, opt_gain, res.track_n});
        audited += res.audited_steps;
    }
    auto est = aggregate_ratio(std::move(gains), base_seed);
    est.audited_steps = audited;
    return est;
}

}  // namespace pktsched
