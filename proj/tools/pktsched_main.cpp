// pktsched: simulator and analysis driver for online packet scheduling with
// deadlines.
//
// Subcommands:
//   run         play one game (oblivious trace or adaptive strategy), stream records
//   ratio       Monte Carlo competitive-ratio estimate over seeded runs
//   verify      per-step audits + buffer-sync referee; nonzero exit on violation
//   lowerbound  geometric-strategy sweep: empirical ratio vs analytic bound per N
//   opt         offline optimum schedule of a trace
//   gen         write a random trace (s-uniform / s-bounded / two-weight / agreeable)
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 audit/contract violation.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pktsched/adversary.hpp"
#include "pktsched/audit.hpp"
#include "pktsched/estimate.hpp"
#include "pktsched/game.hpp"
#include "pktsched/offline_opt.hpp"
#include "pktsched/serialize.hpp"
#include "pktsched/trace.hpp"

namespace {

using namespace pktsched;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitViolation = 3;

struct CommonOpts {
    std::string alg = "mixr";
    std::string adversary;   // e.g. geometric:n=1,a=2,k=auto,mode=queue
    std::string gen;         // e.g. sbounded:s=3,steps=200,rate=2,wmin=0.5,wmax=10
    std::string trace_path;
    std::string out_path;
    std::string format = "jsonl";
    Step T = 100000;
    int runs = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

AlgorithmKind parse_alg(const std::string& name) {
    if (name == "mixr") return AlgorithmKind::mixr;
    if (name == "greedy") return AlgorithmKind::greedy;
    throw CLI::ValidationError("--alg", "unknown algorithm '" + name + "' (mixr|greedy)");
}

// "name:k1=v1,k2=v2" -> (name, {k1:v1, k2:v2})
std::pair<std::string, std::map<std::string, std::string>> parse_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::map<std::string, std::string> kv;
    if (colon != std::string::npos) {
        std::stringstream rest(spec.substr(colon + 1));
        std::string item;
        while (std::getline(rest, item, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw InputError("malformed option '" + item + "' in spec '" + spec + "'");
            kv[item.substr(0, eq)] = item.substr(eq + 1);
        }
    }
    return {name, kv};
}

template <typename T>
T parse_number(const std::map<std::string, std::string>& kv, const std::string& key, T fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::istringstream is(it->second);
    T value{};
    if (!(is >> value) || !is.eof())
        throw InputError("bad value '" + it->second + "' for " + key);
    return value;
}

GeometricConfig parse_geometric(const std::map<std::string, std::string>& kv, Step T) {
    GeometricConfig cfg;
    cfg.n = parse_number<int>(kv, "n", 1);
    cfg.a = parse_number<double>(kv, "a", 0.0);
    cfg.horizon = T;
    if (auto it = kv.find("k"); it != kv.end() && it->second != "auto")
        cfg.k = parse_number<int>(kv, "k", -1);
    if (auto it = kv.find("mode"); it != kv.end()) {
        if (it->second == "queue") cfg.mode = GeometricMode::queue;
        else if (it->second == "packet") cfg.mode = GeometricMode::packet_emulation;
        else throw InputError("geometric mode must be 'queue' or 'packet'");
    }
    return cfg;
}

StrategyFactory make_strategy_factory(const std::string& spec, Step T) {
    auto [name, kv] = parse_spec(spec);
    if (name == "geometric") {
        GeometricConfig cfg = parse_geometric(kv, T);
        return [cfg] { return std::make_unique<GeometricQueueStrategy>(cfg); };
    }
    throw InputError("unknown adversary '" + name + "'");
}

GenParams parse_gen(const std::string& spec) {
    auto [name, kv] = parse_spec(spec);
    GenParams params;
    if (name == "suniform") params.kind = TraceKind::s_uniform;
    else if (name == "sbounded") params.kind = TraceKind::s_bounded;
    else if (name == "twoweight") params.kind = TraceKind::two_weight;
    else if (name == "agreeable") params.kind = TraceKind::agreeable;
    else throw InputError("unknown generator '" + name + "'");
    params.steps = parse_number<Step>(kv, "steps", params.steps);
    params.rate = parse_number<double>(kv, "rate", params.rate);
    params.s = parse_number<Step>(kv, "s", params.s);
    params.wmin = parse_number<double>(kv, "wmin", params.wmin);
    params.wmax = parse_number<double>(kv, "wmax", params.wmax);
    validate_gen_params(params);
    return params;
}

Trace load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trace file '" + path + "'");
    return load_trace(in);
}

class OutputSink {
public:
    OutputSink(const std::string& path, const std::string& format) : format_(format) {
        if (format != "jsonl" && format != "csv")
            throw InputError("format must be jsonl or csv");
        if (!path.empty()) {
            file_.open(path, std::ios::trunc);
            if (!file_) throw InputError("cannot open output file '" + path + "'");
        }
    }

    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
    bool csv() const { return format_ == "csv"; }

    // Config header: a json line, or a '#'-prefixed comment line in csv.
    void write_config(const json& config) {
        if (csv()) stream() << "# config " << config.dump() << "\n";
        else stream() << config.dump() << "\n";
    }

private:
    std::string format_;
    std::ofstream file_;
};

json config_json(const std::string& cmd, const CommonOpts& opts) {
    json j;
    j["type"] = "config";
    j["cmd"] = cmd;
    j["alg"] = opts.alg;
    if (!opts.adversary.empty()) j["adversary"] = opts.adversary;
    if (!opts.gen.empty()) j["gen"] = opts.gen;
    if (!opts.trace_path.empty()) j["trace"] = opts.trace_path;
    j["T"] = opts.T;
    j["runs"] = opts.runs;
    j["seed"] = opts.seed;
    j["format"] = opts.format;
    j["rng"] = kRngName;
    return j;
}

void resolve_seed(CommonOpts& opts) {
    if (!opts.seed_set) {
        std::random_device rd;
        opts.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        std::cerr << "seed not given; using " << opts.seed << "\n";
    }
}

// Streams every step record into the sink.
class RecordWriter final : public StepObserver {
public:
    explicit RecordWriter(OutputSink& sink) : sink_(sink) {
        if (sink_.csv()) sink_.stream() << csv_step_header() << "\n";
    }
    void on_step(const StepRecord& rec) override {
        if (sink_.csv()) sink_.stream() << step_record_to_csv(rec) << "\n";
        else sink_.stream() << step_record_to_json(rec).dump() << "\n";
    }

private:
    OutputSink& sink_;
};

Trace trace_for_opts(const CommonOpts& opts, std::uint64_t seed) {
    if (!opts.trace_path.empty()) return load_trace_file(opts.trace_path);
    if (!opts.gen.empty()) {
        RunRng rng(seed);
        return generate(parse_gen(opts.gen), rng);
    }
    throw InputError("need --trace or --gen for an oblivious opponent");
}

int cmd_run(CommonOpts& opts) {
    resolve_seed(opts);
    AlgorithmKind alg = parse_alg(opts.alg);
    OutputSink sink(opts.out_path, opts.format);
    sink.write_config(config_json("run", opts));
    RecordWriter writer(sink);
    GameOptions game_opts;
    game_opts.observer = &writer;

    GameResult result;
    json tail = json::object();
    if (!opts.adversary.empty()) {
        auto factory = make_strategy_factory(opts.adversary, opts.T);
        auto strategy = factory();
        game_opts.referee = alg == AlgorithmKind::mixr;
        RunRng rng(opts.seed);
        result = play_adaptive(alg, *strategy, opts.T, rng, game_opts);
    } else {
        Trace trace = trace_for_opts(opts, opts.seed);
        RunRng rng(opts.seed);
        result = simulate_trace(alg, trace, rng, game_opts);
        tail["opt_gain"] = opt_schedule(trace).gain;
    }
    json res = game_result_to_json(result);
    res.update(tail);
    if (sink.csv()) sink.stream() << "# " << res.dump() << "\n";
    else sink.stream() << res.dump() << "\n";
    return 0;
}

int cmd_ratio(CommonOpts& opts) {
    resolve_seed(opts);
    AlgorithmKind alg = parse_alg(opts.alg);
    OutputSink sink(opts.out_path, opts.format);
    sink.write_config(config_json("ratio", opts));

    RatioEstimate est;
    if (!opts.adversary.empty()) {
        auto factory = make_strategy_factory(opts.adversary, opts.T);
        est = estimate_ratio(alg, factory, opts.T, opts.runs, opts.seed);
    } else {
        Trace trace = trace_for_opts(opts, opts.seed);
        est = estimate_ratio(alg, trace, opts.runs, opts.seed);
    }
    if (sink.csv())
        sink.stream() << csv_ratio_header() << "\n" << ratio_estimate_to_csv(est) << "\n";
    else
        sink.stream() << ratio_estimate_to_json(est).dump() << "\n";
    return 0;
}

int cmd_verify(CommonOpts& opts, double fault_p1) {
    resolve_seed(opts);
    OutputSink sink(opts.out_path, opts.format);
    sink.write_config(config_json("verify", opts));
    GameOptions game_opts;
    game_opts.audit = true;
    game_opts.audit_fault_p1 = fault_p1;

    std::uint64_t audited = 0;
    try {
        for (int i = 0; i < opts.runs; ++i) {
            std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(i);
            RunRng rng(seed);
            if (!opts.adversary.empty()) {
                auto strategy = make_strategy_factory(opts.adversary, opts.T)();
                game_opts.referee = true;
                audited += play_adaptive(AlgorithmKind::mixr, *strategy, opts.T, rng, game_opts)
                               .audited_steps;
            } else {
                Trace trace = trace_for_opts(opts, seed);
                audited += simulate_trace(AlgorithmKind::mixr, trace, rng, game_opts).audited_steps;
            }
        }
    } catch (const AuditError& e) {
        json violation{{"type", "audit_violation"}, {"what", e.what()}, {"seed", opts.seed}};
        sink.stream() << violation.dump() << "\n";
        return kExitViolation;
    } catch (const RefereeError& e) {
        json violation{{"type", "referee_violation"}, {"what", e.what()}, {"seed", opts.seed}};
        sink.stream() << violation.dump() << "\n";
        return kExitViolation;
    }
    json summary{{"type", "verify_summary"},
                 {"audited_steps", audited},
                 {"violations", 0},
                 {"runs", opts.runs}};
    sink.stream() << summary.dump() << "\n";
    return 0;
}

int cmd_lowerbound(CommonOpts& opts, std::vector<int>& n_values) {
    resolve_seed(opts);
    OutputSink sink(opts.out_path, opts.format);
    sink.write_config(config_json("lowerbound", opts));
    if (sink.csv()) sink.stream() << "N,empirical_ratio,std_error,analytic_bound\n";
    for (int n_max : n_values) {
        if (n_max < 2) throw InputError("lowerbound: N must be >= 2");
        GeometricConfig cfg;
        cfg.n = n_max - 1;
        cfg.horizon = opts.T;
        auto factory = [cfg] { return std::make_unique<GeometricQueueStrategy>(cfg); };
        RatioEstimate est =
            estimate_ratio(AlgorithmKind::mixr, factory, opts.T, opts.runs, opts.seed);
        double bound = ratio_bound(n_max);
        if (sink.csv()) {
            sink.stream() << n_max << ',' << est.ratio << ',' << est.std_error << ',' << bound
                          << "\n";
        } else {
            json row{{"type", "lowerbound_row"},
                     {"N", n_max},
                     {"empirical_ratio", est.ratio},
                     {"std_error", est.std_error},
                     {"analytic_bound", bound},
                     {"track_N", est.track_n}};
            sink.stream() << row.dump() << "\n";
        }
    }
    return 0;
}

int cmd_opt(CommonOpts& opts) {
    Trace trace = load_trace_file(opts.trace_path);
    OutputSink sink(opts.out_path, "jsonl");
    write_schedule(opt_schedule(trace), sink.stream());
    return 0;
}

int cmd_gen(CommonOpts& opts) {
    resolve_seed(opts);
    GenParams params = parse_gen(opts.gen);
    RunRng rng(opts.seed);
    Trace trace = generate(params, rng);
    if (opts.out_path.empty()) {
        save_trace(trace, std::cout);
    } else {
        std::ofstream out(opts.out_path, std::ios::trunc);
        if (!out) throw InputError("cannot open output file '" + opts.out_path + "'");
        save_trace(trace, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online packet scheduling with deadlines: simulator and analysis harness"};
    app.require_subcommand(1);

    CommonOpts opts;
    double fault_p1 = 0.0;
    std::vector<int> n_values{2, 3, 5, 10};

    auto add_common = [&](CLI::App* cmd, bool with_opponent = true) {
        cmd->add_option("--seed", opts.seed, "base seed (64-bit); random if omitted")
            ->each([&](const std::string&) { opts.seed_set = true; });
        cmd->add_option("--out", opts.out_path, "output path (default stdout)");
        cmd->add_option("--format", opts.format, "jsonl|csv")->capture_default_str();
        if (with_opponent) {
            cmd->add_option("--alg", opts.alg, "mixr|greedy")->capture_default_str();
            cmd->add_option("--adversary", opts.adversary,
                            "adaptive opponent, e.g. geometric:n=1,a=2,k=auto,mode=queue");
            cmd->add_option("--gen", opts.gen,
                            "trace generator, e.g. sbounded:s=3,steps=200,rate=2");
            cmd->add_option("--trace", opts.trace_path, "trace file (jsonl)");
            cmd->add_option("--T", opts.T, "adaptive main-phase steps")->capture_default_str();
            cmd->add_option("--runs", opts.runs, "independent runs")->capture_default_str();
        }
    };

    auto* run = app.add_subcommand("run", "play one game and stream step records");
    add_common(run);
    auto* ratio = app.add_subcommand("ratio", "estimate the competitive ratio");
    add_common(ratio);
    auto* verify = app.add_subcommand("verify", "audit every step; nonzero exit on violation");
    add_common(verify);
    verify->add_option("--corrupt", fault_p1,
                       "fault injection: offset added to p1 before auditing (negative control)");
    auto* lowerbound = app.add_subcommand("lowerbound", "empirical vs analytic bound per N");
    add_common(lowerbound);
    lowerbound->add_option("--N", n_values, "support sizes to sweep")->delimiter(',');
    auto* opt = app.add_subcommand("opt", "offline optimum schedule of a trace");
    opt->add_option("--trace", opts.trace_path, "trace file (jsonl)")->required();
    opt->add_option("--out", opts.out_path, "output path (default stdout)");
    auto* gen = app.add_subcommand("gen", "generate a random trace");
    add_common(gen, false);
    gen->add_option("--gen", opts.gen, "generator spec")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(opts);
        if (ratio->parsed()) return cmd_ratio(opts);
        if (verify->parsed()) return cmd_verify(opts, fault_p1);
        if (lowerbound->parsed()) return cmd_lowerbound(opts, n_values);
        if (opt->parsed()) return cmd_opt(opts);
        if (gen->parsed()) return cmd_gen(opts);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const AuditError& e) {
        std::cerr << "audit violation: " << e.what() << "\n";
        return kExitViolation;
    } catch (const RefereeError& e) {
        std::cerr << "referee violation: " << e.what() << "\n";
        return kExitViolation;
    } catch (const ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return kExitViolation;
    }
}
