#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = PKTSCHED_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("pktsched_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
    std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

void write_gadget_trace(const std::string& path) {
    std::ofstream out(path);
    out << R"({"t": 0, "inject": [{"w": 3.0, "l": 1}, {"w": 2.0, "l": 2}]})" << "\n"
        << R"({"t": 1, "inject": [{"w": 1.0, "l": 1}]})" << "\n";
}

}  // namespace

TEST_CASE("run on a trace emits config, steps, and a result with OPT") {
    TempDir tmp;
    write_gadget_trace(tmp.file("t.jsonl"));
    std::string out = tmp.file("run.jsonl");
    REQUIRE(run_cli("run --alg mixr --trace " + tmp.file("t.jsonl") + " --seed 7 --out " + out) == 0);

    auto records = read_jsonl(out);
    REQUIRE(records.size() >= 3);
    CHECK(records.front().at("type") == "config");
    CHECK(records.front().at("seed") == 7);
    CHECK(records.back().at("type") == "result");
    CHECK(records.back().at("opt_gain") == 5.0);
    double alg_gain = records.back().at("alg_gain");
    CHECK(alg_gain > 0.0);
    CHECK(alg_gain <= 5.0);
}

TEST_CASE("greedy runs are deterministic across repeats") {
    TempDir tmp;
    write_gadget_trace(tmp.file("t.jsonl"));
    std::string out1 = tmp.file("a.jsonl"), out2 = tmp.file("b.jsonl");
    REQUIRE(run_cli("run --alg greedy --trace " + tmp.file("t.jsonl") + " --seed 1 --out " + out1) == 0);
    REQUIRE(run_cli("run --alg greedy --trace " + tmp.file("t.jsonl") + " --seed 1 --out " + out2) == 0);
    CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("adaptive run against the geometric strategy") {
    TempDir tmp;
    std::string out = tmp.file("adaptive.jsonl");
    REQUIRE(run_cli("run --alg mixr --adversary geometric:n=1 --T 500 --seed 3 --out " + out) == 0);
    auto records = read_jsonl(out);
    CHECK(records.back().at("type") == "result");
    CHECK(records.back().at("track_N") == 2);
    CHECK(records.back().at("adv_gain").get<double>() > 0.0);
}

TEST_CASE("same seed reproduces output byte-for-byte") {
    TempDir tmp;
    std::string out1 = tmp.file("r1.jsonl"), out2 = tmp.file("r2.jsonl");
    std::string args = "ratio --alg mixr --gen sbounded:s=2,steps=80,rate=2 --runs 4 --seed 99";
    REQUIRE(run_cli(args + " --out " + out1) == 0);
    REQUIRE(run_cli(args + " --out " + out2) == 0);
    std::string body1 = slurp(out1), body2 = slurp(out2);
    CHECK(body1 == body2);
    CHECK(!body1.empty());
}

TEST_CASE("ratio reports estimate fields") {
    TempDir tmp;
    std::string out = tmp.file("ratio.jsonl");
    REQUIRE(run_cli("ratio --alg mixr --adversary geometric:n=1 --T 2000 --runs 4 --seed 5 --out " +
                    out) == 0);
    auto records = read_jsonl(out);
    REQUIRE(records.size() == 2);
    const json& est = records[1];
    CHECK(est.at("type") == "ratio_estimate");
    CHECK(est.at("track_N") == 2);
    CHECK(est.at("bound_at_track_N").get<double>() == Catch::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(est.at("ratio").get<double>() == Catch::Approx(4.0 / 3.0).epsilon(0.05));
    CHECK(est.at("run_seeds").size() == 4);
}

TEST_CASE("csv output is a flat projection with a config comment") {
    TempDir tmp;
    std::string out = tmp.file("ratio.csv");
    REQUIRE(run_cli("ratio --alg mixr --adversary geometric:n=1 --T 1000 --runs 2 --seed 5 "
                    "--format csv --out " + out) == 0);
    std::string body = slurp(out);
    CHECK(body.rfind("# config ", 0) == 0);
    CHECK(body.find("ratio,std_error") != std::string::npos);
}

TEST_CASE("verify passes clean runs and fails corrupted distributions") {
    TempDir tmp;
    CHECK(run_cli("verify --adversary geometric:n=2 --T 2000 --seed 11 --out " +
                  tmp.file("v1.jsonl")) == 0);
    CHECK(run_cli("verify --gen sbounded:s=3,steps=100,rate=2 --runs 2 --seed 11 --out " +
                  tmp.file("v2.jsonl")) == 0);
    // negative control: a deliberately corrupted distribution must be caught
    CHECK(run_cli("verify --gen sbounded:s=3,steps=100,rate=2 --seed 11 --corrupt 0.1 --out " +
                  tmp.file("v3.jsonl")) == 3);
    auto records = read_jsonl(tmp.file("v3.jsonl"));
    CHECK(records.back().at("type") == "audit_violation");
}

TEST_CASE("verify on an empty trace audits zero steps and succeeds") {
    TempDir tmp;
    std::ofstream(tmp.file("empty.jsonl")).close();
    CHECK(run_cli("verify --trace " + tmp.file("empty.jsonl") + " --seed 2 --out " +
                  tmp.file("v.jsonl")) == 0);
    auto records = read_jsonl(tmp.file("v.jsonl"));
    CHECK(records.back().at("audited_steps") == 0);
}

TEST_CASE("lowerbound sweep tabulates empirical vs analytic values") {
    TempDir tmp;
    std::string out = tmp.file("lb.jsonl");
    REQUIRE(run_cli("lowerbound --N 2,3 --T 4000 --runs 2 --seed 13 --out " + out) == 0);
    auto records = read_jsonl(out);
    REQUIRE(records.size() == 3);
    CHECK(records[1].at("N") == 2);
    CHECK(records[1].at("analytic_bound").get<double>() == Catch::Approx(4.0 / 3.0).epsilon(1e-9));
    CHECK(records[2].at("N") == 3);
    CHECK(records[2].at("analytic_bound").get<double>() == Catch::Approx(27.0 / 19.0).epsilon(1e-9));
    for (std::size_t i = 1; i < records.size(); ++i) {
        double emp = records[i].at("empirical_ratio");
        double bound = records[i].at("analytic_bound");
        CHECK(std::abs(emp - bound) / bound < 0.05);
    }
}

TEST_CASE("opt writes the schedule lines and the final gain") {
    TempDir tmp;
    write_gadget_trace(tmp.file("t.jsonl"));
    std::string out = tmp.file("opt.jsonl");
    REQUIRE(run_cli("opt --trace " + tmp.file("t.jsonl") + " --out " + out) == 0);
    auto records = read_jsonl(out);
    REQUIRE(records.size() == 3);
    CHECK(records[0].at("t") == 0);
    CHECK(records[0].at("id").is_string());
    CHECK(records[0].at("w") == 3.0);
    CHECK(records[1].at("w") == 2.0);
    CHECK(records.back().at("gain") == 5.0);
}

TEST_CASE("gen emits traces that reload cleanly") {
    TempDir tmp;
    std::string out = tmp.file("gen.jsonl");
    REQUIRE(run_cli("gen --gen suniform:s=2,steps=40,rate=1.5 --seed 17 --out " + out) == 0);
    std::string body = slurp(out);
    CHECK(!body.empty());
    REQUIRE(run_cli("opt --trace " + out + " --out " + tmp.file("opt.jsonl")) == 0);
}

TEST_CASE("exit codes: usage 1, input error 2, violation 3") {
    TempDir tmp;
    CHECK(run_cli("run --alg nope --T 5 --adversary geometric:n=1 --seed 1") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("run --alg mixr --trace /nonexistent/x.jsonl --seed 1") == 2);
    std::ofstream bad(tmp.file("bad.jsonl"));
    bad << "{\"t\": 0, \"inject\": [{\"w\": -1.0, \"l\": 1}]}\n";
    bad.close();
    CHECK(run_cli("run --alg mixr --trace " + tmp.file("bad.jsonl") + " --seed 1") == 2);
    CHECK(run_cli("verify --adversary geometric:n=1 --T 500 --seed 1 --corrupt 0.2") == 3);
}
