#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"

#include "monoflow/expr.hpp"
#include "monoflow/runner.hpp"
#include "monoflow/serialize.hpp"

using namespace monoflow;
namespace fs = std::filesystem;

namespace {

double eval1(const std::string& text, double u) {
    return scalar_fn_from_expression(text)(u);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("monoflow_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

} // namespace

TEST_CASE("expression parser: arithmetic, precedence, functions") {
    CHECK(eval1("1+2*3", 0.0) == 7.0);
    CHECK(eval1("(1+2)*3", 0.0) == 9.0);
    CHECK(eval1("2^3^2", 0.0) == 512.0); // right associative
    CHECK(eval1("-u^2", 2.0) == -4.0);
    CHECK(eval1("u - -u", 1.5) == 3.0);
    CHECK(eval1("min(u, 2) + max(u, 2)", 5.0) == 7.0);
    CHECK(eval1("exp(0) + log(e)", 0.0) == doctest::Approx(2.0));
    CHECK(eval1("sqrt(abs(-9))", 0.0) == 3.0);
    CHECK(eval1("sign(-3.5)", 0.0) == -1.0);
    CHECK(eval1("2*pi", 0.0) == doctest::Approx(6.283185307179586));
    CHECK(eval1("pow(u, 3)", 2.0) == 8.0);
    CHECK(eval1("1e-3 + 2.5E2", 0.0) == doctest::Approx(250.001));

    CHECK_THROWS_AS(eval1("u +", 0.0), InputError);
    CHECK_THROWS_AS(eval1("frob(u)", 0.0), InputError);
    CHECK_THROWS_AS(eval1("x1", 0.0), InputError); // unknown variable for scalar fns
    CHECK_THROWS_AS(eval1("(u", 0.0), InputError);
    CHECK_THROWS_AS(eval1("u 1", 0.0), InputError);
}

TEST_CASE("field_from_expressions: components, norms, dimension checks") {
    const CoefficientField rot = field_from_expressions(
        2, {"-x2", "x1"}, {{"1", "0"}, {"0", "1"}}, "rot_expr");
    CHECK(rot.drift({1.0, 0.0}) == Vec{0.0, 1.0});
    CHECK(rot.sigma(0, {3.0, 4.0}) == Vec{1.0, 0.0});

    const CoefficientField radial =
        field_from_expressions(2, {"r2*(-x2)", "r2*x1"}, {}, "tangential");
    CHECK(radial.drift({2.0, 0.0}) == Vec{0.0, 8.0});

    const CoefficientField normed = field_from_expressions(1, {"r"}, {}, "abs");
    CHECK(normed.drift({-3.0}) == Vec{3.0});

    CHECK_THROWS_AS(field_from_expressions(2, {"x1"}, {}, "short"), InputError);
    CHECK_THROWS_AS(field_from_expressions(1, {"x2"}, {}, "oob"), InputError);
}

TEST_CASE("runner: config parsing, status codes, atomic output") {
    TempDir tmp;

    // violated assumption surfaces as status 1 (frozen cubic witness)
    RunConfig violated;
    violated.command = "check";
    violated.field_spec = "cubic_blowup";
    violated.domain_spec = {{"low", {-2.0}}, {"high", {2.0}}, {"n_pairs", 256}};
    violated.parameters = {{"assumption", "A_mu_K"}, {"mu", 0.0}, {"K", 1.0}};
    violated.output_path = (tmp.path / "violated.json").string();
    std::ostringstream log;
    CHECK(run(violated, log) == 1);
    CHECK(fs::exists(violated.output_path));
    CHECK_FALSE(fs::exists(violated.output_path + ".tmp")); // rename completed

    // unknown example name: input error -> 2, no output file
    RunConfig unknown = violated;
    unknown.field_spec = "no_such_field";
    unknown.output_path = (tmp.path / "unknown.json").string();
    CHECK(run(unknown, log) == 2);
    CHECK_FALSE(fs::exists(unknown.output_path));

    // constraint violation inside the moments command also maps to 2
    RunConfig bad_exponents;
    bad_exponents.command = "moments";
    bad_exponents.field_spec = "gbm";
    bad_exponents.grid = TimeGrid{0.0, 1.0, 32};
    bad_exponents.replicas = 10;
    bad_exponents.parameters = {{"x", {1.0}}, {"y", {1.001}}, {"mu", 2.0}, {"q", 2.0},
                                {"P", 2.0},   {"Q", 2.0},     {"f", "3"}};
    CHECK(run(bad_exponents, log) == 2);

    // a healthy check run is status 0 and owns a complete JSON document
    RunConfig ok = violated;
    ok.field_spec = "linear_ou";
    ok.parameters = {{"assumption", "A_mu_K"}, {"mu", 0.0}, {"K", 0.0}};
    ok.output_path = (tmp.path / "ok.json").string();
    CHECK(run(ok, log) == 0);
    const auto doc = nlohmann::json::parse(slurp(ok.output_path));
    CHECK(doc.at("command") == "check");
    CHECK(doc.at("results").at("report").at("verdict") == "satisfied_at_level");
    CHECK(doc.contains("timestamp"));
}

TEST_CASE("runner: same seed and different thread counts give identical bytes") {
    TempDir tmp;
    const auto run_with_threads = [&](int threads, const std::string& name) {
        RunConfig cfg;
        cfg.command = "moments";
        cfg.field_spec = "linear_ou";
        cfg.grid = TimeGrid{0.0, 1.0, 64};
        cfg.replicas = 400;
        cfg.master_seed = 99;
        cfg.threads = threads;
        cfg.with_timestamp = false;
        cfg.parameters = {{"x", {1.0}}, {"y", {0.5}}, {"mu", 0.0}, {"q", 1.0},
                          {"P", 3.0},   {"Q", 1.5},   {"f", "0.5"}};
        cfg.output_path = (tmp.path / name).string();
        std::ostringstream log;
        REQUIRE(run(cfg, log) == 0);
        return slurp(cfg.output_path);
    };
    const std::string one = run_with_threads(1, "t1.json");
    const std::string four = run_with_threads(4, "t4.json");
    CHECK(one == four);
    CHECK(one.find("timestamp") == std::string::npos);
}

TEST_CASE("runner: simulate writes the documented CSV") {
    TempDir tmp;
    RunConfig cfg;
    cfg.command = "simulate";
    cfg.field_spec = "linear_ou_2d";
    cfg.grid = TimeGrid{0.0, 0.5, 4};
    cfg.replicas = 2;
    cfg.parameters = {{"points", {{0.1, 0.2}}}, {"times", {0.0}}};
    cfg.output_path = (tmp.path / "traj.csv").string();
    std::ostringstream log;
    CHECK(run(cfg, log) == 0);
    const std::string csv = slurp(cfg.output_path);
    CHECK(csv.rfind("replica,s,x_id,t,x_1,x_2,blown_up,exit_time\n", 0) == 0);
    // 2 replicas x 1 point x 5 grid times + header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("runner: gronwall honours raw CSV dumps and config files") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "gronwall.json";
    const fs::path out_path = tmp.path / "gronwall_out.json";
    const fs::path raw_path = tmp.path / "sups.csv";
    {
        nlohmann::json j;
        j["command"] = "gronwall";
        j["grid"] = {{"t0", 0.0}, {"t1", 1.0}, {"n_steps", 64}};
        j["replicas"] = 50;
        j["master_seed"] = 7;
        j["parameters"] = {{"p", 0.5}, {"dim", 1}};
        j["output"] = {{"path", out_path.string()}, {"raw_csv", raw_path.string()}};
        std::ofstream(cfg_path) << j.dump(2);
    }
    const RunConfig cfg = RunConfig::from_file(cfg_path.string());
    CHECK(cfg.replicas == 50);
    std::ostringstream log;
    CHECK(run(cfg, log) == 0);
    const std::string raw = slurp(raw_path);
    CHECK(raw.rfind("replica,value\n", 0) == 0);
    CHECK(std::count(raw.begin(), raw.end(), '\n') == 51);

    CHECK_THROWS_AS(RunConfig::from_file((tmp.path / "missing.json").string()), InputError);
    std::ofstream(tmp.path / "broken.json") << "{ not json";
    CHECK_THROWS_AS(RunConfig::from_file((tmp.path / "broken.json").string()), InputError);
}

TEST_CASE("runner: holder, delta, and additive commands round-trip") {
    TempDir tmp;
    std::ostringstream log;

    RunConfig holder;
    holder.command = "holder";
    holder.field_spec = "linear_ou";
    holder.grid = TimeGrid{0.0, 1.0, 64};
    holder.replicas = 50;
    holder.parameters = {{"base_x", {1.0}}, {"scales", {0.2, 0.1, 0.05}}, {"q", 3.0}};
    holder.output_path = (tmp.path / "holder.json").string();
    CHECK(run(holder, log) == 0); // descriptive: never a violation status
    const auto hdoc = nlohmann::json::parse(slurp(holder.output_path));
    CHECK(hdoc.at("results").at("holder").at("slope").get<double>() ==
          doctest::Approx(1.0).epsilon(0.02));

    RunConfig delta;
    delta.command = "delta";
    delta.field_spec = "linear_ou_2d";
    delta.grid = TimeGrid{0.0, 0.5, 32};
    delta.replicas = 16;
    delta.parameters = {{"cloud", {{"kind", "cantor_dust"}, {"delta", 1.2619}, {"n_points", 16}}},
                        {"q", 1.5},
                        {"mu", 0.0},
                        {"eval_pairs", 8},
                        {"holdout_pairs", 4}};
    delta.output_path = (tmp.path / "delta.json").string();
    CHECK(run(delta, log) == 0);
    const auto ddoc = nlohmann::json::parse(slurp(delta.output_path));
    CHECK(ddoc.at("results").at("delta").at("blowup_fraction") == 0.0);
    CHECK(ddoc.at("results").at("K").get<double>() < 0.0); // fitted contraction level

    RunConfig decomp;
    decomp.command = "additive";
    decomp.field_spec = "rotation";
    decomp.parameters = {{"mode", "decompose"}, {"x", {1.0, 0.0}}};
    CHECK(run(decomp, log) == 0);

    RunConfig cond;
    cond.command = "additive";
    cond.field_spec = "tangential_cubic";
    cond.domain_spec = {{"low", {-5.0, -5.0}}, {"high", {5.0, 5.0}}, {"n_pairs", 512}};
    cond.parameters = {{"mode", "conditions"}, {"c", 1.0}};
    CHECK(run(cond, log) == 1); // cubic tangential part violates c = 1
}

TEST_CASE("runner: csv format dumps per-replica values for bound checks") {
    TempDir tmp;
    RunConfig cfg;
    cfg.command = "gronwall";
    cfg.grid = TimeGrid{0.0, 1.0, 32};
    cfg.replicas = 20;
    cfg.parameters = {{"p", 0.5}};
    cfg.output_format = "csv";
    cfg.output_path = (tmp.path / "sups.csv").string();
    std::ostringstream log;
    CHECK(run(cfg, log) == 0);
    const std::string csv = slurp(cfg.output_path);
    CHECK(csv.rfind("replica,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);

    // csv is rejected where no per-replica statistic exists
    RunConfig check_cfg;
    check_cfg.command = "check";
    check_cfg.field_spec = "linear_ou";
    check_cfg.domain_spec = {{"low", {-1.0}}, {"high", {1.0}}, {"n_pairs", 32}};
    check_cfg.parameters = {{"assumption", "A_mu_K"}, {"mu", 0.0}, {"K", 0.0}};
    check_cfg.output_format = "csv";
    check_cfg.output_path = (tmp.path / "nope.csv").string();
    CHECK(run(check_cfg, log) == 2);
    CHECK_FALSE(fs::exists(check_cfg.output_path));
}

TEST_CASE("report JSON carries the documented keys") {
    AssumptionReport rep;
    rep.assumption = AssumptionKind::A_mu_K;
    rep.mu = 1.0;
    rep.level = 2.0;
    rep.fitted_constant = 1.5;
    rep.worst_pair = {{0.1}, {0.9}};
    rep.worst_ratio = 1.5;
    rep.n_checked = 10;
    rep.verdict = Verdict::satisfied_at_level;
    const nlohmann::json j = report_to_json(rep);
    for (const char* key : {"assumption", "mu", "level", "fitted_constant", "worst_pair",
                            "worst_ratio", "n_checked", "verdict"})
        CHECK(j.contains(key));
    CHECK(j.at("assumption") == "A_mu_K");
    CHECK(j.at("verdict") == "satisfied_at_level");
}
