#include "monoflow/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "monoflow/analysis.hpp"
#include "monoflow/assumptions.hpp"
#include "monoflow/examples.hpp"
#include "monoflow/expr.hpp"
#include "monoflow/serialize.hpp"

namespace monoflow {

namespace {

using nlohmann::json;

Vec vec_from_json(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw InputError(std::string(what) + ": expected an array");
    Vec v;
    for (const auto& e : j) v.push_back(e.get<double>());
    return v;
}

CoefficientField resolve_field(const json& spec) {
    if (spec.is_string()) return lookup(spec.get<std::string>()).field;
    if (spec.is_object()) {
        const int d = spec.at("d").get<int>();
        std::vector<std::string> drift = spec.at("drift").get<std::vector<std::string>>();
        std::vector<std::vector<std::string>> sigma;
        if (spec.contains("sigma"))
            sigma = spec.at("sigma").get<std::vector<std::vector<std::string>>>();
        const std::string label = spec.value("label", std::string("inline"));
        return field_from_expressions(d, drift, sigma, label);
    }
    throw InputError("config: 'field' must be a registry name or an inline object");
}

SampleDomain domain_from_json(const json& j) {
    if (!j.is_object()) throw InputError("config: 'domain' must be an object");
    SampleDomain dom;
    dom.box_low = vec_from_json(j.at("low"), "domain.low");
    dom.box_high = vec_from_json(j.at("high"), "domain.high");
    dom.n_pairs = j.value("n_pairs", 256);
    dom.min_separation = j.value("min_separation", 0.0);
    dom.seed = j.value("seed", 0ull);
    const std::string sampler = j.value("sampler", std::string("low_discrepancy"));
    if (sampler == "low_discrepancy")
        dom.sampler = Sampler::low_discrepancy;
    else if (sampler == "pseudo_random")
        dom.sampler = Sampler::pseudo_random;
    else
        throw InputError("config: unknown sampler '" + sampler + "'");
    dom.validate();
    return dom;
}

std::string field_label(const RunConfig& cfg) {
    if (cfg.field_spec.is_string()) return cfg.field_spec.get<std::string>();
    if (cfg.field_spec.is_object()) return cfg.field_spec.value("label", std::string("inline"));
    return "";
}

const json& params_of(const RunConfig& cfg) {
    if (!cfg.parameters.is_object())
        throw InputError("config: command '" + cfg.command + "' needs a 'parameters' object");
    return cfg.parameters;
}

struct RunOutcome {
    json results;
    std::string summary;                      // one-line verdict
    int status = 0;
    std::vector<double> raw_values;           // per-replica dump, if any
};

// ---------------------------------------------------------------- commands

RunOutcome run_list_examples(std::ostream& log) {
    RunOutcome out;
    json entries = json::array();
    for (const ExampleEntry& e : registry()) {
        json claims = json::array();
        for (const ExpectedClaim& c : e.expected) {
            json cj;
            cj["assumption"] = to_string(c.kind);
            cj["mu"] = c.mu;
            cj["level"] = c.level;
            if (!c.scalar_desc.empty()) cj["fn"] = c.scalar_desc;
            cj["box_low"] = c.box_low;
            cj["box_high"] = c.box_high;
            claims.push_back(cj);
        }
        json ej;
        ej["name"] = e.name;
        ej["d"] = e.field.dim();
        ej["m"] = e.field.noise_dim();
        ej["expected"] = claims;
        ej["notes"] = e.notes;
        if (e.blowup)
            ej["blowup"] = {{"x0", e.blowup->x0}, {"expected_exit", e.blowup->expected_exit}};
        entries.push_back(ej);
        log << e.name << "  d=" << e.field.dim() << " m=" << e.field.noise_dim() << "  "
            << e.notes << "\n";
    }
    out.results["examples"] = entries;
    out.summary = std::to_string(registry().size()) + " registered example fields";
    return out;
}

RunOutcome run_simulate(const RunConfig& cfg) {
    params_of(cfg);
    const CoefficientField field = resolve_field(cfg.field_spec);
    std::vector<Vec> points;
    for (const auto& p : cfg.parameters.at("points")) points.push_back(vec_from_json(p, "points"));
    std::vector<double> times = cfg.parameters.value("times", std::vector<double>{cfg.grid.t0});

    std::ostringstream csv;
    long rows = 0;
    for (long r = 0; r < cfg.replicas; ++r) {
        const NoiseRealization noise =
            sample_noise(cfg.grid, field.noise_dim(), cfg.master_seed, static_cast<std::uint64_t>(r));
        const FlowGrid fg = flow_grid(field, points, times, cfg.grid, noise, cfg.r_max);
        write_trajectory_csv(csv, fg, r == 0);
        rows += static_cast<long>(points.size() * times.size());
    }
    if (cfg.output_path.empty()) throw InputError("simulate: an output path is required");
    write_file_atomic(cfg.output_path, csv.str());

    RunOutcome out;
    out.results["csv_path"] = cfg.output_path;
    out.results["trajectories"] = rows;
    out.summary = "simulate: wrote " + std::to_string(rows) + " trajectories to " + cfg.output_path;
    return out;
}

RunOutcome run_check(const RunConfig& cfg) {
    params_of(cfg);
    const CoefficientField field = resolve_field(cfg.field_spec);
    const std::string assumption = cfg.parameters.at("assumption").get<std::string>();
    RunOutcome out;

    const auto finish_report = [&](const AssumptionReport& rep) {
        out.results["report"] = report_to_json(rep);
        out.status = rep.verdict == Verdict::satisfied_at_level ? 0 : 1;
        std::ostringstream line;
        line << to_string(rep.assumption) << ": " << to_string(rep.verdict)
             << " (fitted " << rep.fitted_constant << " vs level " << rep.level << ", "
             << rep.n_checked << " samples)";
        out.summary = line.str();
    };

    if (assumption == "A_mu_K") {
        const double mu = cfg.parameters.at("mu").get<double>();
        const double K = cfg.parameters.at("K").get<double>();
        finish_report(check_A_mu_K(field, domain_from_json(cfg.domain_spec), mu, K));
    } else if (assumption == "G_rho") {
        const ScalarFn rho = scalar_fn_from_expression(cfg.parameters.at("rho").get<std::string>());
        finish_report(check_G_rho(field, domain_from_json(cfg.domain_spec), rho));
    } else if (assumption == "H_f_mu") {
        const double mu = cfg.parameters.at("mu").get<double>();
        const ScalarFn f = scalar_fn_from_expression(cfg.parameters.at("f").get<std::string>());
        finish_report(check_H_f_mu(field, domain_from_json(cfg.domain_spec), f, mu));
    } else if (assumption == "lemma_G") {
        const std::vector<double> radii = cfg.parameters.at("radii").get<std::vector<double>>();
        const int n_per_radius = cfg.parameters.value("n_per_radius", 128);
        finish_report(lemma_G_check(field, radii, n_per_radius, cfg.master_seed));
    } else if (assumption == "subadditivity") {
        const Vec x = vec_from_json(cfg.parameters.at("x"), "x");
        const Vec y = vec_from_json(cfg.parameters.at("y"), "y");
        const std::vector<double> partition =
            cfg.parameters.at("partition").get<std::vector<double>>();
        const SubadditivityResult res = subadditivity_check(field, x, y, partition);
        out.results["subadditivity"] = subadditivity_to_json(res);
        const bool ok = res.opnorm_holds && res.trace_holds && res.refine_monotone_opnorm &&
                        res.refine_monotone_trace;
        out.status = ok ? 0 : 1;
        out.summary = std::string("subadditivity: ") + (ok ? "holds" : "violated");
    } else if (assumption == "local_to_global") {
        const double mu = cfg.parameters.at("mu").get<double>();
        std::vector<SampleDomain> boxes;
        for (const auto& b : cfg.parameters.at("boxes")) boxes.push_back(domain_from_json(b));
        std::vector<std::pair<Vec, Vec>> pairs;
        for (const auto& p : cfg.parameters.at("pairs"))
            pairs.emplace_back(vec_from_json(p.at(0), "pair.x"), vec_from_json(p.at(1), "pair.y"));
        const LocalToGlobalResult res = local_to_global_check(field, mu, boxes, pairs);
        out.results["local_to_global"] = {{"holds", res.holds},
                                          {"max_local_constant", res.max_local_constant},
                                          {"worst_global_ratio", res.worst_global_ratio}};
        out.status = res.holds ? 0 : 1;
        std::ostringstream line;
        line << "local_to_global: " << (res.holds ? "holds" : "violated") << " (local "
             << res.max_local_constant << ", global " << res.worst_global_ratio << ")";
        out.summary = line.str();
    } else {
        throw InputError("check: unknown assumption '" + assumption + "'");
    }
    return out;
}

RunOutcome run_gronwall(const RunConfig& cfg) {
    params_of(cfg);
    GronwallSpec spec;
    const std::string construction =
        cfg.parameters.value("construction", std::string("squared_norm"));
    if (construction == "squared_norm")
        spec.construction = GronwallConstruction::squared_norm;
    else if (construction == "zero")
        spec.construction = GronwallConstruction::zero;
    else
        throw InputError("gronwall: unknown construction '" + construction + "'");
    spec.dim = cfg.parameters.value("dim", 1);
    if (cfg.parameters.contains("x0")) spec.x0 = vec_from_json(cfg.parameters.at("x0"), "x0");
    spec.psi_const = cfg.parameters.value("psi_const", 0.0);
    spec.grid = cfg.grid;
    const std::string mode = cfg.parameters.value("mode", std::string("deterministic"));
    if (mode == "deterministic") {
        spec.mode = GronwallMode::deterministic_psi;
    } else if (mode == "exponent_pair") {
        spec.mode = GronwallMode::exponent_pair;
        spec.nu = cfg.parameters.at("nu").get<double>();
    } else {
        throw InputError("gronwall: unknown mode '" + mode + "'");
    }
    const double p = cfg.parameters.at("p").get<double>();
    const double t = cfg.parameters.value("t", cfg.grid.t1);

    const BoundCheck check =
        gronwall_mc_verify(spec, p, t, cfg.replicas, cfg.master_seed, cfg.threads);
    RunOutcome out;
    out.results["bound_check"] = bound_check_to_json(check);
    out.status = check.within_bound() ? 0 : 1;
    std::ostringstream line;
    line << check.name << ": " << to_string(check.verdict) << " (empirical " << check.empirical
         << " + 3se vs bound " << check.bound << ")";
    out.summary = line.str();
    out.raw_values = check.per_replica;
    return out;
}

RunOutcome run_moments(const RunConfig& cfg) {
    params_of(cfg);
    const CoefficientField field = resolve_field(cfg.field_spec);
    MomentBoundParams params;
    params.x = vec_from_json(cfg.parameters.at("x"), "x");
    params.y = vec_from_json(cfg.parameters.at("y"), "y");
    params.mu = cfg.parameters.at("mu").get<double>();
    params.q = cfg.parameters.at("q").get<double>();
    params.P = cfg.parameters.at("P").get<double>();
    params.Q = cfg.parameters.at("Q").get<double>();
    params.f_desc = cfg.parameters.at("f").get<std::string>();
    params.f = scalar_fn_from_expression(params.f_desc);

    const BoundCheck check = moment_bound_verify(field, params, cfg.grid, cfg.r_max,
                                                 cfg.replicas, cfg.master_seed, cfg.threads);
    RunOutcome out;
    out.results["bound_check"] = bound_check_to_json(check);
    out.status = check.within_bound() ? 0 : 1;
    std::ostringstream line;
    line << check.name << ": " << to_string(check.verdict) << " (empirical " << check.empirical
         << " + 3se vs bound " << check.bound << ", " << check.excluded << " excluded)";
    out.summary = line.str();
    out.raw_values = check.per_replica;
    return out;
}

RunOutcome run_holder(const RunConfig& cfg) {
    params_of(cfg);
    const CoefficientField field = resolve_field(cfg.field_spec);
    const Vec base = vec_from_json(cfg.parameters.at("base_x"), "base_x");
    const std::vector<double> scales = cfg.parameters.at("scales").get<std::vector<double>>();
    const double q = cfg.parameters.at("q").get<double>();

    const HolderEstimate est = holder_estimate(field, base, scales, q, cfg.grid, cfg.r_max,
                                               cfg.replicas, cfg.master_seed, cfg.threads);
    RunOutcome out;
    out.results["holder"] = holder_to_json(est);
    std::ostringstream line;
    line << "holder: slope " << est.slope << " (claimed exponent " << est.claimed_exponent
         << ", descriptive only)";
    out.summary = line.str();
    return out;
}

RunOutcome run_delta(const RunConfig& cfg) {
    params_of(cfg);
    const CoefficientField field = resolve_field(cfg.field_spec);
    const json& cj = cfg.parameters.at("cloud");
    const std::string kind_name = cj.at("kind").get<std::string>();
    CloudKind kind;
    if (kind_name == "segment")
        kind = CloudKind::segment;
    else if (kind_name == "circle")
        kind = CloudKind::circle;
    else if (kind_name == "cantor_dust")
        kind = CloudKind::cantor_dust;
    else if (kind_name == "product_cantor")
        kind = CloudKind::product_cantor;
    else
        throw InputError("delta: unknown cloud kind '" + kind_name + "'");
    const PointCloud cloud = minkowski_cloud(kind, cj.at("delta").get<double>(),
                                             cj.at("n_points").get<int>(),
                                             cj.value("ambient_d", field.dim()));

    DeltaCheckParams params;
    params.q = cfg.parameters.at("q").get<double>();
    params.mu = cfg.parameters.value("mu", std::max(0.0, params.q - 2.0 + 1e-6));
    params.eval_pairs = cfg.parameters.value("eval_pairs", 32);
    params.holdout_pairs = cfg.parameters.value("holdout_pairs", 16);
    if (cfg.parameters.contains("K")) {
        params.K = cfg.parameters.at("K").get<double>();
    } else {
        // fit the one-sided constant on the cloud's bounding box
        Vec lo = cloud.points.front(), hi = cloud.points.front();
        for (const Vec& p : cloud.points)
            for (std::size_t i = 0; i < p.size(); ++i) {
                lo[i] = std::min(lo[i], p[i]);
                hi[i] = std::max(hi[i], p[i]);
            }
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (hi[i] - lo[i] < 1e-9) {
                lo[i] -= 0.5;
                hi[i] += 0.5;
            }
        SampleDomain dom;
        dom.box_low = lo;
        dom.box_high = hi;
        dom.n_pairs = 256;
        const AssumptionReport rep = check_A_mu_K(field, dom, params.mu, 0.0);
        params.K = rep.fitted_constant;
    }

    const std::string reading = cfg.parameters.value("reading", std::string("both"));
    const DeltaCheckResult res = delta_complete_check(field, cloud, params, cfg.grid, cfg.r_max,
                                                      cfg.replicas, cfg.master_seed, cfg.threads);

    RunOutcome out;
    out.results["delta"] = delta_to_json(res);
    out.results["cloud"] = {{"kind", kind_name},
                            {"nominal_dimension", cloud.nominal_dimension},
                            {"n_points", cloud.points.size()},
                            {"construction", cloud.construction}};
    out.results["K"] = params.K;
    bool ok = true;
    if (reading == "linear")
        ok = res.linear_reading.within_bound();
    else if (reading == "q_power")
        ok = res.q_power_reading.within_bound();
    else if (reading == "both")
        ok = res.linear_reading.within_bound() && res.q_power_reading.within_bound();
    else
        throw InputError("delta: unknown reading '" + reading + "'");
    out.status = ok ? 0 : 1;
    std::ostringstream line;
    line << "delta-completeness: " << (ok ? "within_bound" : "violated") << " (blowup fraction "
         << res.blowup_fraction << ", final diameter " << res.mean_final_diameter << " vs initial "
         << res.initial_diameter << ")";
    out.summary = line.str();
    return out;
}

RunOutcome run_additive(const RunConfig& cfg) {
    params_of(cfg);
    const CoefficientField field = resolve_field(cfg.field_spec);
    const std::string mode = cfg.parameters.at("mode").get<std::string>();
    RunOutcome out;

    if (mode == "conditions") {
        const double c = cfg.parameters.at("c").get<double>();
        const AssumptionReport rep =
            additive_conditions_check(field, domain_from_json(cfg.domain_spec), c);
        out.results["report"] = report_to_json(rep);
        out.status = rep.verdict == Verdict::satisfied_at_level ? 0 : 1;
        std::ostringstream line;
        line << "additive conditions: " << to_string(rep.verdict) << " (fitted c "
             << rep.fitted_constant << " vs " << c << ")";
        out.summary = line.str();
    } else if (mode == "apriori") {
        const double c = cfg.parameters.at("c").get<double>();
        const double sigma = cfg.parameters.value("sigma", 1.0);
        const Vec x = vec_from_json(cfg.parameters.at("x"), "x");
        const BoundCheck check = additive_apriori_check(field, sigma, c, x, cfg.grid,
                                                        cfg.replicas, cfg.master_seed, cfg.threads);
        out.results["bound_check"] = bound_check_to_json(check);
        out.status = check.within_bound() ? 0 : 1;
        std::ostringstream line;
        line << check.name << ": " << to_string(check.verdict) << " (worst relative violation "
             << check.empirical << ")";
        out.summary = line.str();
        out.raw_values = check.per_replica;
    } else if (mode == "decompose") {
        const Vec x = vec_from_json(cfg.parameters.at("x"), "x");
        const AdditiveDecomposition dec = additive_decomposition(field, x);
        out.results["decomposition"] = {{"radial_coeff", dec.radial_coeff},
                                        {"tangential", dec.tangential}};
        std::ostringstream line;
        line << "decomposition at |x|=" << norm(x) << ": radial " << dec.radial_coeff
             << ", |tangential| " << norm(dec.tangential);
        out.summary = line.str();
    } else {
        throw InputError("additive: unknown mode '" + mode + "'");
    }
    return out;
}

} // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    cfg.command = j.at("command").get<std::string>();
    if (j.contains("field")) cfg.field_spec = j.at("field");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        cfg.grid.t0 = g.value("t0", 0.0);
        cfg.grid.t1 = g.value("t1", 1.0);
        cfg.grid.n_steps = g.value("n_steps", 1000);
        cfg.grid.validate();
    }
    cfg.replicas = j.value("replicas", 10000L);
    cfg.master_seed = j.value("master_seed", 12345ull);
    cfg.r_max = j.value("R_max", kDefaultRMax);
    cfg.threads = j.value("threads", 0);
    if (j.contains("domain")) cfg.domain_spec = j.at("domain");
    if (j.contains("parameters")) cfg.parameters = j.at("parameters");
    if (j.contains("output")) {
        const json& o = j.at("output");
        cfg.output_path = o.value("path", std::string());
        cfg.output_format = o.value("format", std::string("json"));
        cfg.with_timestamp = o.value("timestamp", true);
        cfg.raw_csv_path = o.value("raw_csv", std::string());
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

int run(const RunConfig& config, std::ostream& log) {
    try {
        RunOutcome outcome;
        if (config.command == "list-examples")
            outcome = run_list_examples(log);
        else if (config.command == "simulate")
            outcome = run_simulate(config);
        else if (config.command == "check")
            outcome = run_check(config);
        else if (config.command == "gronwall")
            outcome = run_gronwall(config);
        else if (config.command == "moments")
            outcome = run_moments(config);
        else if (config.command == "holder")
            outcome = run_holder(config);
        else if (config.command == "delta")
            outcome = run_delta(config);
        else if (config.command == "additive")
            outcome = run_additive(config);
        else
            throw InputError("unknown command '" + config.command + "'");

        const auto raw_values_csv = [&outcome] {
            std::ostringstream csv;
            csv << "replica,value\n";
            char buf[64];
            for (std::size_t r = 0; r < outcome.raw_values.size(); ++r) {
                std::snprintf(buf, sizeof buf, "%.17g", outcome.raw_values[r]);
                csv << r << ',' << buf << '\n';
            }
            return csv.str();
        };

        if (!config.output_path.empty() && config.command != "simulate") {
            if (config.output_format == "json") {
                json envelope;
                envelope["command"] = config.command;
                envelope["field"] = field_label(config);
                envelope["seed"] = config.master_seed;
                envelope["replicas"] = config.replicas;
                envelope["grid"] = {{"t0", config.grid.t0},
                                    {"t1", config.grid.t1},
                                    {"n_steps", config.grid.n_steps}};
                envelope["results"] = outcome.results;
                envelope["status"] = outcome.status;
                if (config.with_timestamp) envelope["timestamp"] = timestamp_utc();
                write_file_atomic(config.output_path, envelope.dump(2) + "\n");
            } else if (config.output_format == "csv") {
                if (outcome.raw_values.empty())
                    throw InputError("csv output needs a command with per-replica values "
                                     "(gronwall, moments, additive apriori)");
                write_file_atomic(config.output_path, raw_values_csv());
            } else {
                throw InputError("unknown output format '" + config.output_format + "'");
            }
        }
        if (!config.raw_csv_path.empty() && !outcome.raw_values.empty())
            write_file_atomic(config.raw_csv_path, raw_values_csv());

        log << outcome.summary << "\n";
        return outcome.status;
    } catch (const InputError& e) {
        log << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ConstructionError& e) {
        log << "run aborted: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace monoflow
