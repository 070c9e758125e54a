#include "monoflow/serialize.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace monoflow {

nlohmann::json report_to_json(const AssumptionReport& rep) {
    nlohmann::json j;
    j["assumption"] = to_string(rep.assumption);
    j["mu"] = rep.mu;
    j["level"] = rep.level;
    j["fitted_constant"] = rep.fitted_constant;
    j["worst_pair"] = {{"x", rep.worst_pair.first}, {"y", rep.worst_pair.second}};
    j["worst_ratio"] = rep.worst_ratio;
    j["n_checked"] = rep.n_checked;
    j["verdict"] = to_string(rep.verdict);
    if (!rep.note.empty()) j["note"] = rep.note;
    if (!rep.hypothesis_ok) j["hypothesis_ok"] = false;
    return j;
}

nlohmann::json bound_check_to_json(const BoundCheck& check) {
    nlohmann::json j;
    j["name"] = check.name;
    j["empirical"] = check.empirical;
    j["std_error"] = check.std_error;
    j["bound"] = check.bound;
    j["replicas"] = check.replicas;
    j["excluded"] = check.excluded;
    j["verdict"] = to_string(check.verdict);
    if (!check.warnings.empty()) j["warnings"] = check.warnings;
    return j;
}

nlohmann::json holder_to_json(const HolderEstimate& est) {
    nlohmann::json j;
    j["q"] = est.q;
    j["claimed_exponent"] = est.claimed_exponent;
    j["slope"] = est.slope;
    j["replicas"] = est.replicas;
    j["excluded"] = est.excluded;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [h, m] : est.pairs) pairs.push_back({{"scale", h}, {"mean_sup_distance", m}});
    j["pairs"] = pairs;
    return j;
}

nlohmann::json delta_to_json(const DeltaCheckResult& res) {
    nlohmann::json j;
    j["linear_reading"] = bound_check_to_json(res.linear_reading);
    j["q_power_reading"] = bound_check_to_json(res.q_power_reading);
    j["calibrated_c_linear"] = res.calibrated_c_linear;
    j["calibrated_c_q_power"] = res.calibrated_c_q_power;
    j["initial_diameter"] = res.initial_diameter;
    j["mean_final_diameter"] = res.mean_final_diameter;
    j["se_final_diameter"] = res.se_final_diameter;
    j["max_final_diameter"] = res.max_final_diameter;
    j["blowup_fraction"] = res.blowup_fraction;
    j["replicas"] = res.replicas;
    return j;
}

nlohmann::json subadditivity_to_json(const SubadditivityResult& res) {
    nlohmann::json j;
    j["opnorm_holds"] = res.opnorm_holds;
    j["trace_holds"] = res.trace_holds;
    j["refine_monotone_opnorm"] = res.refine_monotone_opnorm;
    j["refine_monotone_trace"] = res.refine_monotone_trace;
    j["opnorm_slack"] = res.opnorm_slack;
    j["trace_slack"] = res.trace_slack;
    return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path() && !target.parent_path().empty())
        fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open output file '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw InputError("failed writing output file '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace monoflow
