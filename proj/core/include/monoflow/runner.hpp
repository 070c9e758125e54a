#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "monoflow/common.hpp"
#include "monoflow/integrator.hpp"

namespace monoflow {

/// One fully resolved run: command, field, grid, seeding, command-specific
/// parameters and output routing. Parsed from a JSON config file; CLI flags
/// override individual fields afterwards.
struct RunConfig {
    std::string command; // simulate | check | gronwall | moments | holder |
                         // delta | additive | list-examples
    nlohmann::json field_spec;       // registry name (string) or inline object
    TimeGrid grid{0.0, 1.0, 1000};
    long replicas = 10000;
    std::uint64_t master_seed = 12345;
    double r_max = kDefaultRMax;
    int threads = 0;                 // 0: machine parallelism
    nlohmann::json domain_spec;      // optional SampleDomain
    nlohmann::json parameters;       // command-specific
    std::string output_path;
    std::string output_format = "json"; // json | csv
    bool with_timestamp = true;
    std::string raw_csv_path;        // optional per-replica dump

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);
};

/// Executes the configured command, writes its artifacts, prints a one-line
/// verdict summary to `log`. Returns 0 when every produced verdict is
/// satisfied/within bound, 1 when any is violated, 2 on input or
/// construction errors.
int run(const RunConfig& config, std::ostream& log);

} // namespace monoflow
