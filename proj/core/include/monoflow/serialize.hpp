#pragma once

#include <string>

#include "json.hpp"

#include "monoflow/analysis.hpp"
#include "monoflow/assumptions.hpp"

namespace monoflow {

// nlohmann::json keeps keys sorted, so identical data always serializes to
// identical bytes; all report writers below rely on that for the
// reproducibility guarantee.

nlohmann::json report_to_json(const AssumptionReport& rep);
nlohmann::json bound_check_to_json(const BoundCheck& check);
nlohmann::json holder_to_json(const HolderEstimate& est);
nlohmann::json delta_to_json(const DeltaCheckResult& res);
nlohmann::json subadditivity_to_json(const SubadditivityResult& res);

/// Writes through a temporary file plus rename, so an interrupted run never
/// leaves a truncated artifact at the target path.
void write_file_atomic(const std::string& path, const std::string& content);

std::string timestamp_utc();

} // namespace monoflow
