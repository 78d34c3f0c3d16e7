#pragma once

// Deterministic JSON / CSV output of check reports and sweep rows.

#include "prodgeom/parallel.hpp"

#include <map>
#include <string>
#include <vector>

namespace prodgeom {

/// Ordered key/value config echoed into the report header; values are raw JSON.
using ReportConfig = std::vector<std::pair<std::string, std::string>>;

/// Floats with 17 significant digits; NaN and infinities become null.
std::string json_number(double v);
std::string json_string(const std::string& s);

/// {"schema": 1, "config": {...}, "checks": [...]} with fixed field order.
std::string reports_to_json(const ReportConfig& config, const std::vector<CheckReport>& checks);
/// Header row then one row per check (metadata as key=value pairs joined by ';').
std::string reports_to_csv(const std::vector<CheckReport>& checks);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string sweep_to_json(const ReportConfig& config, const std::vector<SweepRow>& rows);

bool all_pass(const std::vector<CheckReport>& checks);

}  // namespace prodgeom
