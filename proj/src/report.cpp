#include "prodgeom/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace prodgeom {

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : "nan"; }

void write_config(std::string& out, const ReportConfig& config) {
  out += "  \"config\": {";
  for (std::size_t i = 0; i < config.size(); ++i) {
    out += i ? ",\n" : "\n";
    out += "    " + json_string(config[i].first) + ": " + config[i].second;
  }
  out += config.empty() ? "},\n" : "\n  },\n";
}

}  // namespace

std::string reports_to_json(const ReportConfig& config, const std::vector<CheckReport>& checks) {
  std::string out = "{\n  \"schema\": 1,\n";
  write_config(out, config);
  out += "  \"checks\": [";
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const CheckReport& c = checks[i];
    out += i ? ",\n" : "\n";
    out += "    {\n";
    out += "      \"name\": " + json_string(c.name) + ",\n";
    out += "      \"max_residual\": " + json_number(c.max_residual) + ",\n";
    out += "      \"tolerance\": " + json_number(c.tolerance) + ",\n";
    out += fmt::format("      \"samples\": {},\n", c.samples);
    out += fmt::format("      \"pass\": {},\n", c.pass ? "true" : "false");
    out += "      \"metadata\": {";
    bool first = true;
    for (const auto& [k, v] : c.metadata) {  // std::map: sorted keys
      out += first ? "\n" : ",\n";
      first = false;
      out += "        " + json_string(k) + ": " + json_string(v);
    }
    out += first ? "}\n" : "\n      }\n";
    out += "    }";
  }
  out += checks.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

std::string reports_to_csv(const std::vector<CheckReport>& checks) {
  std::string out = "name,max_residual,tolerance,samples,pass,metadata\n";
  for (const CheckReport& c : checks) {
    std::string meta;
    for (const auto& [k, v] : c.metadata) {
      if (!meta.empty()) meta += ';';
      meta += k + "=" + v;
    }
    out += fmt::format("{},{},{},{},{},{}\n", csv_field(c.name), csv_number(c.max_residual), csv_number(c.tolerance),
                       c.samples, c.pass ? "true" : "false", csv_field(meta));
  }
  return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "r,H_mean,H_max,C_max,detB_min\n";
  for (const SweepRow& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", csv_number(r.r), csv_number(r.H_mean), csv_number(r.H_max),
                       csv_number(r.C_max), csv_number(r.detB_min));
  }
  return out;
}

std::string sweep_to_json(const ReportConfig& config, const std::vector<SweepRow>& rows) {
  std::string out = "{\n  \"schema\": 1,\n";
  write_config(out, config);
  out += "  \"sweep\": [";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    out += i ? ",\n" : "\n";
    out += fmt::format("    {{\"r\": {}, \"H_mean\": {}, \"H_max\": {}, \"C_max\": {}, \"detB_min\": {}}}",
                       json_number(r.r), json_number(r.H_mean), json_number(r.H_max), json_number(r.C_max),
                       json_number(r.detB_min));
  }
  out += rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

bool all_pass(const std::vector<CheckReport>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const CheckReport& c) { return c.pass; });
}

}  // namespace prodgeom
