#pragma once

// Machine-readable run reports: one row per run, JSON or CSV.

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcreg/registration.hpp"

namespace gcreg {

enum class ModelKind { gc, lc, mc, demon };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::gc: return "gc";
    case ModelKind::lc: return "lc";
    case ModelKind::mc: return "mc";
    case ModelKind::demon: return "demon";
  }
  return "unknown";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "gc") return ModelKind::gc;
  if (s == "lc") return ModelKind::lc;
  if (s == "mc") return ModelKind::mc;
  if (s == "demon") return ModelKind::demon;
  return std::nullopt;
}

inline constexpr int kReportSchema = 1;

/// gamma is empty for the demon model, r for everything but gc.
struct ReportRow {
  ModelKind model = ModelKind::gc;
  std::optional<double> gamma;
  std::optional<double> r;
  double time_s = 0.0;
  double epsilon = 0.0;
  double min_jac = 1.0;
  int iterations = 0;
  std::int64_t negative_jac_count = 0;
  double ssd_before = 0.0;
  double ssd_after = 0.0;
};

inline ReportRow make_report_row(ModelKind model, std::optional<double> gamma, std::optional<double> r,
                                 const RegistrationResult& res) {
  return {model,   gamma,      r, res.wall_time_s, res.epsilon, res.min_jac, res.iterations, res.negative_jac_count,
          res.ssd_before, res.ssd_after};
}

inline nlohmann::json report_json(const ReportRow& row, const nlohmann::json& config = nlohmann::json::object(),
                                  const RegistrationResult* res = nullptr) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["model"] = to_string(row.model);
  j["gamma"] = opt(row.gamma);
  j["r"] = opt(row.r);
  j["time_s"] = row.time_s;
  j["epsilon"] = row.epsilon;
  j["min_jac"] = row.min_jac;
  j["iterations"] = row.iterations;
  j["negative_jac_count"] = row.negative_jac_count;
  j["ssd_before"] = row.ssd_before;
  j["ssd_after"] = row.ssd_after;
  j["config"] = config;
  if (res) {
    j["residual_history"] = res->residual_history;
    j["ssd_history"] = res->ssd_history;
    j["constraint_history"] = res->constraint_history;
    j["identical_inputs"] = res->identical_inputs;
    j["degenerate_denominators"] = res->degenerate_denominators;
  }
  return j;
}

inline std::string report_csv(const ReportRow& row) {
  std::ostringstream os;
  os.precision(17);
  os << "model,gamma,r,time_s,epsilon,min_jac,iterations,negative_jac_count,ssd_before,ssd_after\n";
  os << to_string(row.model) << ',';
  if (row.gamma) os << *row.gamma;
  os << ',';
  if (row.r) os << *row.r;
  os << ',' << row.time_s << ',' << row.epsilon << ',' << row.min_jac << ',' << row.iterations << ','
     << row.negative_jac_count << ',' << row.ssd_before << ',' << row.ssd_after << '\n';
  return os.str();
}

}  // namespace gcreg
