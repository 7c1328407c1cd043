#include "aoistarve/safety.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nlohmann/json.hpp"

#include "aoistarve/params.hpp"

namespace aoistarve {

namespace {

double lookup_tdr(const std::map<double, double>& table, double threshold) {
  auto it = table.lower_bound(threshold - 1e-9);
  if (it == table.end() || std::abs(it->first - threshold) > 1e-9) {
    std::ostringstream os;
    os << "safety: report has no TDR entry at threshold " << threshold
       << " ms";
    throw ValidationError(os.str());
  }
  return it->second;
}

}  // namespace

const char* to_string(TdrBasis basis) {
  return basis == TdrBasis::Time ? "time" : "sample";
}

std::vector<ServiceSpec> builtin_services() {
  return {
      {"FCW", 100.0, 0.9999},
      {"EBW", 120.0, 0.9999},
      {"LCW", 400.0, 0.9990},
  };
}

std::vector<ServiceSpec> load_services_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("safety: cannot open service catalog " + path);
  std::vector<ServiceSpec> specs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line.rfind("name,", 0) == 0) continue;  // header row
    }
    std::istringstream row(line);
    ServiceSpec spec;
    std::string field;
    if (!std::getline(row, spec.name, ',') || !std::getline(row, field, ','))
      throw ValidationError("safety: malformed catalog row: " + line);
    spec.aoi_threshold_ms = std::stod(field);
    if (!std::getline(row, field, ','))
      throw ValidationError("safety: malformed catalog row: " + line);
    spec.target_slr = std::stod(field);
    if (spec.aoi_threshold_ms <= 0 || spec.target_slr <= 0 ||
        spec.target_slr > 1) {
      throw ValidationError("safety: invalid service spec: " + line);
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw ValidationError("safety: empty service catalog");
  return specs;
}

double violation_probability(double tdr, double horizon_s,
                             double update_interval_ms) {
  if (tdr < 0 || tdr > 1)
    throw ValidationError("safety: tdr must lie in [0, 1]");
  if (update_interval_ms <= 0)
    throw ValidationError("safety: update_interval_ms must be positive");
  const double n = std::floor(1000.0 * horizon_s / update_interval_ms);
  if (n < 1) {
    throw ValidationError(
        "safety: horizon holds no update opportunities at this interval");
  }
  return 1.0 - std::pow(tdr, n);
}

SafetyVerdict evaluate_service(const ServiceSpec& spec,
                               const MetricsReport& report,
                               TdrBasis basis,
                               double update_interval_ms,
                               const std::vector<double>& horizons_s) {
  if (!report.has_data)
    throw ValidationError("safety: report carries no link data");
  SafetyVerdict v;
  v.service = spec;
  v.basis = basis;
  const auto& table =
      basis == TdrBasis::Time ? report.tdr_time : report.tdr_sample;
  v.measured_tdr = lookup_tdr(table, spec.aoi_threshold_ms);
  v.slr_gap = spec.target_slr - v.measured_tdr;
  v.unsafe = v.slr_gap > 0;
  for (double h : horizons_s) {
    v.horizons_s.push_back(h);
    v.violation_probability.push_back(
        violation_probability(v.measured_tdr, h, update_interval_ms));
  }
  return v;
}

std::vector<SafetyVerdict> evaluate_all(const std::vector<ServiceSpec>& specs,
                                        const MetricsReport& report,
                                        TdrBasis basis,
                                        double update_interval_ms,
                                        const std::vector<double>& horizons_s) {
  std::vector<SafetyVerdict> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    out.push_back(
        evaluate_service(spec, report, basis, update_interval_ms, horizons_s));
  }
  return out;
}

std::string verdicts_to_json(const std::vector<SafetyVerdict>& verdicts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : verdicts) {
    nlohmann::json j;
    j["service"] = v.service.name;
    j["aoi_threshold_ms"] = v.service.aoi_threshold_ms;
    j["target_slr"] = v.service.target_slr;
    j["tdr_basis"] = to_string(v.basis);
    j["measured_tdr"] = v.measured_tdr;
    j["slr_gap"] = v.slr_gap;
    j["unsafe"] = v.unsafe;
    nlohmann::json curve = nlohmann::json::array();
    for (std::size_t i = 0; i < v.horizons_s.size(); ++i) {
      curve.push_back({{"horizon_s", v.horizons_s[i]},
                       {"violation_probability", v.violation_probability[i]}});
    }
    j["violation_curve"] = curve;
    arr.push_back(j);
  }
  return arr.dump(2);
}

std::string verdicts_to_csv(const std::vector<SafetyVerdict>& verdicts) {
  std::ostringstream os;
  os << "service,aoi_threshold_ms,target_slr,tdr_basis,measured_tdr,slr_gap,"
        "unsafe\n";
  os << std::setprecision(17);
  for (const auto& v : verdicts) {
    os << v.service.name << ',' << v.service.aoi_threshold_ms << ','
       << v.service.target_slr << ',' << to_string(v.basis) << ','
       << v.measured_tdr << ',' << v.slr_gap << ','
       << (v.unsafe ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace aoistarve
