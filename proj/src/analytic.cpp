#include "aoistarve/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace aoistarve {

double effective_sch_prob(double p_sch, double x) {
  if (!(p_sch > 0.0 && p_sch <= 1.0))
    throw ValidationError("p_sch must be in (0,1]");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("x must be in [0,1]");
  if (x == 1.0)
    throw ValidationError("degenerate starvation: no CSR ever found (x = 1)");
  return (1.0 - x) * p_sch;
}

std::pair<double, double> inter_success_moments(int gamma, double phi) {
  if (gamma < 1) throw ValidationError("gamma must be >= 1");
  if (!(phi > 0.0 && phi <= 1.0)) throw ValidationError("phi must be in (0,1]");
  const double g = static_cast<double>(gamma);
  const double mean = g / phi;
  const double second = g * g * (2.0 - phi) / (phi * phi);
  return {mean, second};
}

double reset_aoi_c0(double p_sch_eff, int gamma) {
  if (!(p_sch_eff > 0.0)) throw ValidationError("p_sch_eff must be > 0");
  return 1.0 / p_sch_eff + (gamma - 1) / 2.0 + gamma + 1.0;
}

double expected_reset(double p_sch_eff, int gamma, double phi) {
  return reset_aoi_c0(p_sch_eff, gamma) + (1.0 / phi - 1.0) * gamma;
}

AoiPrediction average_aoi(double p_sch, double x, int gamma, double phi) {
  const double p_eff = effective_sch_prob(p_sch, x);
  if (!(phi > 0.0 && phi <= 1.0)) throw ValidationError("phi must be in (0,1]");

  AoiPrediction out;
  out.c0_ms = reset_aoi_c0(p_eff, gamma);
  out.expected_reset_ms = expected_reset(p_eff, gamma, phi);
  auto [mean_t, second_t] = inter_success_moments(gamma, phi);
  out.mean_inter_success_ms = mean_t;
  out.second_moment_inter_success = second_t;

  const double via_renewal = out.expected_reset_ms + second_t / (2.0 * mean_t);
  const double via_closed = out.c0_ms + gamma * (2.0 / phi - 1.5);
  if (std::abs(via_renewal - via_closed) > 1e-9 * std::max(1.0, std::abs(via_closed)))
    throw std::logic_error("average_aoi: renewal and closed-form paths disagree");
  out.average_aoi_ms = via_closed;
  return out;
}

}  // namespace aoistarve
