#pragma once

#include <utility>

#include "aoistarve/params.hpp"

namespace aoistarve {

// Closed-form AoI prediction for one transmitter under the SPS renewal model.
struct AoiPrediction {
  double c0_ms = 0.0;                    // reset AoI of successful packets
  double expected_reset_ms = 0.0;        // E[D]
  double mean_inter_success_ms = 0.0;    // E[T]
  double second_moment_inter_success = 0.0;  // E[T^2]
  double average_aoi_ms = 0.0;           // time-average AoI
};

// (1 - x) * p_sch. Throws ValidationError for x = 1 (Idle never exits).
double effective_sch_prob(double p_sch, double x);

// mean = gamma / phi, second moment = gamma^2 (2 - phi) / phi^2.
std::pair<double, double> inter_success_moments(int gamma, double phi);

// 1/P'_sch + (gamma - 1)/2 + gamma + 1.
double reset_aoi_c0(double p_sch_eff, int gamma);

// C0 + (1/phi - 1) * gamma.
double expected_reset(double p_sch_eff, int gamma, double phi);

// Full prediction. The average is computed both through the renewal form
// E[D] + E[T^2]/(2 E[T]) and through the collapsed closed form
// C0 + gamma (2/phi - 3/2); the two must agree to 1e-9.
AoiPrediction average_aoi(double p_sch, double x, int gamma, double phi);

}  // namespace aoistarve
