#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "aoistarve/params.hpp"

namespace aoistarve {

// Explicit DTMC of the SPS state machine over
//   {Idle} u {Wait(w): w in [0, gamma-1]} u {(k, tau): k in [1, rc_max],
//    tau in [0, gamma-1]}.
// Row-stochastic; one step == one subframe.
class DtmcModel {
public:
  int gamma = 0;
  int rc_min = 0;
  int rc_max = 0;
  double p_keep = 0.0;
  double p_sch_eff = 0.0;

  Eigen::SparseMatrix<double, Eigen::RowMajor> transitions;

  int n_states() const { return 1 + gamma + rc_max * gamma; }
  int idle_index() const { return 0; }
  int wait_index(int w) const { return 1 + w; }
  int active_index(int k, int tau) const {
    return 1 + gamma + (k - 1) * gamma + tau;
  }

  bool irreducible() const { return p_keep < 1.0 && p_sch_eff > 0.0; }
};

// Builds the transition matrix. Throws ValidationError if the state count
// exceeds max_states.
DtmcModel build_sps_dtmc(const SpsParams& sps, double p_sch_eff,
                         int max_states = 2000000);

// Stationary distribution pi with pi P = pi, sum(pi) = 1, residual <= 1e-10.
// Direct sparse solve for small chains, power iteration above
// linear_solve_limit states. Throws ValidationError for non-irreducible
// chains.
std::vector<double> stationary_distribution(const DtmcModel& m,
                                            int linear_solve_limit = 50000);

// Expected subframes from entering Idle until the first transmission
// (first visit to any (k, 0)), via a first-step linear system.
double mean_first_passage_idle_to_tx(const DtmcModel& m);

}  // namespace aoistarve
