#include "aoistarve/dtmc.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace aoistarve {

DtmcModel build_sps_dtmc(const SpsParams& sps, double p_sch_eff, int max_states) {
  if (!(p_sch_eff >= 0.0 && p_sch_eff <= 1.0))
    throw ValidationError("p_sch_eff must be in [0,1]");

  DtmcModel m;
  m.gamma = sps.gamma;
  m.rc_min = sps.rc_min;
  m.rc_max = sps.rc_max;
  m.p_keep = sps.p_keep;
  m.p_sch_eff = p_sch_eff;

  const int n = m.n_states();
  if (n > max_states)
    throw ValidationError("DTMC state space too large: " + std::to_string(n) +
                          " states exceeds cap " + std::to_string(max_states));

  const int gamma = m.gamma;
  const double rc_span = static_cast<double>(m.rc_max - m.rc_min + 1);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * 2 + gamma * (m.rc_max - m.rc_min + 2));

  // Idle: self-loop with 1 - P'_sch, otherwise to a uniform Wait(w).
  if (p_sch_eff < 1.0)
    trips.emplace_back(m.idle_index(), m.idle_index(), 1.0 - p_sch_eff);
  for (int w = 0; w < gamma; ++w)
    trips.emplace_back(m.idle_index(), m.wait_index(w), p_sch_eff / gamma);

  // Wait(w) -> Wait(w-1); Wait(0) -> (k, gamma-1), k uniform on [rc_min, rc_max].
  for (int w = 1; w < gamma; ++w)
    trips.emplace_back(m.wait_index(w), m.wait_index(w - 1), 1.0);
  for (int k = m.rc_min; k <= m.rc_max; ++k)
    trips.emplace_back(m.wait_index(0), m.active_index(k, gamma - 1), 1.0 / rc_span);

  // Countdown (k, tau) -> (k, tau-1); at (k, 0): decrement RC or make the
  // keep-or-release decision.
  for (int k = 1; k <= m.rc_max; ++k) {
    for (int tau = 1; tau < gamma; ++tau)
      trips.emplace_back(m.active_index(k, tau), m.active_index(k, tau - 1), 1.0);
    if (k > 1) {
      trips.emplace_back(m.active_index(k, 0), m.active_index(k - 1, gamma - 1), 1.0);
    } else {
      // RC expiry: keep redraws RC uniformly, staying on the same cadence.
      if (m.p_keep > 0.0)
        for (int k2 = m.rc_min; k2 <= m.rc_max; ++k2)
          trips.emplace_back(m.active_index(1, 0), m.active_index(k2, gamma - 1),
                             m.p_keep / rc_span);
      if (m.p_keep < 1.0)
        trips.emplace_back(m.active_index(1, 0), m.idle_index(), 1.0 - m.p_keep);
    }
  }

  m.transitions.resize(n, n);
  m.transitions.setFromTriplets(trips.begin(), trips.end());
  return m;
}

namespace {

std::vector<double> power_iteration(const DtmcModel& m, double tol, int max_iters) {
  const int n = m.n_states();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::SparseMatrix<double> pt = m.transitions.transpose();
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next = pt * pi;
    next /= next.sum();
    const double resid = (next - pi).lpNorm<Eigen::Infinity>();
    pi = next;
    if (resid <= tol) break;
  }
  return {pi.data(), pi.data() + n};
}

}  // namespace

std::vector<double> stationary_distribution(const DtmcModel& m,
                                            int linear_solve_limit) {
  if (!m.irreducible())
    throw ValidationError(
        "stationary_distribution: chain is not irreducible "
        "(requires p_keep < 1 and p_sch_eff > 0)");

  const int n = m.n_states();
  std::vector<double> pi;
  if (n <= linear_solve_limit) {
    // Solve (P^T - I) pi = 0 with the first equation replaced by sum(pi) = 1.
    Eigen::SparseMatrix<double> a = m.transitions.transpose();
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < a.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
        if (it.row() != 0)
          trips.emplace_back(it.row(), it.col(),
                             it.value() - (it.row() == it.col() ? 1.0 : 0.0));
    for (int j = 0; j < n; ++j) trips.emplace_back(0, j, 1.0);
    // Diagonal -1 entries absent from P^T still belong in (P^T - I).
    for (int j = 1; j < n; ++j) {
      if (a.coeff(j, j) == 0.0) trips.emplace_back(j, j, -1.0);
    }
    Eigen::SparseMatrix<double> sys(n, n);
    sys.setFromTriplets(trips.begin(), trips.end(),
                        [](const double& x, const double& y) { return x + y; });
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(sys);
    if (solver.info() != Eigen::Success)
      throw ValidationError("stationary_distribution: singular system");
    Eigen::VectorXd x = solver.solve(rhs);
    x /= x.sum();
    pi.assign(x.data(), x.data() + n);
  } else {
    pi = power_iteration(m, 1e-12, 5000000 / n + 100000);
  }

  // Residual check || pi P - pi ||_inf <= 1e-10.
  Eigen::Map<const Eigen::VectorXd> pv(pi.data(), n);
  Eigen::VectorXd resid =
      (m.transitions.transpose() * pv - pv).cwiseAbs();
  if (resid.maxCoeff() > 1e-10)
    throw ValidationError("stationary_distribution: residual exceeds 1e-10");
  return pi;
}

double mean_first_passage_idle_to_tx(const DtmcModel& m) {
  // h(s) = expected steps to first reach any (k, 0); h = 0 on targets,
  // (I - Q) h = 1 elsewhere.
  const int n = m.n_states();
  std::vector<int> compact(n, -1);
  std::vector<int> full;
  full.reserve(n);
  for (int s = 0; s < n; ++s) {
    bool target = false;
    for (int k = 1; k <= m.rc_max && !target; ++k)
      if (s == m.active_index(k, 0)) target = true;
    if (!target) {
      compact[s] = static_cast<int>(full.size());
      full.push_back(s);
    }
  }
  const int nt = static_cast<int>(full.size());

  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < nt; ++i) {
    const int s = full[i];
    trips.emplace_back(i, i, 1.0);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             m.transitions, s);
         it; ++it) {
      const int sp = static_cast<int>(it.col());
      if (compact[sp] >= 0) trips.emplace_back(i, compact[sp], -it.value());
    }
  }
  Eigen::SparseMatrix<double> sys(nt, nt);
  sys.setFromTriplets(trips.begin(), trips.end(),
                      [](const double& x, const double& y) { return x + y; });
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.compute(sys);
  if (solver.info() != Eigen::Success)
    throw ValidationError("mean_first_passage_idle_to_tx: singular system");
  Eigen::VectorXd h = solver.solve(Eigen::VectorXd::Ones(nt));
  if (solver.info() != Eigen::Success)
    throw ValidationError("mean_first_passage_idle_to_tx: solve failed");
  return h(compact[m.idle_index()]);
}

}  // namespace aoistarve
