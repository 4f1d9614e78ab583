#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stefan/sde.hpp"

namespace stefan {

struct CheckEntry {
  std::string name;
  std::string claim;  // the inequality/identity being tested, spelled out
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool inconclusive = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckEntry> entries;

  void add(CheckEntry e) { entries.push_back(std::move(e)); }
  bool all_pass() const;  // inconclusive entries do not fail the report
  void print_table(std::ostream& os) const;
};

// Per-step energy bookkeeping of one path, rebuilt from the stored increments.
//   dissipation   2 dt * quad[ Psi'(X) |grad X|^2 ]
//   correction    2 dt * quad[ (grad (g o temp))(X)^T Q grad X ]
//   ito_quadratic dt * sum_k || P_n(alpha_k sigma_k . grad eta) ||_2^2
//   martingale    2 sum_k (X, diffusion_k) dW_k     (the realized form)
// The closure defect tests the discrete Ito expansion of the step against the
// scheme's own inner products (flux and correction parts paired with X in
// coefficient space); the pointwise-quadrature entries above additionally
// carry the aliasing of the composite nonlinearities, which the energy
// tolerance absorbs but a dt^2 budget cannot.
struct LedgerRow {
  double e2_before = 0.0;
  double dissipation = 0.0;
  double correction = 0.0;
  double ito_quadratic = 0.0;
  double martingale = 0.0;
  double dissipation_scheme = 0.0;  // -2 dt (X, Lap P_n Psi(X))
  double correction_scheme = 0.0;   // -2 dt (X, divergence drift part)
  double closure_defect = 0.0;
  double closure_budget = 0.0;
};

struct PathLedger {
  std::vector<LedgerRow> rows;
  double e2_final = 0.0;
  bool blew_up = false;
};

struct VerifyOptions {
  double c_e = 0.0;        // energy slack coefficient; <= 0 means calibrate now
  int check_nodes = 2111;  // interior nodes/axis of the cancellation quadrature
  int weak_modes = 8;
  int moment_r = 4;
  double moment_beta = 5.0;
  int moment_origins = 16;
  int min_moment_paths = 200;
  int threads = 0;  // 0 = hardware
};

// The energy-slack coefficient: measured once on the exactly-solvable heat
// reduction (single mode, fine dt) and frozen with a 10x margin.
double calibrate_energy_slack();

class Verifier {
 public:
  Verifier(const Simulation& sim, VerifyOptions opt);

  double tol_disc() const { return tol_disc_; }
  double energy_slack_coefficient() const { return opt_.c_e; }

  PathLedger build_ledger(const Trajectory& tr) const;

  CheckEntry energy_check(const std::vector<Trajectory>& ens);
  CheckEntry sup_bound_check(const std::vector<Trajectory>& ens) const;
  CheckEntry domination_check(const std::vector<Trajectory>& ens);
  CheckEntry ledger_closure(const std::vector<Trajectory>& ens);
  CheckEntry martingale_cancellation(const std::vector<Trajectory>& ens) const;
  CheckEntry weak_form_residual(const std::vector<Trajectory>& ens) const;
  std::vector<CheckEntry> increment_moment_scaling(const std::vector<Trajectory>& ens) const;
  std::vector<CheckEntry> assumption_checks() const;  // (Ip1)-(Ip3) + model hypotheses

  VerificationReport run_all(const std::vector<Trajectory>& ens);

 private:
  const Simulation* sim_;
  VerifyOptions opt_;
  double tol_disc_ = 0.0;
  std::optional<std::vector<PathLedger>> ledgers_;

  const std::vector<PathLedger>& ledgers(const std::vector<Trajectory>& ens);
};

struct ConvergenceResult {
  std::vector<int> modes;       // n = m^dim per run
  std::vector<double> distance; // D(n) = max_t || X^(next) - X^(n) ||_{H^-1}
  CheckEntry entry;
};

// Cauchy differences of the Galerkin hierarchy under shared driving noise.
// All runs use the coarsest stable dt so the increments line up step by step.
ConvergenceResult galerkin_convergence(const SimConfig& base, const std::vector<int>& m_list);

// Slope of log E|increment|^r vs log lag by least squares.
double fit_loglog_slope(const std::vector<double>& lags, const std::vector<double>& means);

}  // namespace stefan
