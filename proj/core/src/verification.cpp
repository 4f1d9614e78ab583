#include "stefan/verification.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "stefan/errors.hpp"
#include "stefan/reduce.hpp"

namespace stefan {

namespace {

void parallel_paths(int count, int threads, const std::function<void(int)>& fn) {
  const int T = std::max(1, std::min(threads, count));
  if (T == 1) {
    for (int p = 0; p < count; ++p) fn(p);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(T);
  for (int t = 0; t < T; ++t)
    pool.emplace_back([t, T, count, &fn] {
      for (int p = t; p < count; p += T) fn(p);
    });
  for (auto& th : pool) th.join();
}

// interior-grid field extended by the zero boundary ring
std::vector<double> with_boundary(const Basis& basis, std::span<const double> interior) {
  const int M = basis.grid_per_axis();
  if (basis.dim() == 1) {
    std::vector<double> out(M + 2, 0.0);
    for (int i = 0; i < M; ++i) out[i + 1] = interior[i];
    return out;
  }
  const int P = M + 2;
  std::vector<double> out(std::size_t(P) * P, 0.0);
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      out[std::size_t(i1 + 1) * P + (i2 + 1)] = interior[std::size_t(i1) * M + i2];
  return out;
}

double vec_norm2(std::span<const double> v) { return Basis::norm_l2(v); }

}  // namespace

bool VerificationReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.inconclusive && !e.pass) return false;
  return true;
}

void VerificationReport::print_table(std::ostream& os) const {
  os << std::left << std::setw(44) << "check" << std::setw(14) << "measured" << std::setw(14)
     << "bound" << "status\n";
  for (const auto& e : entries) {
    os << std::left << std::setw(44) << e.name << std::setw(14) << std::setprecision(4)
       << std::scientific << e.measured << std::setw(14) << e.bound
       << (e.inconclusive ? "INCONCLUSIVE" : (e.pass ? "pass" : "FAIL"));
    if (!e.detail.empty()) os << "  [" << e.detail << "]";
    os << "\n";
  }
  os.flags(std::ios::fmtflags{});
}

double calibrate_energy_slack() {
  SimConfig cfg;
  cfg.basis = {2, 16, 64};
  cfg.phys = PhysicalParams{1.0, 1.0, 1.0, 1.0, /*latent*/ 0.0, 0.05, 1.0, 0.05,
                            /*psi_floor*/ 1.0, 0.1};
  cfg.noise = {0, 0.0, 2.0};
  cfg.t_final = 0.01;
  cfg.dt = 1e-5;
  cfg.ic = {InitialCondition::Kind::mode, 0, 1.0, 1.0, 1.0, 0.1, ""};
  cfg.paths = 1;
  cfg.save_every = 100;
  Simulation sim(cfg);
  Trajectory tr = sim.simulate_path(0);
  VerifyOptions opt;
  opt.c_e = 1.0;  // placeholder; only the ledger is used here
  Verifier ver(sim, opt);
  PathLedger led = ver.build_ledger(tr);
  double cum = 0.0, e0 = led.rows.front().e2_before, excess = 0.0;
  for (std::size_t s = 0; s < led.rows.size(); ++s) {
    cum += led.rows[s].dissipation;
    const double e2 =
        s + 1 < led.rows.size() ? led.rows[s + 1].e2_before : led.e2_final;
    excess = std::max(excess, (e2 + cum - e0) / e0);
  }
  const double raw = excess / (cfg.dt * sim.basis().lambda_max());
  return 10.0 * std::max(raw, 1e-6);
}

Verifier::Verifier(const Simulation& sim, VerifyOptions opt) : sim_(&sim), opt_(opt) {
  if (opt_.c_e <= 0.0) opt_.c_e = calibrate_energy_slack();
  opt_.threads = hardware_threads_or(opt_.threads);
  tol_disc_ = opt_.c_e * sim.dt() * sim.basis().lambda_max();
}

PathLedger Verifier::build_ledger(const Trajectory& tr) const {
  const Basis& basis = sim_->basis();
  const EnthalpyModel& model = sim_->model();
  const NoiseModel& noise = sim_->noise();
  const GalerkinSystem& sys = sim_->system();
  const int n = basis.num_modes();
  const int K = noise.num_modes();
  const double dt = tr.dt;

  PathLedger led;
  led.blew_up = tr.blew_up;
  led.rows.reserve(tr.num_steps);

  NodeEval nev(basis, basis.grid_per_axis());
  const std::size_t P = nev.grid_size();
  std::vector<double> xg(P), g1(P), g2(P), integ(P);
  const std::vector<double> q11b = with_boundary(basis, noise.q11());
  const std::vector<double> q12b = with_boundary(basis, noise.q12());
  const std::vector<double> q22b = with_boundary(basis, noise.q22());
  const bool noisy = noise.spec().alpha0 > 0.0;

  std::vector<double> state(tr.states.front());
  std::vector<double> dr(n);
  std::vector<std::vector<double>> df;
  SpectralScratch ws;

  const int steps = tr.blew_up ? tr.blowup_step : tr.num_steps;
  for (int s = 0; s < steps; ++s) {
    LedgerRow row;
    row.e2_before = dot_pairwise(state.data(), state.data(), state.size());

    nev.field(state, xg);
    nev.gradient(state, g1, g2);
    for (std::size_t i = 0; i < P; ++i)
      integ[i] = model.flux_potential_slope(xg[i]) * (g1[i] * g1[i] + g2[i] * g2[i]);
    row.dissipation = 2.0 * dt * nev.trapezoid(integ);
    if (noisy) {
      for (std::size_t i = 0; i < P; ++i) {
        const double w = model.temperature(xg[i]);
        const double chain = model.correction_potential_slope(w) * model.temperature_slope(xg[i]);
        const double qg1 = q11b[i] * g1[i] + q12b[i] * g2[i];
        const double qg2 = q12b[i] * g1[i] + q22b[i] * g2[i];
        integ[i] = chain * (g1[i] * qg1 + g2[i] * qg2);
      }
      row.correction = 2.0 * dt * nev.trapezoid(integ);
    }

    sys.apply(state, dr, df, ws);
    const double* dw = &tr.dw[std::size_t(s) * tr.noise_dim];
    double ito = 0.0, mart = 0.0, diff_kick = 0.0;
    for (int k = 0; k < K; ++k) {
      const double nk2 = dot_pairwise(df[k].data(), df[k].data(), n);
      ito += nk2;
      mart += dot_pairwise(state.data(), df[k].data(), n) * dw[k];
      diff_kick += std::sqrt(nk2) * std::fabs(dw[k]);
    }
    row.ito_quadratic = dt * ito;
    row.martingale = 2.0 * mart;

    // the scheme's own energy split: flux part recomputed independently,
    // the divergence part as the drift remainder
    {
      std::vector<double> psi_grid(basis.grid_size());
      std::vector<double> psih(n);
      std::vector<double> xf(basis.grid_size());
      basis.synthesize(state, xf, ws);
      for (int i = 0; i < basis.grid_size(); ++i) psi_grid[i] = model.flux_potential(xf[i]);
      basis.project(psi_grid, psih, ws);
      std::vector<double> terms(n);
      for (int j = 0; j < n; ++j) terms[j] = basis.eigenvalue(j) * state[j] * psih[j];
      row.dissipation_scheme = 2.0 * dt * sum_pairwise(terms);
      const auto src = sys.source_coeffs();
      for (int j = 0; j < n; ++j)
        terms[j] = state[j] * (dr[j] + basis.eigenvalue(j) * psih[j] - src[j]);
      row.correction_scheme = -2.0 * dt * sum_pairwise(terms);
    }

    // advance (must replicate step_em exactly)
    for (int j = 0; j < n; ++j) {
      double incr = dt * dr[j];
      for (int k = 0; k < K; ++k) incr += df[k][j] * dw[k];
      state[j] += incr;
    }
    const double e2_after = dot_pairwise(state.data(), state.data(), state.size());
    row.closure_defect = (e2_after - row.e2_before) + row.dissipation_scheme +
                         row.correction_scheme - row.ito_quadratic - row.martingale;
    const double drift_norm = vec_norm2(dr);
    const double kick = dt * drift_norm + diff_kick;
    row.closure_budget = 1e-6 * row.e2_before + kick * kick + row.ito_quadratic;
    led.rows.push_back(row);
  }
  led.e2_final = dot_pairwise(state.data(), state.data(), state.size());
  return led;
}

const std::vector<PathLedger>& Verifier::ledgers(const std::vector<Trajectory>& ens) {
  if (!ledgers_) {
    std::vector<PathLedger> out(ens.size());
    parallel_paths(static_cast<int>(ens.size()), opt_.threads,
                   [&](int p) { out[p] = build_ledger(ens[p]); });
    ledgers_ = std::move(out);
  }
  return *ledgers_;
}

CheckEntry Verifier::energy_check(const std::vector<Trajectory>& ens) {
  CheckEntry e;
  e.name = "energy inequality (pathwise)";
  e.claim = "max_t ||X(t)||^2 + 2 int_0^t quad[Psi'(X)|grad X|^2] <= ||X(0)||^2 (1 + tol_disc)";
  e.bound = tol_disc_;
  const auto& leds = ledgers(ens);
  double worst = -1e300;
  std::vector<double> per_path;
  int blown = 0;
  for (std::size_t p = 0; p < ens.size(); ++p) {
    const auto& led = leds[p];
    if (led.blew_up) {
      ++blown;
      continue;
    }
    const auto& tr = ens[p];
    const double e0 = led.rows.front().e2_before;
    double cum = 0.0, path_worst = 0.0;
    for (int s = 0; s < tr.num_steps; ++s) {
      cum += led.rows[s].dissipation;
      const bool snap = (s + 1) % tr.save_every == 0 || s + 1 == tr.num_steps;
      if (!snap) continue;
      const double e2 = s + 1 < tr.num_steps ? led.rows[s + 1].e2_before : led.e2_final;
      path_worst = std::max(path_worst, (e2 + cum - e0) / e0);
    }
    per_path.push_back(path_worst);
    worst = std::max(worst, path_worst);
  }
  e.measured = worst;
  e.pass = worst <= tol_disc_ && blown == 0;
  // ensemble-mean version with the Monte Carlo half-width added to the budget
  if (per_path.size() > 1) {
    const double mean = sum_pairwise(per_path) / per_path.size();
    double var = 0.0;
    for (double v : per_path) var += (v - mean) * (v - mean);
    var /= (per_path.size() - 1);
    const double half = 1.96 * std::sqrt(var / per_path.size());
    std::ostringstream os;
    os << "paths=" << per_path.size() << " mean_excess=" << mean << " mc_half=" << half;
    e.detail = os.str();
    e.pass = e.pass && mean <= tol_disc_ + half;
  }
  if (blown > 0) e.detail += " blown_paths=" + std::to_string(blown);
  return e;
}

CheckEntry Verifier::sup_bound_check(const std::vector<Trajectory>& ens) const {
  CheckEntry e;
  e.name = "sup bound";
  e.claim = "sup_t ||X(t)||^2 <= ||X(0)||^2 (1 + tol_disc)";
  e.bound = tol_disc_;
  double worst = 0.0;
  for (const auto& tr : ens) {
    const double e0 = dot_pairwise(tr.states[0].data(), tr.states[0].data(), tr.states[0].size());
    for (const auto& st : tr.states) {
      const double e2 = dot_pairwise(st.data(), st.data(), st.size());
      worst = std::max(worst, (e2 - e0) / e0);
    }
  }
  e.measured = worst;
  e.pass = worst <= tol_disc_;
  return e;
}

CheckEntry Verifier::domination_check(const std::vector<Trajectory>& ens) {
  CheckEntry e;
  e.name = "Ito-term domination";
  e.claim = "per step: dt sum_k ||P_n(alpha_k sigma_k . grad eta)||^2 <= 2 * correction + 1e-10";
  e.bound = 1e-10;
  const auto& leds = ledgers(ens);
  double worst = -1e300;
  bool nonneg = true;
  for (const auto& led : leds)
    for (const auto& row : led.rows) {
      worst = std::max(worst, row.ito_quadratic - 2.0 * row.correction);
      nonneg = nonneg && row.dissipation >= 0.0 && row.correction >= 0.0;
    }
  e.measured = worst;
  e.pass = worst <= 1e-10 && nonneg;
  if (!nonneg) e.detail = "negative dissipation or correction entry";
  return e;
}

CheckEntry Verifier::ledger_closure(const std::vector<Trajectory>& ens) {
  CheckEntry e;
  e.name = "discrete energy ledger closure";
  e.claim = "d||X||^2 = -dissipation - correction + ito + martingale up to 1e-6||X||^2 + c dt^2";
  const auto& leds = ledgers(ens);
  double worst = -1e300;
  for (const auto& led : leds)
    for (const auto& row : led.rows)
      worst = std::max(worst, std::fabs(row.closure_defect) - row.closure_budget);
  e.measured = worst;
  e.bound = 0.0;
  e.pass = worst <= 0.0;
  return e;
}

CheckEntry Verifier::martingale_cancellation(const std::vector<Trajectory>& ens) const {
  CheckEntry e;
  e.name = "martingale-term cancellation";
  e.claim = "|(eta(temp(X)), sigma_k . grad X)_2| <= 1e-8 (1 + ||X||_H1), all snapshots and modes";
  e.bound = 1e-8;
  const Basis& basis = sim_->basis();
  const NoiseModel& noise = sim_->noise();
  const EnthalpyModel& model = sim_->model();
  const int K = noise.num_modes();
  if (noise.spec().alpha0 == 0.0 || K == 0) {
    e.pass = true;
    e.detail = "no noise modes; identity holds trivially";
    return e;
  }

  NodeEval nev(basis, opt_.check_nodes);
  const int P = nev.nodes_per_axis();

  struct Item {
    int path, snap;
  };
  std::vector<Item> items;
  for (std::size_t p = 0; p < ens.size(); ++p)
    for (std::size_t s = 0; s < ens[p].states.size(); ++s)
      items.push_back({static_cast<int>(p), static_cast<int>(s)});
  std::vector<double> ratios(items.size(), 0.0);

  // distinct per-axis factors of the sigma family, so each row/column
  // contraction of the big arrays is shared by every mode with that factor
  std::vector<int> a_vals, b_vals;
  for (int k = 0; k < K; ++k) {
    const Mode mo = noise.mode(k);
    if (std::find(a_vals.begin(), a_vals.end(), mo.k1) == a_vals.end())
      a_vals.push_back(mo.k1);
    if (std::find(b_vals.begin(), b_vals.end(), mo.k2) == b_vals.end())
      b_vals.push_back(mo.k2);
  }

  parallel_paths(static_cast<int>(items.size()), opt_.threads, [&](int idx) {
    const auto& st = ens[items[idx].path].states[items[idx].snap];
    std::vector<double> xg(nev.grid_size()), g1(nev.grid_size()), g2(nev.grid_size());
    nev.field(st, xg);
    nev.gradient(st, g1, g2);
    // E*G1 and E*G2 once; each sigma_k is a rank-1 tensor of 1D tables
    for (std::size_t i = 0; i < xg.size(); ++i) {
      const double eta = model.transport_cutoff(model.temperature(xg[i]));
      g1[i] *= eta;
      g2[i] *= eta;
    }
    constexpr double kPi = 3.14159265358979323846;
    const double h = nev.spacing();
    std::vector<double> sa(P), ca(P), sb(P), cb(P), wf(P);
    for (int i = 0; i < P; ++i) wf[i] = (i == 0 || i == P - 1) ? 0.5 : 1.0;
    // R1[b][i1] = sum_i2 (E G1)[i1,i2] w sb cb;  R2[a][i2] = sum_i1 (E G2)[i1,i2] w sa ca
    std::vector<std::vector<double>> R1(b_vals.size()), R2(a_vals.size());
    for (std::size_t bi = 0; bi < b_vals.size(); ++bi) {
      nev.sin_table(b_vals[bi], sb);
      nev.cos_table(b_vals[bi], cb);
      for (int i = 0; i < P; ++i) sb[i] *= cb[i] * wf[i];
      R1[bi].resize(P);
      for (int i1 = 0; i1 < P; ++i1)
        R1[bi][i1] = dot_pairwise(&g1[std::size_t(i1) * P], sb.data(), P);
    }
    // transpose E G2 so the column contractions stay fixed-order pairwise
    std::vector<double> g2t(g2.size());
    for (int i1 = 0; i1 < P; ++i1)
      for (int i2 = 0; i2 < P; ++i2) g2t[std::size_t(i2) * P + i1] = g2[std::size_t(i1) * P + i2];
    for (std::size_t ai = 0; ai < a_vals.size(); ++ai) {
      nev.sin_table(a_vals[ai], sa);
      nev.cos_table(a_vals[ai], ca);
      for (int i = 0; i < P; ++i) sa[i] *= ca[i] * wf[i];
      R2[ai].resize(P);
      for (int i2 = 0; i2 < P; ++i2)
        R2[ai][i2] = dot_pairwise(&g2t[std::size_t(i2) * P], sa.data(), P);
    }
    const double h1 = sim_->basis().norm_h1(st);
    double worst = 0.0;
    std::vector<double> u(P);
    for (int k = 0; k < K; ++k) {
      const Mode mo = noise.mode(k);
      const std::size_t ai =
          std::find(a_vals.begin(), a_vals.end(), mo.k1) - a_vals.begin();
      const std::size_t bi =
          std::find(b_vals.begin(), b_vals.end(), mo.k2) - b_vals.begin();
      nev.sin_table(mo.k1, sa);
      for (int i = 0; i < P; ++i) u[i] = sa[i] * sa[i] * wf[i];
      double I = 4.0 * mo.k2 * kPi * h * h * dot_pairwise(u.data(), R1[bi].data(), P);
      nev.sin_table(mo.k2, sb);
      for (int i = 0; i < P; ++i) u[i] = sb[i] * sb[i] * wf[i];
      I -= 4.0 * mo.k1 * kPi * h * h * dot_pairwise(u.data(), R2[ai].data(), P);
      worst = std::max(worst, std::fabs(I) / (1.0 + h1));
    }
    ratios[idx] = worst;
  });
  e.measured = *std::max_element(ratios.begin(), ratios.end());
  e.pass = e.measured <= e.bound;
  e.detail = "check grid " + std::to_string(opt_.check_nodes) + "^2";
  return e;
}

CheckEntry Verifier::weak_form_residual(const std::vector<Trajectory>& ens) const {
  CheckEntry e;
  e.name = "weak-form residual (dual code path)";
  e.claim = "(X(t),e_j) reconstructed from quadratures of the weak formulation, j < 8";
  e.bound = 1e-8;
  const Basis& basis = sim_->basis();
  const EnthalpyModel& model = sim_->model();
  const NoiseModel& noise = sim_->noise();
  const GalerkinSystem& sys = sim_->system();
  const int n = basis.num_modes();
  const int K = noise.num_modes();
  const int J = std::min(opt_.weak_modes, n);
  const bool noisy = noise.spec().alpha0 > 0.0;

  if (ens.empty() || (ens[0].noise_dim > 0 && ens[0].dw.empty())) {
    e.inconclusive = true;
    e.detail = "replay data absent";
    return e;
  }
  const Trajectory& tr = ens[0];
  if (tr.blew_up) {
    e.inconclusive = true;
    e.detail = "path blew up";
    return e;
  }

  NodeEval nev(basis, basis.grid_per_axis());
  const std::size_t G = nev.grid_size();
  const int P = nev.nodes_per_axis();

  // spatial weights per tracked mode: e_j, div[Q grad e_j], grad e_j tables
  std::vector<std::vector<double>> ej(J), divqj(J);
  SpectralScratch ws;
  {
    const int M = basis.grid_per_axis();
    const int GI = basis.grid_size();
    std::vector<double> eg1(GI), eg2(GI), u1(GI), u2(GI), t1(GI), t2(GI), div(GI);
    for (int j = 0; j < J; ++j) {
      ej[j].resize(G);
      std::vector<double> cj(n, 0.0);
      cj[j] = 1.0;
      nev.field(cj, ej[j]);
      if (noisy && basis.dim() == 2) {
        basis.eigenfunction_gradient(j, eg1, eg2);
        const auto q11 = noise.q11();
        const auto q12 = noise.q12();
        const auto q22 = noise.q22();
        for (int i = 0; i < GI; ++i) {
          u1[i] = q11[i] * eg1[i] + q12[i] * eg2[i];
          u2[i] = q12[i] * eg1[i] + q22[i] * eg2[i];
        }
        basis.gradient(u1, t1, t2, ws);
        div = t1;
        basis.gradient(u2, t1, t2, ws);
        for (int i = 0; i < GI; ++i) div[i] += t2[i];
        divqj[j] = with_boundary(basis, div);
      } else {
        divqj[j].assign(G, 0.0);
      }
    }
  }

  std::vector<double> state(tr.states[0]);
  std::vector<double> rhs(J);
  for (int j = 0; j < J; ++j) rhs[j] = state[j];
  std::vector<double> xg(G), integ(G), etag(G), gg(G);
  std::vector<double> dr(n);
  std::vector<std::vector<double>> df;
  std::vector<double> sa(P), ca(P), sb(P), cb(P), u(P), v(P);
  constexpr double kPi = 3.14159265358979323846;
  const double dt = tr.dt;
  double worst = 0.0;
  int snap = 1;

  for (int s = 0; s < tr.num_steps; ++s) {
    nev.field(state, xg);
    const double* dw = &tr.dw[std::size_t(s) * tr.noise_dim];
    for (std::size_t i = 0; i < G; ++i) {
      const double w = noisy ? model.temperature(xg[i]) : 0.0;
      integ[i] = model.flux_potential(xg[i]);
      if (noisy) {
        etag[i] = model.transport_cutoff(w);
        gg[i] = model.correction_potential(w);
      }
    }
    for (int j = 0; j < J; ++j) {
      double incr = dt * sys.source_coeffs()[j];
      // flux term against Delta e_j = -lambda_j e_j
      std::vector<double> prod(G);
      for (std::size_t i = 0; i < G; ++i) prod[i] = integ[i] * ej[j][i];
      incr += -basis.eigenvalue(j) * dt * nev.trapezoid(prod);
      if (noisy) {
        for (std::size_t i = 0; i < G; ++i) prod[i] = gg[i] * divqj[j][i];
        incr += dt * nev.trapezoid(prod);
        // stochastic term: alpha_k (eta, sigma_k . grad e_j) dW_k with the
        // rank-1 structure of both sigma_k and grad e_j
        const Mode mj = basis.modes()[j];
        for (int k = 0; k < K; ++k) {
          const Mode mk = noise.mode(k);
          nev.sin_table(mk.k1, sa);
          nev.cos_table(mk.k1, ca);
          nev.sin_table(mk.k2, sb);
          nev.cos_table(mk.k2, cb);
          // sigma_k1 * d1 e_j: (4 b pi sa^2 (x) sb cb) * (2 pi j1 cos(j1 x1) sin(j2 x2))
          for (int i = 0; i < P; ++i) {
            const double x = nev.node(i);
            u[i] = sa[i] * sa[i] * std::cos(mj.k1 * kPi * x);
            v[i] = sb[i] * cb[i] * std::sin(mj.k2 * kPi * x);
          }
          double I = 8.0 * mk.k2 * mj.k1 * kPi * kPi * nev.trapezoid_weighted(etag, u, v);
          for (int i = 0; i < P; ++i) {
            const double x = nev.node(i);
            u[i] = sa[i] * ca[i] * std::sin(mj.k1 * kPi * x);
            v[i] = sb[i] * sb[i] * std::cos(mj.k2 * kPi * x);
          }
          I -= 8.0 * mk.k1 * mj.k2 * kPi * kPi * nev.trapezoid_weighted(etag, u, v);
          incr += noise.alpha(k) * I * dw[k];
        }
      }
      rhs[j] += incr;
    }
    // advance with the integrator's own arithmetic
    sys.apply(state, dr, df, ws);
    for (int j = 0; j < n; ++j) {
      double incr = dt * dr[j];
      for (int k = 0; k < K; ++k) incr += df[k][j] * dw[k];
      state[j] += incr;
    }
    if ((s + 1) % tr.save_every == 0 || s + 1 == tr.num_steps) {
      // states must agree with the recorded snapshots bit-for-bit
      for (int j = 0; j < J; ++j) {
        const double lhs = tr.states[snap][j];
        worst = std::max(worst, std::fabs(lhs - rhs[j]) / (1.0 + std::fabs(lhs)));
      }
      ++snap;
    }
  }
  e.measured = worst;
  e.pass = worst <= e.bound;
  return e;
}

std::vector<CheckEntry> Verifier::increment_moment_scaling(
    const std::vector<Trajectory>& ens) const {
  std::vector<CheckEntry> out;
  const Basis& basis = sim_->basis();
  const int r = opt_.moment_r;
  const double beta = opt_.moment_beta;
  const double dt = sim_->dt();
  const int steps = sim_->num_steps();
  const int JM = std::min(8, basis.num_modes());

  // dyadic lags within [10 dt, T/4]
  std::vector<int> lag_steps;
  for (int L = 10; L * dt <= sim_->config().t_final / 4.0 && L < steps; L *= 2)
    lag_steps.push_back(L);

  CheckEntry scaling;
  scaling.name = "increment moment scaling (H^-beta)";
  scaling.claim = "E||X_t - X_s||_{H^-beta}^r <= C |t-s|^{r/2}: fitted slope >= 0.85 r/2";
  scaling.bound = 0.85 * r / 2.0;

  if (static_cast<int>(ens.size()) < opt_.min_moment_paths || lag_steps.size() < 3) {
    scaling.inconclusive = true;
    scaling.detail = lag_steps.size() < 3 ? "lag window too short" : "ensemble too small";
    out.push_back(scaling);
    return out;
  }

  const int maxlag = lag_steps.back();
  std::vector<int> origins;
  for (int q = 0; q < opt_.moment_origins; ++q)
    origins.push_back(q * std::max(1, (steps - maxlag)) / opt_.moment_origins);

  // steps at which states are needed
  std::vector<int> marks;
  for (int o : origins) {
    marks.push_back(o);
    for (int L : lag_steps) marks.push_back(o + L);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  const std::size_t nl = lag_steps.size();
  const bool hook = sim_->config().brownian_test_signal;
  std::vector<std::vector<double>> hb_sums(ens.size(), std::vector<double>(nl, 0.0));
  std::vector<std::vector<double>> mode_sums(ens.size(), std::vector<double>(nl * JM, 0.0));
  std::vector<std::vector<double>> allmode_sums(ens.size(), std::vector<double>(nl, 0.0));
  std::vector<int> counts(ens.size(), 0);

  parallel_paths(static_cast<int>(ens.size()), opt_.threads, [&](int p) {
    const Trajectory& tr = ens[p];
    if (tr.blew_up) return;
    // collect states at the marked steps by replaying the stored increments
    std::vector<std::vector<double>> at(marks.size());
    if (tr.save_every == 1) {
      for (std::size_t i = 0; i < marks.size(); ++i) at[i] = tr.states.at(marks[i]);
    } else {
      Trajectory rep;
      std::vector<double> state(tr.states[0]);
      SpectralScratch ws;
      const GalerkinSystem& sys = sim_->system();
      std::size_t mi = 0;
      for (std::size_t i = 0; i < marks.size() && marks[i] == 0; ++i) at[mi++] = state;
      for (int s = 0; s < tr.num_steps && mi < marks.size(); ++s) {
        const double* dw = &tr.dw[std::size_t(s) * tr.noise_dim];
        if (sim_->config().brownian_test_signal) {
          for (int j = 0; j < basis.num_modes(); ++j) state[j] += dw[j];
        } else {
          sys.step_em(state, tr.dt, std::span<const double>(dw, tr.noise_dim), ws);
        }
        while (mi < marks.size() && marks[mi] == s + 1) at[mi++] = state;
      }
    }
    auto state_at = [&](int step) -> const std::vector<double>& {
      const auto it = std::lower_bound(marks.begin(), marks.end(), step);
      return at[std::distance(marks.begin(), it)];
    };
    std::vector<double> diff(basis.num_modes());
    for (int o : origins) {
      for (std::size_t li = 0; li < nl; ++li) {
        const auto& a = state_at(o);
        const auto& b = state_at(o + lag_steps[li]);
        for (int j = 0; j < basis.num_modes(); ++j) diff[j] = b[j] - a[j];
        const double hb = basis.norm_h_minus(diff, beta);
        hb_sums[p][li] += std::pow(hb, r);
        for (int j = 0; j < JM; ++j)
          mode_sums[p][li * JM + j] += std::pow(std::fabs(diff[j]), r);
        if (hook) {
          double acc = 0.0;
          for (int j = 0; j < basis.num_modes(); ++j) acc += std::pow(std::fabs(diff[j]), r);
          allmode_sums[p][li] += acc;
        }
      }
      counts[p] += 1;
    }
  });

  // deterministic merge by path index
  std::vector<double> lags(nl);
  for (std::size_t li = 0; li < nl; ++li) lags[li] = lag_steps[li] * dt;
  long total = 0;
  for (int c : counts) total += c;
  std::vector<double> hb_mean(nl, 0.0);
  std::vector<std::vector<double>> mode_mean(JM, std::vector<double>(nl, 0.0));
  for (std::size_t li = 0; li < nl; ++li) {
    std::vector<double> acc(ens.size());
    for (std::size_t p = 0; p < ens.size(); ++p) acc[p] = hb_sums[p][li];
    hb_mean[li] = sum_pairwise(acc) / total;
    for (int j = 0; j < JM; ++j) {
      for (std::size_t p = 0; p < ens.size(); ++p) acc[p] = mode_sums[p][li * JM + j];
      mode_mean[j][li] = sum_pairwise(acc) / total;
    }
  }

  scaling.measured = fit_loglog_slope(lags, hb_mean);
  scaling.pass = scaling.measured >= scaling.bound;
  {
    std::ostringstream os;
    os << "lags=" << nl << " samples=" << total;
    scaling.detail = os.str();
  }
  out.push_back(scaling);

  CheckEntry per_mode;
  per_mode.name = "increment moment scaling (per mode)";
  per_mode.claim = "E|(X_t - X_s, e_j)|^r <= C_j |t-s|^{r/2} for j < 8: fitted slopes >= 0.85 r/2";
  per_mode.bound = scaling.bound;
  double min_slope = 1e300;
  int argmin = -1;
  for (int j = 0; j < JM; ++j) {
    const double sl = fit_loglog_slope(lags, mode_mean[j]);
    if (sl < min_slope) {
      min_slope = sl;
      argmin = j;
    }
  }
  per_mode.measured = min_slope;
  per_mode.pass = min_slope >= per_mode.bound;
  per_mode.detail = "worst mode index " + std::to_string(argmin);
  out.push_back(per_mode);

  if (hook) {
    // exact Gaussian oracle, averaged over all modes (independent Brownian
    // coefficients, so the mode-averaged estimator is tight): E|dW_j|^4 = 3 tau^2
    CheckEntry oracle;
    oracle.name = "gaussian test-signal oracle";
    oracle.claim = "Brownian coefficients: fitted slope = 2.0 +- 0.1 and E|dW|^4 = 3 tau^2";
    oracle.bound = 0.1;
    std::vector<double> mam(nl);
    for (std::size_t li = 0; li < nl; ++li) {
      std::vector<double> acc(ens.size());
      for (std::size_t p = 0; p < ens.size(); ++p) acc[p] = allmode_sums[p][li];
      mam[li] = sum_pairwise(acc) / (double(total) * basis.num_modes());
    }
    const double slope = fit_loglog_slope(lags, mam);
    double worst_dev = 0.0;
    for (std::size_t li = 0; li < nl; ++li)
      worst_dev = std::max(worst_dev, std::fabs(mam[li] / (3.0 * lags[li] * lags[li]) - 1.0));
    oracle.measured = std::fabs(slope - 2.0);
    std::ostringstream os;
    os << "slope=" << slope << " worst moment dev=" << worst_dev;
    oracle.detail = os.str();
    oracle.pass = oracle.measured <= 0.1 && worst_dev <= 0.1;
    out.push_back(oracle);
  }
  return out;
}

std::vector<CheckEntry> Verifier::assumption_checks() const {
  std::vector<CheckEntry> out;
  const NoiseModel& noise = sim_->noise();

  const SeriesReport ip1 = noise.check_ip1();
  CheckEntry e1;
  e1.name = "noise series convergence";
  e1.claim = "sum alpha_k^2 lambda_k^2 |mu_k|_inf^2 converges: K->2K block < 1e-3 of total";
  e1.measured = ip1.increment_ratio;
  e1.bound = 1e-3;
  e1.pass = ip1.status == SeriesStatus::converged;
  {
    std::ostringstream os;
    os << "S_K=" << ip1.sum_k << " S_2K=" << ip1.sum_2k << " status="
       << (ip1.status == SeriesStatus::converged
               ? "converged"
               : (ip1.status == SeriesStatus::marginal ? "marginal" : "divergent"));
    e1.detail = os.str();
  }
  out.push_back(e1);

  const PsdReport psd = noise.check_ip2_ip3();
  CheckEntry e2;
  e2.name = "correction matrix positivity";
  e2.claim = "Q(xi) symmetric PSD at every grid point and gamma = max |q_ij| + |dq_ij| finite";
  e2.measured = psd.min_eigenvalue;
  e2.bound = -1e-12;
  e2.pass = psd.psd && psd.gamma_finite;
  {
    std::ostringstream os;
    os << "gamma=" << psd.gamma_const << " trace tail ratio=" << psd.trace_tail_ratio;
    e2.detail = os.str();
  }
  out.push_back(e2);

  const ModelValidation mv = sim_->model().validate_hypotheses(-10.0, 10.0);
  CheckEntry e3;
  e3.name = "constitutive hypotheses";
  e3.claim = "enthalpy slope >= 1, inverse slope in [0,1], Psi' >= psi0, |eta'| <= L";
  e3.pass = mv.pass;
  double worst = 0.0;
  for (const auto& c : mv.checks)
    if (!c.pass) worst = std::max(worst, std::fabs(c.measured - c.bound));
  e3.measured = worst;
  out.push_back(e3);
  return out;
}

VerificationReport Verifier::run_all(const std::vector<Trajectory>& ens) {
  VerificationReport rep;
  for (auto& e : assumption_checks()) rep.add(std::move(e));
  rep.add(energy_check(ens));
  rep.add(sup_bound_check(ens));
  rep.add(domination_check(ens));
  rep.add(ledger_closure(ens));
  rep.add(martingale_cancellation(ens));
  rep.add(weak_form_residual(ens));
  for (auto& e : increment_moment_scaling(ens)) rep.add(std::move(e));
  return rep;
}

double fit_loglog_slope(const std::vector<double>& lags, const std::vector<double>& means) {
  const std::size_t n = lags.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(lags[i]);
    const double y = std::log(std::max(means[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceResult galerkin_convergence(const SimConfig& base, const std::vector<int>& m_list) {
  ConvergenceResult res;
  res.entry.name = "galerkin convergence (Cauchy differences)";
  res.entry.claim = "D(n) = max_t ||X^(next) - X^(n)||_{H^-1} strictly decreasing along n";

  std::vector<SimConfig> cfgs;
  for (int m : m_list) {
    SimConfig c = base;
    c.basis.modes_per_axis = m;
    c.basis.grid_per_axis = std::max(base.basis.grid_per_axis, 4 * m);
    c.dt = 0.0;
    c.paths = 1;
    cfgs.push_back(c);
  }
  // shared time grid: the tightest stability bound of the family
  double dt = 1e300;
  for (auto& c : cfgs) {
    Simulation probe(c);
    dt = std::min(dt, probe.dt());
  }
  for (auto& c : cfgs) c.dt = dt;

  std::vector<Trajectory> runs;
  std::vector<std::unique_ptr<Simulation>> sims;
  for (auto& c : cfgs) {
    sims.push_back(std::make_unique<Simulation>(c));
    runs.push_back(sims.back()->simulate_path(0));
    if (runs.back().blew_up) {
      res.entry.inconclusive = true;
      res.entry.detail = "blow-up at m=" + std::to_string(c.basis.modes_per_axis);
      return res;
    }
  }

  for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
    const Basis& small = sims[r]->basis();
    const Basis& big = sims[r + 1]->basis();
    // index of each small mode inside the big basis
    std::vector<int> map(small.num_modes(), -1);
    for (int js = 0; js < small.num_modes(); ++js)
      for (int jb = 0; jb < big.num_modes(); ++jb)
        if (big.modes()[jb].k1 == small.modes()[js].k1 &&
            big.modes()[jb].k2 == small.modes()[js].k2) {
          map[js] = jb;
          break;
        }
    double worst = 0.0;
    const std::size_t snaps = std::min(runs[r].states.size(), runs[r + 1].states.size());
    std::vector<double> diff(big.num_modes());
    for (std::size_t s = 0; s < snaps; ++s) {
      diff = runs[r + 1].states[s];
      for (int js = 0; js < small.num_modes(); ++js) diff[map[js]] -= runs[r].states[s][js];
      worst = std::max(worst, big.norm_h_minus(diff, 1.0));
    }
    res.modes.push_back(small.num_modes());
    res.distance.push_back(worst);
  }
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < res.distance.size(); ++i)
    decreasing = decreasing && res.distance[i + 1] < res.distance[i];
  res.entry.pass = decreasing;
  res.entry.measured = res.distance.empty() ? 0.0 : res.distance.back();
  std::ostringstream os;
  os << "D:";
  for (double d : res.distance) os << " " << d;
  os << " (dt=" << dt << ")";
  res.entry.detail = os.str();
  return res;
}

}  // namespace stefan
