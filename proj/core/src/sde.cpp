#include "stefan/sde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "stefan/errors.hpp"
#include "stefan/reduce.hpp"
#include "stefan/rng.hpp"
#include "stefan/smoothstep.hpp"

namespace stefan {

void SimConfig::validate() const {
  basis.validate();
  phys.validate();
  noise.validate();
  if (t_final <= 0.0) throw ConfigError("config: t_final must be positive");
  if (paths < 1) throw ConfigError("config: paths must be >= 1");
  if (save_every < 1) throw ConfigError("config: save_every must be >= 1");
  if (basis.dim == 1 && noise.alpha0 > 0.0)
    throw ConfigError("config: 1D runs require alpha0 = 0 (no 1D noise fields exist)");
}

GalerkinSystem::GalerkinSystem(const Basis& basis, const EnthalpyModel& model,
                               const NoiseModel& noise, std::vector<double> source_coeffs)
    : basis_(&basis), model_(&model), noise_(&noise), source_(std::move(source_coeffs)) {
  if (source_.empty()) source_.assign(basis.num_modes(), 0.0);
  if (static_cast<int>(source_.size()) != basis.num_modes())
    throw ConfigError("source: coefficient count does not match the basis");
}

double GalerkinSystem::stable_dt() const {
  const auto& p = model_->params();
  const double psip_max = std::max(p.k1 / p.c1, p.k2 / p.c2);
  const double L = p.eta_lipschitz;
  const double lam = basis_->lambda_max();
  return 0.5 / (psip_max * lam + noise_->gamma_const() * L * L * lam + 1.0);
}

void GalerkinSystem::apply(std::span<const double> coeffs, std::span<double> drift_out,
                           std::vector<std::vector<double>>& diffusion_out,
                           SpectralScratch& ws) const {
  const int G = basis_->grid_size();
  const int n = basis_->num_modes();
  const int K = noise_->num_modes();
  const bool noisy = noise_->spec().alpha0 > 0.0;

  std::vector<double> xf(G);
  basis_->synthesize(coeffs, xf, ws);

  // flux term: -lambda_j (Psi(X), e_j)
  std::vector<double> work(G);
  for (int i = 0; i < G; ++i) work[i] = model_->flux_potential(xf[i]);
  std::vector<double> hat(n);
  basis_->project(work, hat, ws);
  for (int j = 0; j < n; ++j) drift_out[j] = -basis_->eigenvalue(j) * hat[j] + source_[j];

  if (!noisy) {
    diffusion_out.assign(K, std::vector<double>(n, 0.0));
    return;
  }

  // pointwise temperature once; both nonlinear chains reuse it
  std::vector<double> temp(G);
  for (int i = 0; i < G; ++i) temp[i] = model_->temperature(xf[i]);

  // correction drift: project( div[ Q * P_n(grad g(temp)) ] )
  std::vector<double> g1(G), g2(G);
  for (int i = 0; i < G; ++i) work[i] = model_->correction_potential(temp[i]);
  basis_->gradient(work, g1, g2, ws);
  std::vector<double> v1(G), v2(G);
  basis_->project(g1, hat, ws);
  basis_->synthesize(hat, v1, ws);
  basis_->project(g2, hat, ws);
  basis_->synthesize(hat, v2, ws);
  const auto q11 = noise_->q11();
  const auto q12 = noise_->q12();
  const auto q22 = noise_->q22();
  std::vector<double> u1(G), u2(G);
  for (int i = 0; i < G; ++i) {
    u1[i] = q11[i] * v1[i] + q12[i] * v2[i];
    u2[i] = q12[i] * v1[i] + q22[i] * v2[i];
  }
  std::vector<double> d1(G), d2(G);
  basis_->gradient(u1, g1, g2, ws);
  d1 = g1;
  basis_->gradient(u2, g1, g2, ws);
  for (int i = 0; i < G; ++i) d1[i] += g2[i];
  basis_->project(d1, hat, ws);
  for (int j = 0; j < n; ++j) drift_out[j] += hat[j];

  // diffusion: -alpha_k (sigma_k . grad eta(temp), e_j)
  for (int i = 0; i < G; ++i) work[i] = model_->transport_cutoff(temp[i]);
  basis_->gradient(work, g1, g2, ws);
  diffusion_out.assign(K, std::vector<double>(n));
  std::vector<double> prod(G);
  for (int k = 0; k < K; ++k) {
    const auto s1 = noise_->sigma1(k);
    const auto s2 = noise_->sigma2(k);
    for (int i = 0; i < G; ++i) prod[i] = s1[i] * g1[i] + s2[i] * g2[i];
    basis_->project(prod, diffusion_out[k], ws);
    const double a = -noise_->alpha(k);
    for (int j = 0; j < n; ++j) diffusion_out[k][j] *= a;
  }
}

void GalerkinSystem::drift(std::span<const double> coeffs, std::span<double> out,
                           SpectralScratch& ws) const {
  std::vector<std::vector<double>> unused;
  apply(coeffs, out, unused, ws);
}

void GalerkinSystem::diffusion(std::span<const double> coeffs,
                               std::vector<std::vector<double>>& out, SpectralScratch& ws) const {
  std::vector<double> unused(basis_->num_modes());
  apply(coeffs, unused, out, ws);
}

bool GalerkinSystem::step_em(std::span<double> state, double dt, std::span<const double> dw,
                             SpectralScratch& ws) const {
  const int n = basis_->num_modes();
  const int K = noise_->num_modes();
  std::vector<double> dr(n);
  std::vector<std::vector<double>> df;
  apply(state, dr, df, ws);
  for (int j = 0; j < n; ++j) {
    double incr = dt * dr[j];
    for (int k = 0; k < K; ++k) incr += df[k][j] * dw[k];
    state[j] += incr;
    if (!std::isfinite(state[j])) return false;
  }
  return true;
}

namespace {

std::vector<double> read_coeff_file(const Basis& basis, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open coefficient file: " + path);
  std::vector<double> c(basis.num_modes(), 0.0);
  std::string line;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_skipped) {
      header_skipped = true;
      if (line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) continue;
    }
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
    if (basis.dim() == 1 && vals.size() == 2) {
      const int k = static_cast<int>(vals[0]);
      if (k >= 1 && k <= basis.modes_per_axis()) c[k - 1] = vals[1];
    } else if (basis.dim() == 2 && vals.size() == 3) {
      const int a = static_cast<int>(vals[0]), b = static_cast<int>(vals[1]);
      for (int j = 0; j < basis.num_modes(); ++j)
        if (basis.modes()[j].k1 == a && basis.modes()[j].k2 == b) {
          c[j] = vals[2];
          break;
        }
    } else {
      throw ConfigError("coefficient file: expected k[,k2],value rows");
    }
  }
  return c;
}

}  // namespace

std::vector<double> build_initial_coeffs(const Basis& basis, const EnthalpyModel& model,
                                         const InitialCondition& ic) {
  std::vector<double> c(basis.num_modes(), 0.0);
  switch (ic.kind) {
    case InitialCondition::Kind::mode:
      if (ic.mode_index < 0 || ic.mode_index >= basis.num_modes())
        throw ConfigError("initial condition: mode index out of range");
      c[ic.mode_index] = ic.amplitude;
      return c;
    case InitialCondition::Kind::coeffs_file:
      return read_coeff_file(basis, ic.file);
    case InitialCondition::Kind::slab:
      break;
  }
  // two-phase slab evaluated on the collocation grid, then projected
  const int M = basis.grid_per_axis();
  const double h = basis.h();
  const double em = model.params().mush_width;
  const double th_b = model.temperature(0.0);  // boundary temperature of zero enthalpy
  const double margin = ic.slab_margin;
  auto window = [margin](double u) {
    return smoothstep::value(u / margin) * smoothstep::value((1.0 - u) / margin);
  };
  auto slab = [&](double u) {
    return -ic.slab_solid +
           (ic.slab_solid + ic.slab_liquid) * smoothstep::value((u - 0.5) / (2.0 * em) + 0.5);
  };
  const int G = basis.grid_size();
  std::vector<double> grid(G);
  if (basis.dim() == 1) {
    for (int i = 0; i < M; ++i) {
      const double x1 = (i + 1) * h;
      const double theta = th_b + window(x1) * (slab(x1) - th_b);
      grid[i] = model.enthalpy(theta);
    }
  } else {
    for (int i1 = 0; i1 < M; ++i1) {
      const double x1 = (i1 + 1) * h;
      const double w1 = window(x1), s1 = slab(x1);
      for (int i2 = 0; i2 < M; ++i2) {
        const double x2 = (i2 + 1) * h;
        const double theta = th_b + w1 * window(x2) * (s1 - th_b);
        grid[std::size_t(i1) * M + i2] = model.enthalpy(theta);
      }
    }
  }
  SpectralScratch ws;
  basis.project(grid, c, ws);
  return c;
}

Simulation::Simulation(const SimConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  basis_ = std::make_unique<Basis>(cfg_.basis);
  model_ = std::make_unique<EnthalpyModel>(cfg_.phys);
  noise_ = std::make_unique<NoiseModel>(*basis_, cfg_.noise);

  std::vector<double> src;
  if (cfg_.source.kind == SourceSpec::Kind::coeffs_file)
    src = read_coeff_file(*basis_, cfg_.source.file);
  system_ = std::make_unique<GalerkinSystem>(*basis_, *model_, *noise_, std::move(src));

  x0_ = build_initial_coeffs(*basis_, *model_, cfg_.ic);
  dt_ = cfg_.dt > 0.0 ? cfg_.dt : system_->stable_dt();
  if (cfg_.dt > 0.0 && cfg_.dt > system_->stable_dt() * (1.0 + 1e-12) &&
      !cfg_.brownian_test_signal)
    throw ConfigError("config: dt exceeds the stability bound; use dt = auto");
  num_steps_ = static_cast<int>(std::ceil(cfg_.t_final / dt_ - 1e-12));
}

Trajectory Simulation::run_one(int path_index, std::span<const double> external_dw) const {
  const int n = basis_->num_modes();
  const int K = cfg_.brownian_test_signal ? n : noise_->num_modes();
  Trajectory tr;
  tr.noise_dim = K;
  tr.dt = dt_;
  tr.seed = cfg_.seed;
  tr.path_index = path_index;
  tr.save_every = cfg_.save_every;
  tr.num_steps = num_steps_;
  tr.dw.resize(std::size_t(num_steps_) * K);
  tr.times.push_back(0.0);
  tr.states.push_back(x0_);

  std::vector<double> state = x0_;
  SpectralScratch ws;
  const double root_dt = std::sqrt(dt_);
  for (int s = 0; s < num_steps_; ++s) {
    double* dw = &tr.dw[std::size_t(s) * K];
    if (!external_dw.empty()) {
      for (int k = 0; k < K; ++k) dw[k] = external_dw[std::size_t(s) * K + k];
    } else {
      for (int k = 0; k < K; ++k)
        dw[k] = root_dt * counter_normal(cfg_.seed, static_cast<std::uint32_t>(path_index),
                                         static_cast<std::uint32_t>(k),
                                         static_cast<std::uint32_t>(s));
    }
    bool ok = true;
    if (cfg_.brownian_test_signal) {
      for (int j = 0; j < n; ++j) state[j] += dw[j];
    } else {
      ok = system_->step_em(state, dt_, std::span<const double>(dw, K), ws);
    }
    if (!ok) {
      tr.blew_up = true;
      tr.blowup_step = s;
      break;
    }
    if ((s + 1) % cfg_.save_every == 0 || s + 1 == num_steps_) {
      tr.times.push_back((s + 1) * dt_);
      tr.states.push_back(state);
    }
  }
  return tr;
}

Trajectory Simulation::simulate_path(int path_index) const { return run_one(path_index, {}); }

Trajectory Simulation::replay(std::span<const double> dw, int path_index) const {
  return run_one(path_index, dw);
}

std::vector<Trajectory> Simulation::simulate_ensemble(int threads) const {
  const int P = cfg_.paths;
  std::vector<Trajectory> out(P);
  const int T = std::max(1, std::min(threads, P));
  std::vector<std::thread> pool;
  pool.reserve(T);
  for (int t = 0; t < T; ++t) {
    pool.emplace_back([this, t, T, &out] {
      for (int p = t; p < cfg_.paths; p += T) out[p] = simulate_path(p);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

int hardware_threads_or(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace stefan
