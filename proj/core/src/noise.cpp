#include "stefan/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stefan/errors.hpp"
#include "stefan/reduce.hpp"

namespace stefan {

namespace {
constexpr double kPi = std::numbers::pi;

// modes of the square sorted by eigenvalue, lexicographic tie-break; the noise
// schedule may need up to 2K of them for the series diagnostic.
std::vector<Mode> sorted_modes(int count) {
  const int side = static_cast<int>(std::ceil(std::sqrt(double(count)))) + 8;
  std::vector<Mode> all;
  all.reserve(std::size_t(side) * side);
  for (int a = 1; a <= side; ++a)
    for (int b = 1; b <= side; ++b) all.push_back({a, b});
  std::sort(all.begin(), all.end(), [](const Mode& u, const Mode& v) {
    const long lu = long(u.k1) * u.k1 + long(u.k2) * u.k2;
    const long lv = long(v.k1) * v.k1 + long(v.k2) * v.k2;
    if (lu != lv) return lu < lv;
    if (u.k1 != v.k1) return u.k1 < v.k1;
    return u.k2 < v.k2;
  });
  all.resize(count);
  return all;
}
}  // namespace

void NoiseSpec::validate() const {
  if (num_modes < 0) throw ConfigError("noise: num_modes must be >= 0");
  if (alpha0 < 0.0) throw ConfigError("noise: alpha0 must be >= 0");
  if (decay_p <= 0.0) throw ConfigError("noise: decay_p must be positive");
}

SeriesReport ip1_series_report(const NoiseSpec& spec) {
  SeriesReport rep;
  rep.name = "(Ip1) sum alpha_k^2 lambda_k^2 |mu_k|_inf^2";
  const int K = std::max(spec.num_modes, 1);
  const auto modes = sorted_modes(2 * K);
  std::vector<double> terms(modes.size());
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const double lam = kPi * kPi * (double(modes[k].k1) * modes[k].k1 +
                                    double(modes[k].k2) * modes[k].k2);
    const double al = spec.alpha0 * std::pow(1.0 + lam, -spec.decay_p);
    const double mu_inf = 2.0 * kPi * std::max(modes[k].k1, modes[k].k2);
    terms[k] = al * al * lam * lam * mu_inf * mu_inf;
  }
  rep.sum_k = sum_pairwise(terms.data(), K);
  rep.sum_2k = sum_pairwise(terms.data(), terms.size());
  rep.increment_ratio = rep.sum_2k > 0.0 ? (rep.sum_2k - rep.sum_k) / rep.sum_2k : 0.0;
  rep.terms_decreasing = terms.back() <= terms.front() || spec.alpha0 == 0.0;
  if (spec.alpha0 == 0.0 || rep.increment_ratio < 1e-3)
    rep.status = SeriesStatus::converged;
  else if (rep.terms_decreasing)
    rep.status = SeriesStatus::marginal;
  else
    rep.status = SeriesStatus::divergent;
  return rep;
}

NoiseModel::NoiseModel(const Basis& basis, const NoiseSpec& spec)
    : basis_(&basis), spec_(spec) {
  spec_.validate();
  if (basis.dim() == 1 && spec_.alpha0 > 0.0)
    throw ConfigError(
        "noise: no divergence-free boundary-vanishing fields exist in 1D; "
        "1D runs must set alpha0 = 0");
  if (spec_.num_modes > basis.num_modes())
    throw ConfigError("noise: num_modes exceeds the retained basis size");

  const int K = spec_.num_modes;
  alpha_.resize(K);
  for (int k = 0; k < K; ++k)
    alpha_[k] = spec_.alpha0 * std::pow(1.0 + mode_eigenvalue(k), -spec_.decay_p);

  ip1_ = ip1_series_report(spec_);
  if (ip1_.status == SeriesStatus::divergent)
    throw ConfigError("noise: (Ip1) series diverges (terms grow); decrease alpha0 or raise p");

  const int G = basis.grid_size();
  q11_.assign(G, 0.0);
  q12_.assign(G, 0.0);
  q22_.assign(G, 0.0);
  if (basis.dim() == 1 || spec_.alpha0 == 0.0) {
    // Q = 0; nothing else to assemble
    sig1_.assign(K, std::vector<double>(G, 0.0));
    sig2_.assign(K, std::vector<double>(G, 0.0));
    psd_.psd = true;
    psd_.gamma_finite = true;
    gamma_const_ = 0.0;
    return;
  }

  const int M = basis.grid_per_axis();
  const double h = basis.h();
  sig1_.resize(K);
  sig2_.resize(K);
  std::vector<double> trace_tail(G, 0.0);
  const int tail_from = std::max(0, K - std::max(1, K / 10));
  for (int k = 0; k < K; ++k) {
    sig1_[k].resize(G);
    sig2_[k].resize(G);
    const Mode mo = mode(k);
    for (int i1 = 0; i1 < M; ++i1) {
      const double x1 = (i1 + 1) * h;
      const double sa = std::sin(mo.k1 * kPi * x1), ca = std::cos(mo.k1 * kPi * x1);
      for (int i2 = 0; i2 < M; ++i2) {
        const double x2 = (i2 + 1) * h;
        const double sb = std::sin(mo.k2 * kPi * x2), cb = std::cos(mo.k2 * kPi * x2);
        const double e = 2.0 * sa * sb;
        const std::size_t at = std::size_t(i1) * M + i2;
        sig1_[k][at] = e * 2.0 * mo.k2 * kPi * sa * cb;
        sig2_[k][at] = -e * 2.0 * mo.k1 * kPi * ca * sb;
      }
    }
    const double a2 = alpha_[k] * alpha_[k];
    for (int i = 0; i < G; ++i) {
      const double s1 = sig1_[k][i], s2 = sig2_[k][i];
      q11_[i] += a2 * s1 * s1;
      q12_[i] += a2 * s1 * s2;
      q22_[i] += a2 * s2 * s2;
      if (k >= tail_from) trace_tail[i] += a2 * (s1 * s1 + s2 * s2);
    }
  }

  // (Ip3): gamma = max_ij |q_ij|_inf + |d q_ij / d xi_i|_inf, derivatives by
  // pseudo-spectral differentiation of the assembled entries.
  SpectralScratch ws;
  std::vector<double> g1(G), g2(G);
  auto sup = [G](std::span<const double> v) {
    double s = 0.0;
    for (int i = 0; i < G; ++i) s = std::max(s, std::fabs(v[i]));
    return s;
  };
  basis.gradient(q11_, g1, g2, ws);
  gamma_const_ = sup(q11_) + sup(g1);
  basis.gradient(q12_, g1, g2, ws);
  gamma_const_ = std::max(gamma_const_, sup(q12_) + sup(g1));
  gamma_const_ = std::max(gamma_const_, sup(q12_) + sup(g2));
  basis.gradient(q22_, g1, g2, ws);
  gamma_const_ = std::max(gamma_const_, sup(q22_) + sup(g2));

  double min_eig = 1e300;
  for (int i = 0; i < G; ++i) {
    const double half = 0.5 * (q11_[i] + q22_[i]);
    const double rad = std::sqrt(0.25 * (q11_[i] - q22_[i]) * (q11_[i] - q22_[i]) +
                                 q12_[i] * q12_[i]);
    min_eig = std::min(min_eig, half - rad);
  }
  psd_.min_eigenvalue = min_eig;
  psd_.psd = min_eig >= -1e-12;
  psd_.gamma_finite = std::isfinite(gamma_const_);
  psd_.gamma_const = gamma_const_;
  const double tr_total = sum_pairwise(q11_) + sum_pairwise(q22_);
  psd_.trace_tail_ratio = tr_total > 0.0 ? sum_pairwise(trace_tail) / tr_total : 0.0;
  if (!psd_.psd) throw ConfigError("noise: (Ip3) failed, Q has a negative eigenvalue on the grid");
}

Mode NoiseModel::mode(int k) const { return basis_->modes().at(k); }

double NoiseModel::mode_eigenvalue(int k) const { return basis_->eigenvalue(k); }

std::span<const double> NoiseModel::sigma1(int k) const { return sig1_.at(k); }
std::span<const double> NoiseModel::sigma2(int k) const { return sig2_.at(k); }

void NoiseModel::sigma_at(int k, double x1, double x2, double& s1, double& s2) const {
  const Mode mo = mode(k);
  const double sa = std::sin(mo.k1 * kPi * x1), ca = std::cos(mo.k1 * kPi * x1);
  const double sb = std::sin(mo.k2 * kPi * x2), cb = std::cos(mo.k2 * kPi * x2);
  const double e = 2.0 * sa * sb;
  s1 = e * 2.0 * mo.k2 * kPi * sa * cb;
  s2 = -e * 2.0 * mo.k1 * kPi * ca * sb;
}

void NoiseModel::apply_B(const EnthalpyModel& model, std::span<const double> theta_grid,
                         std::vector<std::vector<double>>& out, SpectralScratch& ws) const {
  const int G = basis_->grid_size();
  if (static_cast<int>(theta_grid.size()) != G)
    throw RuntimeError("apply_B: grid size mismatch");
  std::vector<double> eta(G), g1(G), g2(G);
  for (int i = 0; i < G; ++i) eta[i] = model.transport_cutoff(theta_grid[i]);
  basis_->gradient(eta, g1, g2, ws);
  out.assign(spec_.num_modes, std::vector<double>(G));
  for (int k = 0; k < spec_.num_modes; ++k) {
    const auto& s1 = sig1_[k];
    const auto& s2 = sig2_[k];
    for (int i = 0; i < G; ++i) out[k][i] = alpha_[k] * (s1[i] * g1[i] + s2[i] * g2[i]);
  }
}

}  // namespace stefan
