#pragma once

#include <span>
#include <string>
#include <vector>

#include "stefan/enthalpy.hpp"
#include "stefan/spectral.hpp"

namespace stefan {

struct NoiseSpec {
  int num_modes = 32;    // K retained noise modes (K <= n)
  double alpha0 = 0.5;   // overall amplitude
  double decay_p = 2.0;  // alpha_k = alpha0 * (1 + lambda_k)^(-p)

  void validate() const;
};

enum class SeriesStatus { converged, marginal, divergent };

// Diagnostic for the well-posedness series sum alpha_k^2 lambda_k^2 |mu_k|_inf^2,
// evaluated analytically (|mu_k|_inf = 2 pi max(a,b) on the unit square) for K
// and 2K modes. "converged" requires the K->2K block to add less than 1e-3 of
// the total; decreasing terms that miss that bar are "marginal"; growing terms
// are "divergent" and reject the configuration.
struct SeriesReport {
  double sum_k = 0.0;
  double sum_2k = 0.0;
  double increment_ratio = 0.0;
  bool terms_decreasing = false;
  SeriesStatus status = SeriesStatus::divergent;
  std::string name;
};

struct PsdReport {
  double min_eigenvalue = 0.0;
  double gamma_const = 0.0;       // max_ij |q_ij|_inf + |dq_ij/dxi_i|_inf
  double trace_tail_ratio = 0.0;  // last-decile-of-K share of the integrated trace
  bool psd = false;
  bool gamma_finite = false;
};

// Transport-noise ingredients: divergence-free fields sigma_k = mu_k e_k with
// mu_k = (d2 e_k, -d1 e_k), the amplitude schedule alpha_k, and the assembled
// correction matrix field Q = sum alpha_k^2 sigma_k (x) sigma_k on the
// collocation grid. Immutable after construction.
class NoiseModel {
 public:
  // dim must be 2 unless alpha0 == 0: divergence-free boundary-vanishing 1D
  // fields are identically zero, so 1D noise is rejected rather than silent.
  NoiseModel(const Basis& basis, const NoiseSpec& spec);

  const NoiseSpec& spec() const { return spec_; }
  int num_modes() const { return spec_.num_modes; }
  double alpha(int k) const { return alpha_.at(k); }
  Mode mode(int k) const;
  double mode_eigenvalue(int k) const;

  // grid fields on the interior collocation nodes of the basis
  std::span<const double> sigma1(int k) const;
  std::span<const double> sigma2(int k) const;
  std::span<const double> q11() const { return q11_; }
  std::span<const double> q12() const { return q12_; }
  std::span<const double> q22() const { return q22_; }

  double gamma_const() const { return gamma_const_; }
  double ip1_sum() const { return ip1_.sum_k; }

  SeriesReport check_ip1() const { return ip1_; }
  PsdReport check_ip2_ip3() const { return psd_; }

  // B(theta): k-th output is alpha_k sigma_k . grad eta(theta), the gradient
  // taken pseudo-spectrally on the collocation grid.
  void apply_B(const EnthalpyModel& model, std::span<const double> theta_grid,
               std::vector<std::vector<double>>& out, SpectralScratch& ws) const;

  // closed-form sigma_k at an arbitrary point (2D)
  void sigma_at(int k, double x1, double x2, double& s1, double& s2) const;

 private:
  const Basis* basis_;
  NoiseSpec spec_;
  std::vector<double> alpha_;
  std::vector<std::vector<double>> sig1_, sig2_;
  std::vector<double> q11_, q12_, q22_;
  double gamma_const_ = 0.0;
  SeriesReport ip1_;
  PsdReport psd_;
};

// Analytic partial sums of the (Ip1) series for the Example-1 family on the
// unit square; usable without building grid fields.
SeriesReport ip1_series_report(const NoiseSpec& spec);

}  // namespace stefan
