#pragma once

#include <string>
#include <vector>

#include "stefan/smoothstep.hpp"

namespace stefan {

// Physical configuration of the two-phase enthalpy model.
//
// Specific heats must be >= 1 so that the smoothed enthalpy map has slope
// >= 1 everywhere and its inverse is a contraction (slope in [0,1]), which
// every estimate downstream leans on. latent_heat = 0 together with
// c1 = c2 = k1 = k2 = psi_floor = 1 collapses the model onto the plain heat
// equation; that reduction is used as the exactly-solvable test case.
struct PhysicalParams {
  double c1 = 1.0;            // specific heat, solid branch
  double c2 = 1.0;            // specific heat, liquid branch
  double k1 = 1.0;            // thermal conductivity, solid
  double k2 = 1.0;            // thermal conductivity, liquid
  double latent_heat = 1.0;   // enthalpy jump across the transition
  double eta_cutoff = 0.05;   // epsilon: transport vanishes for theta <= epsilon
  double eta_lipschitz = 1.0; // L: bound on |eta'|
  double mush_width = 0.05;   // half-width of the smoothed Heaviside ramp
  double psi_floor = 0.05;    // psi0: strict monotonicity constant of the flux potential
  double blend_width = 0.1;   // corner-smoothing half-width of the flux potential

  void validate() const;  // throws ConfigError naming the violated constraint
};

struct HypothesisCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct ModelValidation {
  std::vector<HypothesisCheck> checks;
  bool pass = false;
};

// Smoothed constitutive functions of the enthalpy formulation. Immutable
// after construction; safe to share across worker threads.
class EnthalpyModel {
 public:
  explicit EnthalpyModel(const PhysicalParams& p);

  const PhysicalParams& params() const { return p_; }

  // enthalpy(theta): smoothed gamma(theta) = C(theta) + l * H(theta) with the
  // Heaviside ramp and the specific-heat kink both blended by the quintic
  // smoothstep over [-mush_width, mush_width]. Exactly c1*theta below the
  // ramp and c2*theta + l above it.
  double enthalpy(double theta) const {
    const double em = p_.mush_width;
    const double u = (theta + em) / (2.0 * em);
    const double blend = 2.0 * em * smoothstep::integral(u);
    return p_.c1 * theta + (p_.c2 - p_.c1) * blend + p_.latent_heat * smoothstep::value(u);
  }

  double enthalpy_slope(double theta) const {
    const double em = p_.mush_width;
    const double u = (theta + em) / (2.0 * em);
    return p_.c1 + (p_.c2 - p_.c1) * smoothstep::value(u) +
           p_.latent_heat * smoothstep::deriv(u) / (2.0 * em);
  }

  // temperature(x): inverse of enthalpy(). Closed form outside the ramp,
  // safeguarded Newton inside (monotone, slope >= 1, so this is robust).
  double temperature(double x) const;

  double temperature_slope(double x) const { return 1.0 / enthalpy_slope(temperature(x)); }

  // flux_potential(x): Psi, built as the exact integral of flux_potential_slope
  // so Psi(0) = 0 holds identically.
  double flux_potential(double x) const {
    const double d = p_.blend_width;
    const double a1 = p_.k1 / p_.c1 - p_.psi_floor;
    const double a2 = p_.k2 / p_.c2 - p_.psi_floor;
    return p_.psi_floor * x - a1 * d * smoothstep::integral(-x / d) +
           a2 * d * smoothstep::integral((x - p_.latent_heat) / d);
  }

  // slope psi0 on the plateau (0, l), k1/c1 deep in the solid branch,
  // k2/c2 deep in the liquid branch, quintic blends at the corners.
  double flux_potential_slope(double x) const {
    const double d = p_.blend_width;
    const double a1 = p_.k1 / p_.c1 - p_.psi_floor;
    const double a2 = p_.k2 / p_.c2 - p_.psi_floor;
    return p_.psi_floor + a1 * smoothstep::value(-x / d) +
           a2 * smoothstep::value((x - p_.latent_heat) / d);
  }

  // transport_cutoff(theta): eta. Zero for theta <= eta_cutoff, slope rising
  // to eta_lipschitz over [cutoff, 2*cutoff], then linear.
  double transport_cutoff(double theta) const {
    const double e = p_.eta_cutoff;
    return p_.eta_lipschitz * e * smoothstep::integral((theta - e) / e);
  }

  double transport_cutoff_slope(double theta) const {
    const double e = p_.eta_cutoff;
    return p_.eta_lipschitz * smoothstep::value((theta - e) / e);
  }

  // correction_potential(theta): g(theta) = 1/2 int_0^theta eta'(r)^2 dr,
  // the scalar potential inside the Ito-Stratonovich correction term.
  double correction_potential(double theta) const {
    const double e = p_.eta_cutoff;
    const double L = p_.eta_lipschitz;
    return 0.5 * L * L * e * smoothstep::square_integral((theta - e) / e);
  }

  double correction_potential_slope(double theta) const {
    const double ep = transport_cutoff_slope(theta);
    return 0.5 * ep * ep;
  }

  // Numerically certifies the standing hypotheses on [lo, hi]:
  //   enthalpy_slope >= 1, temperature_slope in [0, 1],
  //   flux_potential_slope >= psi_floor, |eta'| <= L.
  ModelValidation validate_hypotheses(double lo, double hi, int npts = 10000) const;

 private:
  PhysicalParams p_;
  double ramp_lo_x_ = 0.0;  // enthalpy at theta = -mush_width
  double ramp_hi_x_ = 0.0;  // enthalpy at theta = +mush_width
};

}  // namespace stefan
