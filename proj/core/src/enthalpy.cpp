#include "stefan/enthalpy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stefan/errors.hpp"

namespace stefan {

void PhysicalParams::validate() const {
  auto reject = [](const std::string& msg) { throw ConfigError("physical params: " + msg); };
  if (!(std::isfinite(c1) && std::isfinite(c2) && std::isfinite(k1) && std::isfinite(k2)))
    reject("non-finite heat coefficients");
  if (std::min(c1, c2) < 1.0)
    reject("min(c1,c2) >= 1 required (keeps the inverse enthalpy slope in [0,1])");
  if (k1 <= 0.0 || k2 <= 0.0) reject("conductivities must be positive");
  if (latent_heat < 0.0) reject("latent heat must be >= 0");
  if (eta_cutoff <= 0.0) reject("eta_cutoff must be positive");
  if (eta_lipschitz <= 0.0) reject("eta_lipschitz must be positive");
  if (mush_width <= 0.0) reject("mush_width must be positive");
  const double cap = std::min(k1 / c1, k2 / c2);
  if (!(psi_floor > 0.0 && psi_floor <= cap)) {
    std::ostringstream os;
    os << "psi_floor must lie in (0, min(k1/c1,k2/c2)] = (0, " << cap << "], got " << psi_floor;
    reject(os.str());
  }
  if (blend_width <= 0.0) reject("blend_width must be positive");
  if (latent_heat > 0.0 && blend_width >= 0.5 * latent_heat)
    reject("blend_width must be < latent_heat/2 so the plateau survives");
}

EnthalpyModel::EnthalpyModel(const PhysicalParams& p) : p_(p) {
  p_.validate();
  ramp_lo_x_ = enthalpy(-p_.mush_width);
  ramp_hi_x_ = enthalpy(p_.mush_width);
}

double EnthalpyModel::temperature(double x) const {
  if (!std::isfinite(x)) throw RuntimeError("temperature(): non-finite enthalpy");
  if (x <= ramp_lo_x_) return x / p_.c1;
  if (x >= ramp_hi_x_) return (x - p_.latent_heat) / p_.c2;

  // Newton with a bisection safeguard on the ramp. Slope >= 1 everywhere, so
  // the iteration contracts; the bracket only shrinks.
  double lo = -p_.mush_width, hi = p_.mush_width;
  double r = lo + (hi - lo) * (x - ramp_lo_x_) / (ramp_hi_x_ - ramp_lo_x_);
  const double tol = 1e-12 * std::max(1.0, std::fabs(x));
  for (int it = 0; it < 200; ++it) {
    const double f = enthalpy(r) - x;
    if (std::fabs(f) <= tol) return r;
    if (f > 0.0) hi = r; else lo = r;
    const double step = f / enthalpy_slope(r);
    r -= step;
    if (r <= lo || r >= hi) r = 0.5 * (lo + hi);
  }
  throw RuntimeError("temperature(): inversion did not converge; enthalpy map is not monotone?");
}

ModelValidation EnthalpyModel::validate_hypotheses(double lo, double hi, int npts) const {
  ModelValidation out;
  double min_gp = 1e300, min_ip = 1e300, max_ip = -1e300, min_pp = 1e300, max_ep = 0.0;
  for (int i = 0; i < npts; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (npts - 1);
    min_gp = std::min(min_gp, enthalpy_slope(x));
    const double ip = temperature_slope(x);
    min_ip = std::min(min_ip, ip);
    max_ip = std::max(max_ip, ip);
    min_pp = std::min(min_pp, flux_potential_slope(x));
    max_ep = std::max(max_ep, std::fabs(transport_cutoff_slope(x)));
  }
  out.checks.push_back({"enthalpy_slope >= 1", min_gp, 1.0 - 1e-9, min_gp >= 1.0 - 1e-9});
  out.checks.push_back({"inverse slope >= 0", min_ip, 0.0, min_ip >= 0.0});
  out.checks.push_back({"inverse slope <= 1", max_ip, 1.0 + 1e-9, max_ip <= 1.0 + 1e-9});
  out.checks.push_back({"flux potential slope >= psi_floor", min_pp, p_.psi_floor - 1e-12,
                        min_pp >= p_.psi_floor - 1e-12});
  out.checks.push_back({"|eta'| <= L", max_ep, p_.eta_lipschitz + 1e-12,
                        max_ep <= p_.eta_lipschitz + 1e-12});
  out.pass = true;
  for (const auto& c : out.checks) out.pass = out.pass && c.pass;
  return out;
}

}  // namespace stefan
