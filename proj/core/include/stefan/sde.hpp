#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stefan/enthalpy.hpp"
#include "stefan/noise.hpp"
#include "stefan/spectral.hpp"

namespace stefan {

struct InitialCondition {
  enum class Kind { mode, slab, coeffs_file };
  Kind kind = Kind::mode;
  int mode_index = 0;
  double amplitude = 1.0;
  // two-phase slab: theta = -solid on the left half, +liquid on the right,
  // ramped over the mush width, blended to the enthalpy-zero boundary
  // temperature over `margin` so the mapped field is Dirichlet-compatible.
  double slab_solid = 1.0;
  double slab_liquid = 1.0;
  double slab_margin = 0.1;
  std::string file;
};

struct SourceSpec {
  enum class Kind { zero, coeffs_file };
  Kind kind = Kind::zero;
  std::string file;
};

struct SimConfig {
  BasisSpec basis;
  PhysicalParams phys;
  NoiseSpec noise;
  double t_final = 0.05;
  double dt = 0.0;  // <= 0 means stable_dt()
  InitialCondition ic;
  SourceSpec source;
  std::uint64_t seed = 1;
  int paths = 1;
  int save_every = 50;
  // Test hook: replace the dynamics with independent Brownian coefficients
  // (zero drift, unit diffusion per retained mode). Used by the increment
  // scaling checks against the exact Gaussian moment oracle.
  bool brownian_test_signal = false;

  void validate() const;
};

struct Trajectory {
  std::vector<double> times;                // snapshot instants, times[0] = 0
  std::vector<std::vector<double>> states;  // coefficient vectors at snapshots
  std::vector<double> dw;                   // retained increments, [step*K + k]
  int num_steps = 0;
  int noise_dim = 0;  // K (or n for the Brownian test signal)
  double dt = 0.0;
  std::uint64_t seed = 0;
  int path_index = 0;
  int save_every = 1;
  bool blew_up = false;
  int blowup_step = -1;
};

// The finite-dimensional approximating system: drift = Laplacian of the
// projected flux potential plus the projected divergence of Q grad of the
// correction potential, diffusion = per-mode projected transport terms.
class GalerkinSystem {
 public:
  GalerkinSystem(const Basis& basis, const EnthalpyModel& model, const NoiseModel& noise,
                 std::vector<double> source_coeffs);

  const Basis& basis() const { return *basis_; }
  const EnthalpyModel& model() const { return *model_; }
  const NoiseModel& noise() const { return *noise_; }
  std::span<const double> source_coeffs() const { return source_; }

  void drift(std::span<const double> coeffs, std::span<double> out, SpectralScratch& ws) const;
  // out[k] has n entries; K vectors total
  void diffusion(std::span<const double> coeffs, std::vector<std::vector<double>>& out,
                 SpectralScratch& ws) const;
  // drift and diffusion from one shared synthesis of the state
  void apply(std::span<const double> coeffs, std::span<double> drift_out,
             std::vector<std::vector<double>>& diffusion_out, SpectralScratch& ws) const;

  // dt = safety / (max Psi' * lambda_max + gamma L^2 lambda_max + 1), safety 0.5
  double stable_dt() const;

  // one Euler-Maruyama step in place; returns false on blow-up
  bool step_em(std::span<double> state, double dt, std::span<const double> dw,
               SpectralScratch& ws) const;

 private:
  const Basis* basis_;
  const EnthalpyModel* model_;
  const NoiseModel* noise_;
  std::vector<double> source_;
};

// Everything a run needs, built once from a validated config and shared
// read-only across path workers.
class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg);

  const SimConfig& config() const { return cfg_; }
  const Basis& basis() const { return *basis_; }
  const EnthalpyModel& model() const { return *model_; }
  const NoiseModel& noise() const { return *noise_; }
  const GalerkinSystem& system() const { return *system_; }
  double dt() const { return dt_; }
  int num_steps() const { return num_steps_; }
  std::span<const double> initial_coeffs() const { return x0_; }

  Trajectory simulate_path(int path_index) const;
  std::vector<Trajectory> simulate_ensemble(int threads) const;
  // integrate forward using externally supplied increments (replay)
  Trajectory replay(std::span<const double> dw, int path_index) const;

 private:
  SimConfig cfg_;
  std::unique_ptr<Basis> basis_;
  std::unique_ptr<EnthalpyModel> model_;
  std::unique_ptr<NoiseModel> noise_;
  std::unique_ptr<GalerkinSystem> system_;
  std::vector<double> x0_;
  double dt_ = 0.0;
  int num_steps_ = 0;

  Trajectory run_one(int path_index, std::span<const double> external_dw) const;
};

std::vector<double> build_initial_coeffs(const Basis& basis, const EnthalpyModel& model,
                                         const InitialCondition& ic);

int hardware_threads_or(int requested);

}  // namespace stefan
