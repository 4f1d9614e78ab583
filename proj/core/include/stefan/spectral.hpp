#pragma once

#include <span>
#include <vector>

namespace stefan {

// Dirichlet-Laplacian eigenbasis on the unit interval/square.
struct BasisSpec {
  int dim = 2;             // 1 or 2
  int modes_per_axis = 16; // m; n = m^dim retained modes
  int grid_per_axis = 64;  // M collocation points per axis, M >= 2m (dealiasing)

  void validate() const;
};

struct Mode {
  int k1 = 0;
  int k2 = 0;  // 0 in 1D
};

// Scratch buffers for the transforms; one per worker thread.
struct SpectralScratch {
  std::vector<double> a, b, c, d;
};

// Closed-form sine basis with collocation transforms.
//
// Interior nodes x_i = i/(M+1), i = 1..M. The discrete sine transform pair on
// these nodes is exact for any field band-limited to M modes per axis, so
// project(synthesize(c)) = c to roundoff. All reductions are fixed-order
// pairwise sums.
class Basis {
 public:
  explicit Basis(const BasisSpec& spec);

  const BasisSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  int modes_per_axis() const { return spec_.modes_per_axis; }
  int grid_per_axis() const { return spec_.grid_per_axis; }
  int num_modes() const { return static_cast<int>(modes_.size()); }
  int grid_size() const;           // M^dim
  double h() const { return h_; }  // node spacing 1/(M+1)
  const std::vector<Mode>& modes() const { return modes_; }
  const std::vector<double>& eigenvalues() const { return lambda_; }
  double eigenvalue(int j) const { return lambda_.at(j); }
  double lambda_max() const { return lambda_.back(); }

  // coefficients (length n) -> grid values on interior nodes (length M^dim)
  void synthesize(std::span<const double> coeffs, std::span<double> grid,
                  SpectralScratch& ws) const;
  // grid -> first n coefficients via the exact collocation quadrature
  void project(std::span<const double> grid, std::span<double> coeffs,
               SpectralScratch& ws) const;
  // pseudo-spectral gradient of arbitrary grid data: full-band sine
  // interpolation, term-by-term differentiation, cosine resummation.
  void gradient(std::span<const double> grid, std::span<double> g1, std::span<double> g2,
                SpectralScratch& ws) const;

  // exact gradient of a band-limited field given by its coefficients
  void gradient_of_coeffs(std::span<const double> coeffs, std::span<double> g1,
                          std::span<double> g2, SpectralScratch& ws) const;

  void eigenfunction(int j, std::span<double> grid) const;
  double eigenfunction_at(int j, double x1, double x2 = 0.0) const;
  void eigenfunction_gradient(int j, std::span<double> g1, std::span<double> g2) const;

  void apply_laplacian(std::span<const double> coeffs, std::span<double> out) const;

  static double norm_l2(std::span<const double> coeffs);
  double norm_h1(std::span<const double> coeffs) const;
  double norm_h_minus(std::span<const double> coeffs, double beta) const;

 private:
  BasisSpec spec_;
  double h_ = 0.0;
  std::vector<Mode> modes_;
  std::vector<double> lambda_;
  // 1D tables on interior nodes, several layouts so every contraction runs
  // over contiguous memory:
  std::vector<double> sin_ki_;   // [k-1][i-1], sin(k pi x_i), k,i = 1..M
  std::vector<double> sin_ik_;   // [i-1][k-1]
  std::vector<double> cosw_ik_;  // [i-1][k-1], k * cos(k pi x_i)
};

// Evaluation of band-limited fields on an independent tensor grid that
// includes the boundary nodes, with trapezoid quadrature. The verification
// checks run their quadratures through this instead of the collocation
// transforms so the two code paths stay independent.
class NodeEval {
 public:
  // nodes x_i = i/(interior+1), i = 0..interior+1
  NodeEval(const Basis& basis, int interior);

  int nodes_per_axis() const { return N_ + 2; }
  std::size_t grid_size() const;
  double node(int i) const { return i * h_; }
  double spacing() const { return h_; }
  const Basis& basis() const { return *basis_; }

  void field(std::span<const double> coeffs, std::span<double> out) const;
  void gradient(std::span<const double> coeffs, std::span<double> g1,
                std::span<double> g2) const;
  double trapezoid(std::span<const double> values) const;
  // trapezoid of values * (rank-1 weight u (x) v); 2D only
  double trapezoid_weighted(std::span<const double> values, std::span<const double> u,
                            std::span<const double> v) const;

  // 1D closed-form tables for mode k on these nodes
  void sin_table(int k, std::span<double> out) const;
  void cos_table(int k, std::span<double> out) const;

 private:
  const Basis* basis_;
  int N_ = 0;
  double h_ = 0.0;
  std::vector<double> sin_ik_;   // [i][k-1], k = 1..m
  std::vector<double> cosw_ik_;  // [i][k-1], k cos(k pi x_i)
  std::vector<double> wt_;       // trapezoid weights (0.5 at ends)
};

}  // namespace stefan
