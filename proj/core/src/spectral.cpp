#include "stefan/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stefan/errors.hpp"
#include "stefan/reduce.hpp"

namespace stefan {

namespace {
constexpr double kPi = std::numbers::pi;

void check_span(std::size_t got, std::size_t want, const char* what) {
  if (got != want) throw RuntimeError(std::string("spectral: size mismatch in ") + what);
}
}  // namespace

void BasisSpec::validate() const {
  if (dim != 1 && dim != 2) throw ConfigError("basis: dim must be 1 or 2");
  if (modes_per_axis < 1) throw ConfigError("basis: modes_per_axis must be >= 1");
  if (grid_per_axis < 2 * modes_per_axis)
    throw ConfigError("basis: grid_per_axis must be >= 2 * modes_per_axis (dealiasing)");
}

Basis::Basis(const BasisSpec& spec) : spec_(spec) {
  spec_.validate();
  const int m = spec_.modes_per_axis;
  const int M = spec_.grid_per_axis;
  h_ = 1.0 / (M + 1);

  if (spec_.dim == 1) {
    for (int k = 1; k <= m; ++k) modes_.push_back({k, 0});
  } else {
    for (int a = 1; a <= m; ++a)
      for (int b = 1; b <= m; ++b) modes_.push_back({a, b});
    std::sort(modes_.begin(), modes_.end(), [](const Mode& u, const Mode& v) {
      const long lu = long(u.k1) * u.k1 + long(u.k2) * u.k2;
      const long lv = long(v.k1) * v.k1 + long(v.k2) * v.k2;
      if (lu != lv) return lu < lv;
      if (u.k1 != v.k1) return u.k1 < v.k1;
      return u.k2 < v.k2;
    });
  }
  lambda_.reserve(modes_.size());
  for (const Mode& mo : modes_)
    lambda_.push_back(kPi * kPi * (double(mo.k1) * mo.k1 + double(mo.k2) * mo.k2));

  sin_ki_.resize(std::size_t(M) * M);
  sin_ik_.resize(std::size_t(M) * M);
  cosw_ik_.resize(std::size_t(M) * M);
  for (int k = 1; k <= M; ++k) {
    for (int i = 1; i <= M; ++i) {
      const double s = std::sin(k * kPi * i * h_);
      const double c = std::cos(k * kPi * i * h_);
      sin_ki_[std::size_t(k - 1) * M + (i - 1)] = s;
      sin_ik_[std::size_t(i - 1) * M + (k - 1)] = s;
      cosw_ik_[std::size_t(i - 1) * M + (k - 1)] = k * c;
    }
  }
}

int Basis::grid_size() const {
  const int M = spec_.grid_per_axis;
  return spec_.dim == 1 ? M : M * M;
}

void Basis::synthesize(std::span<const double> coeffs, std::span<double> grid,
                       SpectralScratch& ws) const {
  const int m = spec_.modes_per_axis;
  const int M = spec_.grid_per_axis;
  check_span(coeffs.size(), modes_.size(), "synthesize coeffs");
  check_span(grid.size(), std::size_t(grid_size()), "synthesize grid");
  const double root2 = std::sqrt(2.0);

  if (spec_.dim == 1) {
    for (int i = 0; i < M; ++i)
      grid[i] = root2 * dot_pairwise(coeffs.data(), &sin_ik_[std::size_t(i) * M], m);
    return;
  }
  // scatter coefficients into the dense (k1,k2) matrix
  ws.a.assign(std::size_t(m) * m, 0.0);
  for (std::size_t j = 0; j < modes_.size(); ++j)
    ws.a[std::size_t(modes_[j].k1 - 1) * m + (modes_[j].k2 - 1)] = coeffs[j];
  // T[i2][k1] = sum_k2 A[k1][k2] sin(k2 pi x_{i2})
  ws.b.resize(std::size_t(M) * m);
  for (int i2 = 0; i2 < M; ++i2)
    for (int k1 = 0; k1 < m; ++k1)
      ws.b[std::size_t(i2) * m + k1] =
          dot_pairwise(&ws.a[std::size_t(k1) * m], &sin_ik_[std::size_t(i2) * M], m);
  // F[i1][i2] = 2 sum_k1 sin(k1 pi x_{i1}) T[i2][k1]
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      grid[std::size_t(i1) * M + i2] =
          2.0 * dot_pairwise(&sin_ik_[std::size_t(i1) * M], &ws.b[std::size_t(i2) * m], m);
}

void Basis::project(std::span<const double> grid, std::span<double> coeffs,
                    SpectralScratch& ws) const {
  const int m = spec_.modes_per_axis;
  const int M = spec_.grid_per_axis;
  check_span(grid.size(), std::size_t(grid_size()), "project grid");
  check_span(coeffs.size(), modes_.size(), "project coeffs");
  const double root2 = std::sqrt(2.0);

  if (spec_.dim == 1) {
    for (int k = 0; k < m; ++k)
      coeffs[k] = root2 * h_ * dot_pairwise(grid.data(), &sin_ki_[std::size_t(k) * M], M);
    return;
  }
  // W[j2][i1] = sum_i2 F[i1][i2] sin(j2 pi x_{i2})
  ws.c.resize(std::size_t(m) * M);
  for (int j2 = 0; j2 < m; ++j2)
    for (int i1 = 0; i1 < M; ++i1)
      ws.c[std::size_t(j2) * M + i1] =
          dot_pairwise(&grid[std::size_t(i1) * M], &sin_ki_[std::size_t(j2) * M], M);
  const double scale = 2.0 * h_ * h_;
  for (std::size_t j = 0; j < modes_.size(); ++j) {
    const int j1 = modes_[j].k1 - 1, j2 = modes_[j].k2 - 1;
    coeffs[j] = scale * dot_pairwise(&sin_ki_[std::size_t(j1) * M],
                                     &ws.c[std::size_t(j2) * M], M);
  }
}

void Basis::gradient(std::span<const double> grid, std::span<double> g1, std::span<double> g2,
                     SpectralScratch& ws) const {
  const int M = spec_.grid_per_axis;
  check_span(grid.size(), std::size_t(grid_size()), "gradient grid");
  check_span(g1.size(), std::size_t(grid_size()), "gradient g1");
  const double root2 = std::sqrt(2.0);

  if (spec_.dim == 1) {
    // full-band analysis then cosine resummation
    ws.a.resize(M);
    for (int k = 0; k < M; ++k)
      ws.a[k] = root2 * h_ * dot_pairwise(grid.data(), &sin_ki_[std::size_t(k) * M], M);
    for (int i = 0; i < M; ++i) {
      double acc = 0.0;
      // fold k pi into the weighted cosine table
      acc = dot_pairwise(ws.a.data(), &cosw_ik_[std::size_t(i) * M], M);
      g1[i] = root2 * kPi * acc;
    }
    return;
  }
  check_span(g2.size(), std::size_t(grid_size()), "gradient g2");
  // full-band coefficients chat[p][q], p,q = 1..M
  ws.a.resize(std::size_t(M) * M);  // W[q][i1]
  for (int q = 0; q < M; ++q)
    for (int i1 = 0; i1 < M; ++i1)
      ws.a[std::size_t(q) * M + i1] =
          dot_pairwise(&grid[std::size_t(i1) * M], &sin_ki_[std::size_t(q) * M], M);
  ws.b.resize(std::size_t(M) * M);  // chat[p][q]
  const double scale = 2.0 * h_ * h_;
  for (int p = 0; p < M; ++p)
    for (int q = 0; q < M; ++q)
      ws.b[std::size_t(p) * M + q] = scale * dot_pairwise(&sin_ki_[std::size_t(p) * M],
                                                          &ws.a[std::size_t(q) * M], M);
  // d/dx1: 2 pi sum_p p cos(p pi x_{i1}) [sum_q chat[p][q] sin(q pi x_{i2})]
  ws.c.resize(std::size_t(M) * M);  // R[i2][p]
  for (int i2 = 0; i2 < M; ++i2)
    for (int p = 0; p < M; ++p)
      ws.c[std::size_t(i2) * M + p] =
          dot_pairwise(&ws.b[std::size_t(p) * M], &sin_ik_[std::size_t(i2) * M], M);
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      g1[std::size_t(i1) * M + i2] = 2.0 * kPi *
          dot_pairwise(&cosw_ik_[std::size_t(i1) * M], &ws.c[std::size_t(i2) * M], M);
  // d/dx2: 2 pi sum_q q cos(q pi x_{i2}) [sum_p chat[p][q] sin(p pi x_{i1})]
  ws.d.resize(std::size_t(M) * M);  // chatT[q][p]
  for (int p = 0; p < M; ++p)
    for (int q = 0; q < M; ++q) ws.d[std::size_t(q) * M + p] = ws.b[std::size_t(p) * M + q];
  for (int i1 = 0; i1 < M; ++i1)
    for (int q = 0; q < M; ++q)
      ws.c[std::size_t(i1) * M + q] =
          dot_pairwise(&ws.d[std::size_t(q) * M], &sin_ik_[std::size_t(i1) * M], M);
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      g2[std::size_t(i1) * M + i2] = 2.0 * kPi *
          dot_pairwise(&ws.c[std::size_t(i1) * M], &cosw_ik_[std::size_t(i2) * M], M);
}

void Basis::gradient_of_coeffs(std::span<const double> coeffs, std::span<double> g1,
                               std::span<double> g2, SpectralScratch& ws) const {
  const int m = spec_.modes_per_axis;
  const int M = spec_.grid_per_axis;
  check_span(coeffs.size(), modes_.size(), "gradient_of_coeffs");
  const double root2 = std::sqrt(2.0);

  if (spec_.dim == 1) {
    for (int i = 0; i < M; ++i)
      g1[i] = root2 * kPi * dot_pairwise(coeffs.data(), &cosw_ik_[std::size_t(i) * M], m);
    return;
  }
  ws.a.assign(std::size_t(m) * m, 0.0);
  for (std::size_t j = 0; j < modes_.size(); ++j)
    ws.a[std::size_t(modes_[j].k1 - 1) * m + (modes_[j].k2 - 1)] = coeffs[j];
  ws.b.resize(std::size_t(M) * m);  // S[i2][k1] = sum_k2 A[k1][k2] sin(k2 x_{i2})
  for (int i2 = 0; i2 < M; ++i2)
    for (int k1 = 0; k1 < m; ++k1)
      ws.b[std::size_t(i2) * m + k1] =
          dot_pairwise(&ws.a[std::size_t(k1) * m], &sin_ik_[std::size_t(i2) * M], m);
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      g1[std::size_t(i1) * M + i2] = 2.0 * kPi *
          dot_pairwise(&cosw_ik_[std::size_t(i1) * M], &ws.b[std::size_t(i2) * m], m);
  // transpose A for the second component
  ws.c.resize(std::size_t(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) ws.c[std::size_t(b) * m + a] = ws.a[std::size_t(a) * m + b];
  ws.d.resize(std::size_t(M) * m);  // C[i2][k1] = sum_k2 A[k1][k2] k2 cos(k2 x_{i2})
  for (int i2 = 0; i2 < M; ++i2)
    for (int k1 = 0; k1 < m; ++k1)
      ws.d[std::size_t(i2) * m + k1] =
          dot_pairwise(&ws.a[std::size_t(k1) * m], &cosw_ik_[std::size_t(i2) * M], m);
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      g2[std::size_t(i1) * M + i2] = 2.0 * kPi *
          dot_pairwise(&sin_ik_[std::size_t(i1) * M], &ws.d[std::size_t(i2) * m], m);
}

void Basis::eigenfunction(int j, std::span<double> grid) const {
  if (j < 0 || j >= num_modes()) throw RuntimeError("eigenfunction: mode index out of range");
  const int M = spec_.grid_per_axis;
  const Mode mo = modes_[j];
  if (spec_.dim == 1) {
    const double root2 = std::sqrt(2.0);
    for (int i = 0; i < M; ++i) grid[i] = root2 * sin_ki_[std::size_t(mo.k1 - 1) * M + i];
    return;
  }
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      grid[std::size_t(i1) * M + i2] = 2.0 * sin_ki_[std::size_t(mo.k1 - 1) * M + i1] *
                                       sin_ki_[std::size_t(mo.k2 - 1) * M + i2];
}

double Basis::eigenfunction_at(int j, double x1, double x2) const {
  if (j < 0 || j >= num_modes()) throw RuntimeError("eigenfunction_at: mode index out of range");
  const Mode mo = modes_[j];
  if (spec_.dim == 1) return std::sqrt(2.0) * std::sin(mo.k1 * kPi * x1);
  return 2.0 * std::sin(mo.k1 * kPi * x1) * std::sin(mo.k2 * kPi * x2);
}

void Basis::eigenfunction_gradient(int j, std::span<double> g1, std::span<double> g2) const {
  if (j < 0 || j >= num_modes()) throw RuntimeError("eigenfunction_gradient: index out of range");
  const int M = spec_.grid_per_axis;
  const Mode mo = modes_[j];
  if (spec_.dim == 1) {
    const double root2 = std::sqrt(2.0);
    for (int i = 0; i < M; ++i)
      g1[i] = root2 * kPi * cosw_ik_[std::size_t(i) * M + (mo.k1 - 1)];
    return;
  }
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2) {
      const std::size_t at = std::size_t(i1) * M + i2;
      g1[at] = 2.0 * kPi * cosw_ik_[std::size_t(i1) * M + (mo.k1 - 1)] *
               sin_ki_[std::size_t(mo.k2 - 1) * M + i2];
      g2[at] = 2.0 * kPi * sin_ki_[std::size_t(mo.k1 - 1) * M + i1] *
               cosw_ik_[std::size_t(i2) * M + (mo.k2 - 1)];
    }
}

void Basis::apply_laplacian(std::span<const double> coeffs, std::span<double> out) const {
  check_span(coeffs.size(), modes_.size(), "apply_laplacian");
  for (std::size_t j = 0; j < modes_.size(); ++j) out[j] = -lambda_[j] * coeffs[j];
}

double Basis::norm_l2(std::span<const double> coeffs) {
  std::vector<double> sq(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) sq[j] = coeffs[j] * coeffs[j];
  return std::sqrt(sum_pairwise(sq));
}

double Basis::norm_h1(std::span<const double> coeffs) const {
  std::vector<double> sq(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j) sq[j] = lambda_[j] * coeffs[j] * coeffs[j];
  return std::sqrt(sum_pairwise(sq));
}

double Basis::norm_h_minus(std::span<const double> coeffs, double beta) const {
  if (beta < 1.0) throw ConfigError("norm_h_minus: beta must be >= 1");
  std::vector<double> sq(coeffs.size());
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    sq[j] = coeffs[j] * coeffs[j] / std::pow(lambda_[j], beta);
  return std::sqrt(sum_pairwise(sq));
}

NodeEval::NodeEval(const Basis& basis, int interior) : basis_(&basis), N_(interior) {
  if (interior < 1) throw ConfigError("NodeEval: need at least one interior node");
  h_ = 1.0 / (N_ + 1);
  const int m = basis.modes_per_axis();
  const int P = N_ + 2;
  sin_ik_.resize(std::size_t(P) * m);
  cosw_ik_.resize(std::size_t(P) * m);
  for (int i = 0; i < P; ++i)
    for (int k = 1; k <= m; ++k) {
      sin_ik_[std::size_t(i) * m + (k - 1)] = std::sin(k * kPi * i * h_);
      cosw_ik_[std::size_t(i) * m + (k - 1)] = k * std::cos(k * kPi * i * h_);
    }
  wt_.assign(P, 1.0);
  wt_.front() = wt_.back() = 0.5;
}

std::size_t NodeEval::grid_size() const {
  const std::size_t P = N_ + 2;
  return basis_->dim() == 1 ? P : P * P;
}

void NodeEval::field(std::span<const double> coeffs, std::span<double> out) const {
  const int m = basis_->modes_per_axis();
  const int P = N_ + 2;
  const double root2 = std::sqrt(2.0);
  if (basis_->dim() == 1) {
    for (int i = 0; i < P; ++i)
      out[i] = root2 * dot_pairwise(coeffs.data(), &sin_ik_[std::size_t(i) * m], m);
    return;
  }
  std::vector<double> a(std::size_t(m) * m, 0.0);
  const auto& modes = basis_->modes();
  for (std::size_t j = 0; j < modes.size(); ++j)
    a[std::size_t(modes[j].k1 - 1) * m + (modes[j].k2 - 1)] = coeffs[j];
  std::vector<double> t(std::size_t(P) * m);
  for (int i2 = 0; i2 < P; ++i2)
    for (int k1 = 0; k1 < m; ++k1)
      t[std::size_t(i2) * m + k1] =
          dot_pairwise(&a[std::size_t(k1) * m], &sin_ik_[std::size_t(i2) * m], m);
  for (int i1 = 0; i1 < P; ++i1)
    for (int i2 = 0; i2 < P; ++i2)
      out[std::size_t(i1) * P + i2] =
          2.0 * dot_pairwise(&sin_ik_[std::size_t(i1) * m], &t[std::size_t(i2) * m], m);
}

void NodeEval::gradient(std::span<const double> coeffs, std::span<double> g1,
                        std::span<double> g2) const {
  const int m = basis_->modes_per_axis();
  const int P = N_ + 2;
  const double root2 = std::sqrt(2.0);
  if (basis_->dim() == 1) {
    for (int i = 0; i < P; ++i)
      g1[i] = root2 * kPi * dot_pairwise(coeffs.data(), &cosw_ik_[std::size_t(i) * m], m);
    return;
  }
  std::vector<double> a(std::size_t(m) * m, 0.0);
  const auto& modes = basis_->modes();
  for (std::size_t j = 0; j < modes.size(); ++j)
    a[std::size_t(modes[j].k1 - 1) * m + (modes[j].k2 - 1)] = coeffs[j];
  std::vector<double> ts(std::size_t(P) * m), tc(std::size_t(P) * m);
  for (int i2 = 0; i2 < P; ++i2)
    for (int k1 = 0; k1 < m; ++k1) {
      ts[std::size_t(i2) * m + k1] =
          dot_pairwise(&a[std::size_t(k1) * m], &sin_ik_[std::size_t(i2) * m], m);
      tc[std::size_t(i2) * m + k1] =
          dot_pairwise(&a[std::size_t(k1) * m], &cosw_ik_[std::size_t(i2) * m], m);
    }
  for (int i1 = 0; i1 < P; ++i1)
    for (int i2 = 0; i2 < P; ++i2) {
      const std::size_t at = std::size_t(i1) * P + i2;
      g1[at] = 2.0 * kPi *
               dot_pairwise(&cosw_ik_[std::size_t(i1) * m], &ts[std::size_t(i2) * m], m);
      g2[at] = 2.0 * kPi *
               dot_pairwise(&sin_ik_[std::size_t(i1) * m], &tc[std::size_t(i2) * m], m);
    }
}

double NodeEval::trapezoid(std::span<const double> values) const {
  const int P = N_ + 2;
  if (basis_->dim() == 1) {
    std::vector<double> v(values.begin(), values.end());
    v.front() *= 0.5;
    v.back() *= 0.5;
    return h_ * sum_pairwise(v);
  }
  std::vector<double> rows(P);
  for (int i1 = 0; i1 < P; ++i1)
    rows[i1] = wt_[i1] * dot_pairwise(&values[std::size_t(i1) * P], wt_.data(), P);
  return h_ * h_ * sum_pairwise(rows);
}

double NodeEval::trapezoid_weighted(std::span<const double> values, std::span<const double> u,
                                    std::span<const double> v) const {
  const int P = N_ + 2;
  std::vector<double> wu(P), wv(P), rows(P);
  for (int i = 0; i < P; ++i) {
    wu[i] = wt_[i] * u[i];
    wv[i] = wt_[i] * v[i];
  }
  for (int i1 = 0; i1 < P; ++i1)
    rows[i1] = wu[i1] * dot_pairwise(&values[std::size_t(i1) * P], wv.data(), P);
  return h_ * h_ * sum_pairwise(rows);
}

void NodeEval::sin_table(int k, std::span<double> out) const {
  const int P = N_ + 2;
  for (int i = 0; i < P; ++i) out[i] = std::sin(k * kPi * i * h_);
}

void NodeEval::cos_table(int k, std::span<double> out) const {
  const int P = N_ + 2;
  for (int i = 0; i < P; ++i) out[i] = std::cos(k * kPi * i * h_);
}

}  // namespace stefan
