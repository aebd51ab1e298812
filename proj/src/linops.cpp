#include "shbreg/linops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shbreg/errors.hpp"
#include "shbreg/rng.hpp"

namespace shbreg {

std::shared_ptr<const Grid> make_trapezoid_grid(double a, double b, std::size_t m) {
  if (m < 2) throw ConfigError("trapezoid grid needs m >= 2, got " + std::to_string(m));
  if (!(b > a)) throw ConfigError("trapezoid grid needs b > a");

  auto grid = std::make_shared<Grid>();
  grid->a = a;
  grid->b = b;
  grid->nodes.resize(m);
  grid->weights.resize(m);
  const double h = (b - a) / static_cast<double>(m - 1);
  for (std::size_t j = 0; j < m; ++j) {
    grid->nodes[j] = a + static_cast<double>(j) * h;
    grid->weights[j] = h;
  }
  grid->nodes[m - 1] = b;
  grid->weights[0] = 0.5 * h;
  grid->weights[m - 1] = 0.5 * h;
  return grid;
}

double weighted_dot(const Grid& grid, std::span<const double> x, std::span<const double> y) {
  detail::require_same_size(x.size(), grid.size(), "weighted_dot(x)");
  detail::require_same_size(y.size(), grid.size(), "weighted_dot(y)");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += grid.weights[j] * x[j] * y[j];
  return s;
}

double weighted_norm_sq(const Grid& grid, std::span<const double> x) {
  return weighted_dot(grid, x, x);
}

double integrate(const Grid& grid, std::span<const double> x) {
  detail::require_same_size(x.size(), grid.size(), "integrate");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += grid.weights[j] * x[j];
  return s;
}

RowOperator::RowOperator(std::shared_ptr<const Grid> grid, Vector kernel_row)
    : grid_(std::move(grid)), kernel_row_(std::move(kernel_row)) {
  if (!grid_) throw ConfigError("RowOperator needs a grid");
  detail::require_same_size(kernel_row_.size(), grid_->size(), "RowOperator kernel row");
  weighted_row_.resize(kernel_row_.size());
  for (std::size_t j = 0; j < kernel_row_.size(); ++j) {
    weighted_row_[j] = grid_->weights[j] * kernel_row_[j];
    norm_sq_ += weighted_row_[j] * kernel_row_[j];
  }
}

double RowOperator::apply(std::span<const double> x) const {
  detail::require_same_size(x.size(), weighted_row_.size(), "RowOperator::apply");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += weighted_row_[j] * x[j];
  return s;
}

Vector RowOperator::adjoint_apply(double v) const {
  Vector out(kernel_row_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = kernel_row_[j] * v;
  return out;
}

void RowOperator::adjoint_axpy(double v, std::span<double> out) const {
  detail::require_same_size(out.size(), kernel_row_.size(), "RowOperator::adjoint_axpy");
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += kernel_row_[j] * v;
}

OperatorBundle::OperatorBundle(std::vector<RowOperator> rows, double norm_tol)
    : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("OperatorBundle needs at least one row");
  const Grid* g = &rows_.front().grid();
  for (const auto& r : rows_) {
    if (&r.grid() != g) throw DimensionError("OperatorBundle rows must share one grid");
  }
  full_norm_sq_ = bundle_norm_sq(rows_, norm_tol);
}

void OperatorBundle::apply(std::span<const double> x, std::span<double> out) const {
  detail::require_same_size(out.size(), rows_.size(), "OperatorBundle::apply");
  for (std::size_t i = 0; i < rows_.size(); ++i) out[i] = rows_[i].apply(x);
}

void OperatorBundle::adjoint_apply(std::span<const double> lambda, std::span<double> out) const {
  detail::require_same_size(lambda.size(), rows_.size(), "OperatorBundle::adjoint_apply");
  detail::require_same_size(out.size(), grid().size(), "OperatorBundle::adjoint_apply(out)");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i].adjoint_axpy(lambda[i], out);
}

namespace kernels {

void gram_apply_serial(const std::vector<RowOperator>& rows, std::span<const double> x,
                       std::span<double> scratch, std::span<double> out) {
  for (std::size_t i = 0; i < rows.size(); ++i) scratch[i] = rows[i].apply(x);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto k = rows[i].kernel_row();
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += k[j] * scratch[i];
  }
}

void gram_apply(const std::vector<RowOperator>& rows, std::span<const double> x,
                std::span<double> scratch, std::span<double> out) {
  const auto p = static_cast<std::ptrdiff_t>(rows.size());
  const auto m = static_cast<std::ptrdiff_t>(out.size());

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < p; ++i) scratch[i] = rows[i].apply(x);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < p; ++i) s += rows[i].kernel_row()[j] * scratch[i];
    out[j] = s;
  }
}

}  // namespace kernels

double bundle_norm_sq(const std::vector<RowOperator>& rows, double tol) {
  if (!(tol > 0.0)) throw ConfigError("bundle_norm_sq needs tol > 0");
  if (rows.empty()) throw ConfigError("bundle_norm_sq needs at least one row");
  const Grid& grid = rows.front().grid();
  const std::size_t m = grid.size();

  // A positive start vector is never orthogonal to the Perron vector of a
  // positive kernel; the jitter covers sign-changing rows.
  Vector v(m);
  CounterRng rng(0x5eed, 0);
  for (auto& vj : v) vj = 1.0 + 0.5 * rng.uniform_pm1();

  Vector scratch(rows.size());
  Vector gv(m);
  double previous = 0.0;
  for (std::size_t it = 0; it < kPowerIterationMaxIters; ++it) {
    const double vv = weighted_norm_sq(grid, v);
    if (vv == 0.0) return 0.0;
    kernels::gram_apply(rows, v, scratch, gv);
    // <v, A*A v>_w / <v, v>_w = ||A v||^2 / ||v||_w^2
    double av = 0.0;
    for (double s : scratch) av += s * s;
    const double quotient = av / vv;
    if (quotient == 0.0) return 0.0;
    if (it > 0 && std::abs(quotient - previous) < tol * quotient) {
      return kNormSafetyFactor * quotient;
    }
    previous = quotient;
    const double scale = 1.0 / std::sqrt(weighted_norm_sq(grid, gv));
    for (std::size_t j = 0; j < m; ++j) v[j] = gv[j] * scale;
  }
  throw NumericalError("bundle_norm_sq: power iteration did not converge in " +
                       std::to_string(kPowerIterationMaxIters) + " iterations");
}

}  // namespace shbreg
