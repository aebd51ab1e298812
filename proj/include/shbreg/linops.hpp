#pragma once

// Discretized operators between the quadrature-weighted function space X and
// scalar data spaces. X carries the inner product <x, y>_w = sum_j w_j x_j y_j,
// so adjoints and norms approximate their continuous counterparts.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace shbreg {

using Vector = std::vector<double>;

struct Grid {
  double a = 0.0;
  double b = 0.0;
  Vector nodes;
  Vector weights;

  std::size_t size() const { return nodes.size(); }
};

/// Uniform trapezoidal grid with m nodes on [a, b]. Throws ConfigError for m < 2 or b <= a.
std::shared_ptr<const Grid> make_trapezoid_grid(double a, double b, std::size_t m);

double weighted_dot(const Grid& grid, std::span<const double> x, std::span<const double> y);
double weighted_norm_sq(const Grid& grid, std::span<const double> x);
/// Trapezoidal integral of x over the grid.
double integrate(const Grid& grid, std::span<const double> x);

/// One equation A_i x = integral of kappa(s_i, t) x(t) dt, mapping X to R.
class RowOperator {
 public:
  RowOperator(std::shared_ptr<const Grid> grid, Vector kernel_row);

  /// sum_j w_j k_j x_j
  double apply(std::span<const double> x) const;

  /// Adjoint in the weighted geometry: the vector k * v.
  Vector adjoint_apply(double v) const;

  /// out += v * k, the allocation-free form of adjoint_apply used by the solvers.
  void adjoint_axpy(double v, std::span<double> out) const;

  /// ||A_i||^2 = sum_j w_j k_j^2 (closed form for a rank-one row).
  double norm_sq() const { return norm_sq_; }

  std::span<const double> kernel_row() const { return kernel_row_; }
  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::size_t size() const { return kernel_row_.size(); }

 private:
  std::shared_ptr<const Grid> grid_;
  Vector kernel_row_;
  Vector weighted_row_;  // w_j * k_j
  double norm_sq_ = 0.0;
};

inline double op_norm_sq(const RowOperator& row) { return row.norm_sq(); }

/// Power-iteration limits for bundle_norm_sq.
inline constexpr std::size_t kPowerIterationMaxIters = 10000;
inline constexpr double kNormSafetyFactor = 1.01;

/// The stacked operator A = (A_1, ..., A_p) with a cached upper estimate of ||A||^2.
class OperatorBundle {
 public:
  explicit OperatorBundle(std::vector<RowOperator> rows, double norm_tol = 1e-10);

  std::size_t size() const { return rows_.size(); }
  const RowOperator& row(std::size_t i) const { return rows_[i]; }
  const std::vector<RowOperator>& rows() const { return rows_; }
  const Grid& grid() const { return rows_.front().grid(); }
  const std::shared_ptr<const Grid>& grid_ptr() const { return rows_.front().grid_ptr(); }

  /// 1.01 x the converged largest eigenvalue of A*A.
  double full_norm_sq() const { return full_norm_sq_; }

  /// A x into out (length p).
  void apply(std::span<const double> x, std::span<double> out) const;
  /// out = A* lambda = sum_i lambda_i k_i.
  void adjoint_apply(std::span<const double> lambda, std::span<double> out) const;

 private:
  std::vector<RowOperator> rows_;
  double full_norm_sq_ = 0.0;
};

/// Power iteration on the weighted Gram operator A*A. Stops once the Rayleigh
/// quotient changes by less than tol (relative) and returns it times 1.01.
/// Throws NumericalError after kPowerIterationMaxIters iterations.
double bundle_norm_sq(const std::vector<RowOperator>& rows, double tol);
inline double bundle_norm_sq(const OperatorBundle& bundle, double tol) {
  return bundle_norm_sq(bundle.rows(), tol);
}

namespace kernels {

/// out = A*A x. OpenMP over rows, then over nodes; each output entry sums rows
/// in index order, so the result is bit-identical to gram_apply_serial.
void gram_apply(const std::vector<RowOperator>& rows, std::span<const double> x,
                std::span<double> scratch, std::span<double> out);

/// Serial reference for gram_apply.
void gram_apply_serial(const std::vector<RowOperator>& rows, std::span<const double> x,
                       std::span<double> scratch, std::span<double> out);

}  // namespace kernels
}  // namespace shbreg
