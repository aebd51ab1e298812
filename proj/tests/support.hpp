#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shbreg/linops.hpp"
#include "shbreg/rng.hpp"

namespace shbreg::test {

// Rows as a dense p x m matrix of kernel samples.
inline Eigen::MatrixXd kernel_matrix(const OperatorBundle& bundle) {
  Eigen::MatrixXd k(bundle.size(), bundle.grid().size());
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    const auto row = bundle.row(i).kernel_row();
    for (std::size_t j = 0; j < row.size(); ++j) k(i, j) = row[j];
  }
  return k;
}

// The weighted map expressed in orthonormal coordinates: K W^{1/2}.
inline Eigen::MatrixXd isometric_matrix(const OperatorBundle& bundle) {
  Eigen::MatrixXd k = kernel_matrix(bundle);
  const auto& w = bundle.grid().weights;
  for (std::size_t j = 0; j < w.size(); ++j) k.col(j) *= std::sqrt(w[j]);
  return k;
}

inline Vector random_vector(std::size_t n, std::uint64_t seed, std::uint64_t stream = 7) {
  CounterRng rng(seed, stream);
  Vector v(n);
  for (double& x : v) x = rng.uniform_pm1();
  return v;
}

inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    scale = std::max(scale, std::abs(b[j]));
    diff = std::max(diff, std::abs(a[j] - b[j]));
  }
  return diff / std::max(scale, 1e-300);
}

}  // namespace shbreg::test
