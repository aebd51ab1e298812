#pragma once

// Test problems: first-kind Fredholm equations sampled at p points and
// discretized by the trapezoidal rule, plus the uniform relative noise model.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

#include "shbreg/linops.hpp"

namespace shbreg {

struct ProblemInstance {
  std::string name;
  std::shared_ptr<const Grid> grid;
  Vector sample_points;  // s_i, length p
  OperatorBundle bundle;
  Vector truth;       // x^dagger on the grid nodes
  Vector exact_data;  // y_i = A_i x^dagger

  std::size_t p() const { return bundle.size(); }
  std::size_t m() const { return grid->size(); }
};

/// Assembles a problem and computes exact_data = A truth.
ProblemInstance make_problem(std::string name, Vector sample_points, OperatorBundle bundle,
                             Vector truth);

/// Uniform sample points s_i = a + i (b - a)/(p - 1), i = 0..p-1.
Vector uniform_samples(double a, double b, std::size_t p);

namespace example1 {
/// phi(s) = (1 + cos(pi s / 3)) for |s| < 3, else 0.
double phi(double s);
inline double kernel(double s, double t) { return phi(s - t); }
/// sin(pi t/12) + sin(pi t/3) + t^2 (1 - t)/200
double truth(double t);
}  // namespace example1

namespace example2 {
/// 4 exp(-(s - t)^2 / 0.0064)
double kernel(double s, double t);
/// Unnormalized density exp(-60 (t-0.3)^2) + 0.3 exp(-40 (t-0.8)^2).
double truth_shape(double t);
}  // namespace example2

/// Convolution kernel on [-6, 6], m trapezoid nodes, p uniform samples.
ProblemInstance build_example1(std::size_t p, std::size_t m);

/// Gaussian kernel on [0, 1] with m = p nodes; truth normalized to a density.
ProblemInstance build_example2(std::size_t p);

/// Random kernel rows uniform in [-1, 1] on [0, 1], truth uniform in [0, 2].
/// Used for the small verification instances.
ProblemInstance build_random(std::size_t p, std::size_t m, std::uint64_t seed);

struct NoisyData {
  Vector values;         // y_i^delta
  Vector per_eq_levels;  // delta_i
  double total_level = 0.0;  // sqrt(sum delta_i^2)
  double rel_level = 0.0;
  std::uint64_t seed = 0;
};

/// Stream id used for noise draws, distinct from every ensemble run index.
inline constexpr std::uint64_t kNoiseStream = 0xffff'ffff'0000'0001ULL;

/// y_i^delta = y_i + rel_level * ||y||_inf * eps_i with eps_i uniform on [-1, 1].
NoisyData add_noise(const ProblemInstance& problem, double rel_level, std::uint64_t seed);

/// Same noise model, parameterized by the total level delta instead of rel_level.
NoisyData add_noise_total(const ProblemInstance& problem, double total_level, std::uint64_t seed);

/// The exact data wrapped as NoisyData with zero levels.
NoisyData exact_data(const ProblemInstance& problem);

double sup_norm(std::span<const double> v);

/// Columns of a serialized problem, as read back from text.
struct ProblemTable {
  std::string name;
  double a = 0.0;
  double b = 0.0;
  std::size_t p = 0;
  std::size_t m = 0;
  Vector nodes, weights, truth;
  Vector samples, exact_data;
};

/// Text format:
///   # shbreg-problem v1
///   name <label>
///   a <a> / b <b> / p <p> / m <m>
///   grid node weight truth      (m lines)
///   data sample exact           (p lines)
/// Numbers are written with %.17g so a read-back is exact.
void write_problem(std::ostream& os, const ProblemInstance& problem);
ProblemTable read_problem(std::istream& is);
ProblemTable to_table(const ProblemInstance& problem);

}  // namespace shbreg
