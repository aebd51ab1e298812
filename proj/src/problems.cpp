#include "shbreg/problems.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "shbreg/errors.hpp"
#include "shbreg/rng.hpp"

namespace shbreg {

namespace {

template <class Kernel>
std::vector<RowOperator> sample_rows(const std::shared_ptr<const Grid>& grid,
                                     const Vector& samples, Kernel kernel) {
  std::vector<RowOperator> rows;
  rows.reserve(samples.size());
  for (double s : samples) {
    Vector k(grid->size());
    for (std::size_t j = 0; j < k.size(); ++j) k[j] = kernel(s, grid->nodes[j]);
    rows.emplace_back(grid, std::move(k));
  }
  return rows;
}

}  // namespace

Vector uniform_samples(double a, double b, std::size_t p) {
  Vector s(p);
  for (std::size_t i = 0; i < p; ++i) {
    s[i] = a + static_cast<double>(i) * (b - a) / static_cast<double>(p - 1);
  }
  s[p - 1] = b;
  return s;
}

ProblemInstance make_problem(std::string name, Vector sample_points, OperatorBundle bundle,
                             Vector truth) {
  detail::require_same_size(sample_points.size(), bundle.size(), "make_problem(sample_points)");
  detail::require_same_size(truth.size(), bundle.grid().size(), "make_problem(truth)");
  Vector y(bundle.size());
  bundle.apply(truth, y);
  auto grid = bundle.grid_ptr();
  return ProblemInstance{std::move(name), std::move(grid), std::move(sample_points),
                         std::move(bundle), std::move(truth), std::move(y)};
}

namespace example1 {

double phi(double s) {
  if (std::abs(s) >= 3.0) return 0.0;
  return 1.0 + std::cos(std::numbers::pi * s / 3.0);
}

double truth(double t) {
  using std::numbers::pi;
  return std::sin(pi * t / 12.0) + std::sin(pi * t / 3.0) + t * t * (1.0 - t) / 200.0;
}

}  // namespace example1

namespace example2 {

double kernel(double s, double t) {
  const double d = s - t;
  return 4.0 * std::exp(-d * d / 0.0064);
}

double truth_shape(double t) {
  return std::exp(-60.0 * (t - 0.3) * (t - 0.3)) + 0.3 * std::exp(-40.0 * (t - 0.8) * (t - 0.8));
}

}  // namespace example2

ProblemInstance build_example1(std::size_t p, std::size_t m) {
  if (p < 2) throw ConfigError("example1 needs p >= 2");
  if (m < 2) throw ConfigError("example1 needs m >= 2");
  auto grid = make_trapezoid_grid(-6.0, 6.0, m);
  Vector samples = uniform_samples(-6.0, 6.0, p);
  OperatorBundle bundle(sample_rows(grid, samples, example1::kernel));
  Vector truth(m);
  for (std::size_t j = 0; j < m; ++j) truth[j] = example1::truth(grid->nodes[j]);
  return make_problem("example1", std::move(samples), std::move(bundle), std::move(truth));
}

ProblemInstance build_example2(std::size_t p) {
  if (p < 2) throw ConfigError("example2 needs p >= 2");
  auto grid = make_trapezoid_grid(0.0, 1.0, p);
  Vector samples = grid->nodes;
  OperatorBundle bundle(sample_rows(grid, samples, example2::kernel));
  Vector truth(p);
  for (std::size_t j = 0; j < p; ++j) truth[j] = example2::truth_shape(grid->nodes[j]);
  const double c = 1.0 / integrate(*grid, truth);
  for (double& v : truth) v *= c;
  return make_problem("example2", std::move(samples), std::move(bundle), std::move(truth));
}

ProblemInstance build_random(std::size_t p, std::size_t m, std::uint64_t seed) {
  if (p < 1 || m < 2) throw ConfigError("random instance needs p >= 1, m >= 2");
  auto grid = make_trapezoid_grid(0.0, 1.0, m);
  CounterRng rng(seed, 0);
  std::vector<RowOperator> rows;
  rows.reserve(p);
  for (std::size_t i = 0; i < p; ++i) {
    Vector k(m);
    for (double& v : k) v = rng.uniform_pm1();
    rows.emplace_back(grid, std::move(k));
  }
  Vector truth(m);
  for (double& v : truth) v = 1.0 + rng.uniform_pm1();
  Vector samples(p);
  for (std::size_t i = 0; i < p; ++i) samples[i] = static_cast<double>(i);
  return make_problem("random", std::move(samples), OperatorBundle(std::move(rows)),
                      std::move(truth));
}

double sup_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

NoisyData add_noise(const ProblemInstance& problem, double rel_level, std::uint64_t seed) {
  if (!(rel_level >= 0.0)) throw ConfigError("noise level must be >= 0");
  const std::size_t p = problem.p();
  const double level = rel_level * sup_norm(problem.exact_data);

  NoisyData data;
  data.values = problem.exact_data;
  data.per_eq_levels.assign(p, level);
  data.rel_level = rel_level;
  data.seed = seed;

  CounterRng rng(seed, kNoiseStream);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double eps = rng.uniform_pm1();
    data.values[i] += level * eps;
    sum_sq += level * level;
  }
  data.total_level = std::sqrt(sum_sq);
  return data;
}

NoisyData add_noise_total(const ProblemInstance& problem, double total_level,
                          std::uint64_t seed) {
  if (!(total_level >= 0.0)) throw ConfigError("noise level must be >= 0");
  const double ysup = sup_norm(problem.exact_data);
  if (ysup == 0.0) throw ConfigError("add_noise_total: exact data are identically zero");
  const double rel = total_level / (std::sqrt(static_cast<double>(problem.p())) * ysup);
  return add_noise(problem, rel, seed);
}

NoisyData exact_data(const ProblemInstance& problem) {
  NoisyData d;
  d.values = problem.exact_data;
  d.per_eq_levels.assign(problem.p(), 0.0);
  return d;
}

ProblemTable to_table(const ProblemInstance& problem) {
  const Grid& g = *problem.grid;
  return ProblemTable{problem.name, g.a,    g.b,   problem.p(),          problem.m(),
                      g.nodes,      g.weights, problem.truth, problem.sample_points,
                      problem.exact_data};
}

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_problem(std::ostream& os, const ProblemInstance& problem) {
  const ProblemTable t = to_table(problem);
  os << "# shbreg-problem v1\n";
  os << "name " << t.name << '\n';
  os << "a " << fmt17(t.a) << '\n';
  os << "b " << fmt17(t.b) << '\n';
  os << "p " << t.p << '\n';
  os << "m " << t.m << '\n';
  os << "grid node weight truth\n";
  for (std::size_t j = 0; j < t.m; ++j) {
    os << fmt17(t.nodes[j]) << ' ' << fmt17(t.weights[j]) << ' ' << fmt17(t.truth[j]) << '\n';
  }
  os << "data sample exact\n";
  for (std::size_t i = 0; i < t.p; ++i) {
    os << fmt17(t.samples[i]) << ' ' << fmt17(t.exact_data[i]) << '\n';
  }
}

namespace {

std::string next_content_line(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.front() != '#') return line;
  }
  throw IoError("problem file: unexpected end of input");
}

template <class T>
T keyed_value(std::istream& is, const std::string& key) {
  std::istringstream ls(next_content_line(is));
  std::string k;
  T v{};
  if (!(ls >> k >> v) || k != key) throw IoError("problem file: expected '" + key + "'");
  return v;
}

double parse_double(const std::string& tok) {
  std::size_t pos = 0;
  const double v = std::stod(tok, &pos);
  if (pos != tok.size()) throw IoError("problem file: bad number '" + tok + "'");
  return v;
}

}  // namespace

ProblemTable read_problem(std::istream& is) {
  ProblemTable t;
  t.name = keyed_value<std::string>(is, "name");
  t.a = keyed_value<double>(is, "a");
  t.b = keyed_value<double>(is, "b");
  t.p = keyed_value<std::size_t>(is, "p");
  t.m = keyed_value<std::size_t>(is, "m");
  if (next_content_line(is) != "grid node weight truth") throw IoError("problem file: bad grid header");
  for (std::size_t j = 0; j < t.m; ++j) {
    std::istringstream ls(next_content_line(is));
    std::string a, b, c;
    if (!(ls >> a >> b >> c)) throw IoError("problem file: short grid row");
    t.nodes.push_back(parse_double(a));
    t.weights.push_back(parse_double(b));
    t.truth.push_back(parse_double(c));
  }
  if (next_content_line(is) != "data sample exact") throw IoError("problem file: bad data header");
  for (std::size_t i = 0; i < t.p; ++i) {
    std::istringstream ls(next_content_line(is));
    std::string a, b;
    if (!(ls >> a >> b)) throw IoError("problem file: short data row");
    t.samples.push_back(parse_double(a));
    t.exact_data.push_back(parse_double(b));
  }
  return t;
}

}  // namespace shbreg
