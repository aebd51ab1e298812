#pragma once

// Command-line front end: experiment reproductions (CSV + SVG) and the
// verification checks.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace shbreg::cli {

enum class Command { Example1, Example2, RateCheck, StabilityCheck, OracleCheck, CompareSgd };
enum class PolicyChoice { Const, Dp };

/// Unset optionals take the per-command defaults (see resolve()).
struct CliConfig {
  Command command = Command::Example1;
  std::optional<std::vector<double>> rel_levels;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> iters;
  PolicyChoice policy = PolicyChoice::Const;
  std::optional<double> mu0;
  std::optional<double> tau;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  std::optional<std::size_t> p;
  std::optional<std::size_t> m;
  double bound_scale = 1.0;   // stability-check: multiplies the proven bound
  double lambda_scale = 1.0;  // rate-check: scales the random lambda^dagger
};

/// CliConfig with every default filled in.
struct Resolved {
  Command command;
  std::vector<double> rel_levels;
  std::size_t runs;
  std::size_t iters;
  PolicyChoice policy;
  double mu0;
  double tau;
  std::uint64_t seed;
  std::filesystem::path out_dir;
  std::size_t p;
  std::size_t m;
  double bound_scale;
  double lambda_scale;
};

/// Applies per-command defaults and validates ranges. Throws ConfigError.
Resolved resolve(const CliConfig& config);

std::string command_name(Command c);

/// Level label used in file names, e.g. 0.01 -> "0.01".
std::string level_tag(double level);

/// Example 1 ensembles: ex1_<level>_<const|dp>.csv per level (const always,
/// dp as well when policy = dp) and ex1.svg. Returns written paths.
std::vector<std::filesystem::path> cmd_example1(const CliConfig& config, std::ostream& log);

/// Example 2 entropy ensembles: ex2_<level>_entropy.csv, plus
/// ex2_<level>_entropy-DP.csv when policy = dp, and ex2.svg.
std::vector<std::filesystem::path> cmd_example2(const CliConfig& config, std::ostream& log);

/// Example 1 heavy-ball vs SGD: sgd_<level>_shb.csv, sgd_<level>_sgd.csv, compare_sgd.svg.
std::vector<std::filesystem::path> cmd_compare_sgd(const CliConfig& config, std::ostream& log);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;  // space-separated key=value pairs
};

CheckOutcome stability_check(const CliConfig& config);
CheckOutcome rate_check(const CliConfig& config);
CheckOutcome oracle_check(const CliConfig& config);

/// Runs the check named by config.command, prints
/// `check=<name> status=PASS|FAIL <detail>` and returns 0 iff it passed.
int cmd_verify(const CliConfig& config, std::ostream& out);

/// Parses argv and dispatches; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace shbreg::cli
