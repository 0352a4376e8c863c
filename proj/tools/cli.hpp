#pragma once

// Experiment runner behind the `cosyn` executable. Each command reads a
// RunConfig, writes its CSV artifacts plus a JSON manifest into `out`, and
// prints a short report.

#include "cosyn/product.hpp"
#include "cosyn/quantize.hpp"
#include "cosyn/scltl.hpp"
#include "cosyn/system.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cosyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

struct RunConfig {
  /// room, traffic, bmw, or the path of a key=value system file.
  std::string system = "room";
  /// Empty selects the system's default specification.
  std::string formula;
  /// Proposition names for `compile` without a system.
  std::vector<std::string> ap;
  std::size_t horizon = 10;
  std::optional<double> delta;
  std::optional<double> epsilon;
  std::optional<double> lipschitz;
  double lebesgue = 1.0;
  std::optional<std::uint64_t> episodes;
  std::uint64_t seed = 1;
  double kappa = 0.1;
  RewardMode reward = RewardMode::Sparse;
  std::string out = ".";
  std::vector<double> x0;
  /// Q-table CSV consumed by eval and simulate.
  std::string policy;
  std::vector<double> deltas;
  std::uint64_t rollouts = 0;
  bool minimize = false;
  bool uniform_restarts = false;
  unsigned threads = 0;
  /// Benchmark parameter overrides such as `room.beta=0.03`.
  std::map<std::string, std::string> params;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Applies `key=value` lines (blank lines and `#` comments ignored) to
/// `config`. Keys are flag names without dashes, or `<system>.<param>`.
void apply_config_file(const std::string& path, RunConfig& config);
void apply_setting(const std::string& key, const std::string& value, RunConfig& config);

/// Everything a command needs about the selected system.
struct Setup {
  SystemModel model;
  Formula formula;
  Dfa dfa;
  Vector x0;
  std::optional<Grid> grid;
  /// Lipschitz constant and where it came from (flag, closed form).
  std::optional<double> lipschitz;
  std::string lipschitz_source;
  std::optional<double> epsilon;
};

SystemModel make_system(const RunConfig& config);
/// Builds model, automaton, initial state and (if requested) the grid,
/// resolving delta from epsilon when needed.
Setup make_setup(const RunConfig& config, bool need_grid = true);

int cmd_compile(const RunConfig& config, std::ostream& out);
int cmd_dp(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_simulate(const RunConfig& config, std::ostream& out);

/// Parses argv, dispatches and maps errors to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cosyn::cli
