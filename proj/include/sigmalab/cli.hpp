#pragma once

// Command-line front end: run configuration, the five commands and report
// emission. tools/sigmalab.cpp is a thin wrapper around run_cli.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigmalab/experiments.hpp"
#include "sigmalab/functional.hpp"
#include "sigmalab/report.hpp"

namespace sigmalab {

/// Bad flags, bad config file or an invalid combination of options.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double volume = 1e-8;
  double sigma_routes = 1e-9;
  double lemmas = 1e-8;
  double identities = 1e-6;
  double dF = 1e-7;
  double d2F_sphere = 1e-4;
  double d2F_product = 1e-6;
  double scaling = 1e-10;
  double sign = 1e-8;
  double obata = 1e-7;
  double volume_ratio = 1e-12;
  double certificate = 1e-12;
  double audit = 1e-10;
  double compare = 1e-10;
};

struct Triple {
  int n = 0, k = 0, l = 0;
};

struct RunConfig {
  std::string command;
  std::optional<int> n, k, l;
  std::vector<Triple> tuples;  ///< explicit list; overrides n/k/l when non-empty
  double lambda = 1.0;
  std::string model = "auto";  ///< auto, sphere or product
  int order = 0;               ///< quadrature order, 0 for the per-command default
  std::vector<double> t_grid = default_t_grid();
  int trials = 100;
  double epsilon = 1e-2;
  std::uint64_t seed = kDefaultSeed;
  BetaVariant beta_variant = BetaVariant::n_minus_2l;
  std::string out = "sigmalab_out";
  bool strict_paper = false;
  int cases = 20;
  Tolerances tol;

  /// Everything except the output directory, in the config-file key layout.
  nlohmann::json to_json() const;
};

const std::vector<std::string>& command_names();

/// Flat keys: n, k, l, tuples, lambda, model, order, t_grid, trials, epsilon,
/// seed, beta_variant, out, strict_paper, cases and tol_<name>. Unknown keys
/// and wrong types raise ConfigError.
void apply_config_json(RunConfig& c, const nlohmann::json& j);
void load_config_file(RunConfig& c, const std::string& path);

/// The (n, k, l) list a command will run, each validated.
std::vector<Triple> resolve_tuples(const RunConfig& c);
/// Command-specific checks; throws ConfigError.
void validate_config(const RunConfig& c);

Report run_command(const RunConfig& c);

/// Parses argv, runs the command, writes report.csv and summary.json under
/// --out. Returns 0, 1 (usage or config error) or 2 (failed checks).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sigmalab
