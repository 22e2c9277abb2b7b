#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stablesde/mcmc.hpp"
#include "stablesde/model.hpp"

namespace stablesde {

/// Value in the TOML subset read by parse_toml: strings, numbers, booleans
/// and flat arrays of those.
struct TomlValue {
  enum class Kind { string, number, boolean, array };
  Kind kind = Kind::string;
  std::string text;  ///< string contents, or the number's source text
  double number = 0.0;
  bool boolean = false;
  std::vector<TomlValue> items;
  std::size_t line = 0;
};

/// Keys flattened with their table path: "mcmc.iterations".
using TomlTable = std::map<std::string, TomlValue>;

/// Supports [table] and [a.b] headers, key = value, # comments, basic
/// strings with \" \\ \n \t escapes, and arrays (which may span lines).
/// Throws ConfigError naming the line.
TomlTable parse_toml(const std::string& text);

struct ModelBlock {
  std::string drift;
  std::string scale;
  std::vector<std::string> alpha;
  std::vector<std::string> gamma;
  std::vector<double> lower, upper;
};

struct SimulateBlock {
  std::size_t N = 0;
  double T = 1.0;
  std::vector<double> theta;
  double x0 = 0.0;
  int refine = 1;
};

struct DataBlock {
  std::optional<std::string> path;
  std::string column;  ///< header name; empty selects the last column
  double T = 1.0;      ///< observation window for file data
  std::optional<SimulateBlock> simulate;
};

struct PriorBlock {
  std::vector<std::string> kind;  ///< "normal" or "uniform" per parameter; empty means all normal(0, 1)
  std::vector<double> mean, sd;
};

struct MCMCBlock {
  std::size_t iterations = 10000;
  std::string variant = "mwg";
  double rho = 0.99;
  std::vector<double> sigma_diag;  ///< empty means 2.38^2 / p
  bool scale_by_rate = true;
  std::string init = "mle";        ///< "mle" or "truth" (simulated data only)
  std::size_t pilot = 0;           ///< pilot iterations for proposal retuning; 0 disables
  bool record_variances = false;
  std::size_t variance_stride = 100;
  std::size_t burn = 0;
  std::size_t thin = 1;
};

struct SweepBlock {
  std::vector<std::size_t> N{10, 50, 100, 250, 500, 1000, 2000};
  std::size_t replicates = 20;
  std::size_t iterations = 10000;
  bool scale_by_rate = true;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::optional<double> beta;  ///< empty means estimate from the increments
  std::string output = "out";
  ModelBlock model;
  DataBlock data;
  PriorBlock prior;
  MCMCBlock mcmc;
  SweepBlock sweep;

  ModelSpec make_model() const;
  Prior make_prior() const;
  MCMCConfig make_mcmc(std::size_t p) const;
};

/// Parses and validates; every violated field is listed in one ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical TOML text; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace stablesde
