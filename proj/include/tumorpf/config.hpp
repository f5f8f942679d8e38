#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "tumorpf/optimize.hpp"
#include "tumorpf/problem.hpp"

namespace tpf {

/// A scalar field given in the config: a number, an expression string in
/// x, y, t, or {"file": path, "column": name} pointing at a CSV table.
struct FieldSource {
  enum class Kind { Constant, Expression, File };
  Kind kind = Kind::Constant;
  double value = 0.0;
  std::string text;    // expression source or absolute file path
  std::string column;  // file only; empty = last column

  static FieldSource constant(double v);
  static FieldSource expression(std::string source);
  static FieldSource file(std::string path, std::string column = "");

  /// Value at every node for the time t; files must not have a level column.
  Field sample(const Grid& grid, double t, const std::string& key) const;
  /// One field per level, with times[level] used by expressions.
  FieldSeries sample(const Grid& grid, const std::vector<double>& times,
                     const std::string& key) const;
};

struct VerifyOptions {
  int gradient_dirs = 10;
  int stability_pairs = 4;
  double yosida_eps = 1e-2;
  std::uint64_t seed = 1;
};

struct OutputOptions {
  std::string out_dir = "out";
  std::vector<double> snapshot_times;  // empty: 11 equally spaced levels
};

/// Everything one run needs. Every field has a default, so `{}` is a valid
/// (all-zero) configuration.
struct RunConfig {
  int dim = 1;
  std::vector<int> shape{65};
  std::vector<double> lengths{1.0};
  double T = 1.0;
  int steps = 100;
  ModelParams model;
  PotentialSpec potential;
  NonlinearitySpec nonlin;
  FieldSource mu0, phi0, sigma0;
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  FieldSource target_Q, target_Omega;
  FieldSource u1_initial, u2_initial;
  FieldSource lower1 = FieldSource::constant(0.0), upper1 = FieldSource::constant(1.0);
  FieldSource lower2 = FieldSource::constant(-1.0), upper2 = FieldSource::constant(1.0);
  SolverOptions solver;
  PgdOptions optimizer;
  SscOptions ssc;
  VerifyOptions verify;
  OutputOptions output;
};

/// Strict parse: unknown keys and ill-typed or out-of-range values throw
/// Config naming the key. Relative file paths resolve against base_dir.
RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");

/// Fully populated form; parse_config(to_json(c)) reproduces c.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Reads a JSON file (Io / Config on failure).
nlohmann::json read_config_json(const std::string& path);

/// Applies "a.b.c=value" to the raw config. The value is read as JSON when
/// it parses as JSON, as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// read_config_json + overrides + parse_config relative to the file's folder.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// The discrete problem, box and initial control described by a config.
struct Instance {
  Problem problem;
  BoxConstraints box;
  Control initial;
};

/// coarsen = k builds the problem on grids coarsened k times: (n - 1) / 2 + 1
/// nodes per axis and steps / 2 time steps per level. Needs odd node counts,
/// even step counts and no file-defined fields.
Instance build_instance(const RunConfig& config, int coarsen = 0);

/// Snapshot levels for the output block (sorted, unique, nearest level).
std::vector<int> snapshot_levels(const RunConfig& config);

}  // namespace tpf
