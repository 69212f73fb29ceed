#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uclab/error.hpp"
#include "uclab/gmt.hpp"
#include "uclab/propagation.hpp"
#include "uclab/serialize.hpp"

namespace uclab::cli {

using io::Json;

std::string version();

enum class ExperimentKind {
  census,
  hyperplane_census,
  capacity_census,
  width,
  sublevel_content,
  critical_set,
  recursion,
  fit_propagation,
  weak_bound,
  doubling_index,
  maximal_doubling,
  hausdorff_content,
  riesz_capacity,
  counting_check,
};
std::string to_string(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_string(const std::string& s);

/// Every problem found in a config, one message per field.
class ValidationError : public InvalidArgument {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct NamedFunction {
  std::string name;
  harmonic::HarmonicFunction u;
};

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::census;
  Json source;  // the config as given

  int dim = 2;
  std::vector<NamedFunction> functions;
  lattice::Cube cube = lattice::Cube::unit(2);
  std::vector<std::int64_t> child;  // width: offsets of q inside the cube

  // lattice
  int A = 4;
  int generations = 1;
  int generations_down = 1;
  std::int64_t K = 27;

  // thresholds
  std::optional<double> N;
  std::optional<double> N_factor;  // N = factor * measured lower bound of N(Q) (N(2Q) for hyperplane kinds)
  double a = 1.0;
  double s = 0.5;
  double r = 0.1;
  Point x;
  std::vector<double> deltas{0.5};
  std::vector<double> etas{0.5};
  double c = 1.0;
  double C1 = 1.0;

  // tolerances
  double sup_tolerance = 1e-4;
  double quadrature_tolerance = 1e-10;
  int grid_density = 9;
  int rungs = 8;
  double ratio = 0.0;
  int width_rungs = 6;
  int directions = 12;
  int compare_depth = 12;
  int search_depth = 64;
  bool check_normalization = true;
  double normalization_tolerance = 1e-3;

  propagation::RecursionParams recursion;
  propagation::RecursionGrid grid;
  double boundary_C = 2.0;
  double boundary_beta = 1.0;
  double boundary_N0 = 10.0;

  std::optional<lattice::GridSet> set;
  gmt::CapacityOptions capacity;

  double kappa = 1.0;
  double epsilon = 1.0;
  double C_census = 2.0;
  double beta = 1.0;

  std::optional<std::uint64_t> seed;
  int workers = 1;
};

/// Validates and resolves a config (zoo generation, sets). Throws
/// ValidationError listing every violated field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentReport {
  std::string name;
  Json payload;          // deterministic: identical config and seed give identical bytes
  bool applicable = true;
  std::vector<std::string> failures;
  double wall_clock = 0.0;
  /// Sweep table rows: function name and headline metrics.
  std::vector<std::string> metric_names;
  std::vector<std::pair<std::string, std::vector<double>>> metrics;
  /// Extra CSV outputs: file suffix and content.
  std::vector<std::pair<std::string, std::string>> side_outputs;
};

ExperimentReport run(const ExperimentConfig& cfg);

/// The config with one numeric field replaced. `axis` is a dotted path
/// ("thresholds.a") or a bare parameter name ("a", "delta", "A", ...).
Json with_axis(const Json& config, const std::string& axis, double value);

/// Writes <name>.json, <name>.timing.json and side outputs into dir.
std::vector<std::filesystem::path> write_report(const ExperimentReport& rep, const std::filesystem::path& dir);

struct SweepResult {
  std::vector<ExperimentReport> reports;
  std::string csv;  // value, function, metrics...
};

/// One run per value, run concurrently on up to `workers` threads.
SweepResult sweep(const Json& config, const std::string& axis, const std::vector<double>& values, int workers);

/// Exit codes of the command-line runner.
enum class ExitCode : int { ok = 0, validation_error = 1, inapplicable = 2, internal_failure = 3 };

}  // namespace uclab::cli
