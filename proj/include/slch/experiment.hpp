#pragma once

// Experiment configuration, mode dispatch, artifact writing and the error
// contract shared with the command-line tool.
//
// Exit codes: 0 ok, 2 invalid config, 3 blow-up, 4 span error or missing artifact.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "slch/dynamics.hpp"
#include "slch/error.hpp"
#include "slch/model.hpp"

namespace slch {

/// A file the caller expected on disk is absent.
class MissingArtifactError : public Error {
 public:
  MissingArtifactError(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class Mode { Audit, Simulate, Absorb, Tails, Measure, Liouville, FullSuite };

std::string_view mode_name(Mode m) noexcept;
Mode parse_mode(std::string_view name);

struct NoiseBlock {
  std::vector<std::uint64_t> seeds{1};
  double dt = 1e-2;
  double t_min = -300.0;
  double t_max = 50.0;
  double burn_in = 0.0;
};

struct AuditBlock {
  std::size_t samples = 10000;
  double radius = 10.0;
  std::uint64_t seed = 0;
};

struct SimulateBlock {
  double tau = 0.0;
  double T = 10.0;
  double initial_scale = 1.0;
  std::size_t record_stride = 10;
};

struct AbsorbBlock {
  double tau = 0.0;
  std::vector<double> pullback_times{5, 10, 20, 40, 80, 120};
  std::vector<double> scales{1, 10, 100};
  std::size_t gaussian_directions = 1;
  double growth_power = 0.0;
  bool zero_forcing_control = true;
  /// Step for absorption runs; 0 uses scheme.dt. Large initial norms make the explicit part stiff.
  double dt = 0.0;
};

struct TailsBlock {
  double tau = 0.0;
  double t = 60.0;
  std::vector<int> I{8, 16, 32, 64};
  double initial_scale = 10.0;
};

struct MeasureBlock {
  double tau = 0.0;
  std::vector<double> windows{50, 100, 200};
  double stride = 1.0;
  double t_step = 1.0;
  double clip = 100.0;
  std::size_t atom_cap = 0;
};

struct LadderRung {
  double window;
  double dt;
};

struct LiouvilleBlock {
  double s = 0.0;
  double t = 10.0;
  std::vector<LadderRung> ladder{{50, 1e-2}, {100, 5e-3}, {200, 2.5e-3}};
  double start_spacing = 1.0;
  double radius = 4.0;
  double tolerance = 0.05;
  /// Ito-formula study: horizon and the step ladder for the EM trajectories.
  double ito_T = 1.0;
  std::vector<double> ito_dts{1e-2, 5e-3, 2.5e-3, 1.25e-3};
};

struct ExperimentConfig {
  Mode mode = Mode::Audit;
  ModelSpec model;
  NoiseBlock noise;
  SchemeConfig scheme;
  AuditBlock audit;
  SimulateBlock simulate;
  AbsorbBlock absorb;
  TailsBlock tails;
  MeasureBlock measure;
  LiouvilleBlock liouville;
  std::string output_dir = "out";
  unsigned workers = 0;
  /// Canonical echo of the parsed configuration (defaults filled in).
  std::string canonical;

  /// Parses JSON text; unknown keys and bad values raise ConfigError.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& file);
  /// Parameter inequalities (ConfigError) and span arithmetic (SpanError).
  void validate() const;
};

struct RunSummary {
  std::vector<std::string> files;  // relative to the output directory, in write order
  std::map<std::string, std::string> checks;  // short outcome lines for the console
};

/// Validates, dispatches the mode and writes every artifact plus manifest.json.
RunSummary run_experiment(const ExperimentConfig& cfg);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path& file, const std::string& contents);

struct ErrorReport {
  int exit_code = 1;
  std::string json;  // {"code": ..., "message": ..., "context": {...}}
};

/// Maps an exception from run/validate/emit to its exit code and JSON error.
ErrorReport describe_error(const std::exception& e);

/// Tidy .dat files and a gnuplot stub from the artifacts in dir.
std::vector<std::string> emit_plotdata(const std::filesystem::path& dir);

}  // namespace slch
