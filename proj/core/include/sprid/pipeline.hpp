#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sprid/okid_era.hpp"
#include "sprid/spr_fit.hpp"

namespace sprid {

/// Settings for one identification run. Every field has a flat key of the same
/// name in the config file and on the command line (see docs/config.md).
struct PipelineConfig {
  std::filesystem::path frf;  ///< frequency-response input
  std::filesystem::path tio;  ///< time-domain input
  std::filesystem::path out_dir = ".";

  /// from-okid | laguerre | kautz | mixed
  std::string basis = "kautz";
  double laguerre_a = 0.5;
  double kautz_b = -0.33;
  double kautz_c = -0.2;
  /// Comma-separated atoms for basis=mixed, e.g. "laguerre:0.5,kautz:-0.3:-0.2".
  std::string atoms;
  int n_funcs = 8;
  bool feedthrough = true;

  std::optional<double> epsilon;
  ConstraintMode mode = ConstraintMode::kAbsolute;
  int grid_mult = 4;
  int refine_rounds = 3;

  int p_window = 0;  ///< 0: max(20, 5 * order) when order is fixed, else 20
  int hankel_rows = 0;
  int hankel_cols = 0;
  double sv_threshold = 1e-6;
  int order = 0;  ///< 0: keep singular values above sv_threshold
  RealizationRoute realization = RealizationRoute::kSystemMarkov;
  /// Grid size for the model response when only time-domain data is given.
  int n_freqs = 512;

  /// Applies one key/value pair. Relative paths are resolved against base_dir.
  void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {});
  /// Throws ConfigError when the settings cannot describe a run.
  void validate() const;
  /// Every key with its effective value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  int effective_window() const;
  OkidConfig okid_config() const;
};

/// Reads "key = value" lines ('#' starts a comment), then applies overrides.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

struct PipelineReport {
  std::filesystem::path model_path;
  std::filesystem::path bode_path;
  std::filesystem::path nyquist_path;
  std::filesystem::path diagnostics_path;
  std::optional<OkidResult> okid;
  std::optional<SprFitResult> fit;
  BasisSpec basis;
};

/// Runs identification end to end and writes model.txt, bode.txt, nyquist.txt and
/// diagnostics.txt into out_dir. Errors carry a "[stage]" prefix; on failure no
/// output file is left behind.
PipelineReport run_pipeline(const PipelineConfig& cfg);

inline const std::vector<std::string> kPipelineOutputs = {"model.txt", "bode.txt", "nyquist.txt",
                                                           "diagnostics.txt"};

struct CheckReport {
  double epsilon = 0.0;
  bool schur = false;
  double min_real_part = 0.0;
  double min_real_omega = 0.0;
  double dense_min_real_part = 0.0;
  double dense_min_omega = 0.0;
  double worst_case_error = 0.0;
  double relative_error = 0.0;
  bool spr_on_grid = false;
  bool spr_on_dense_grid = false;
};

/// Recomputes margin and fit error of a saved model against frequency data.
CheckReport check_model(const std::filesystem::path& model_path, const std::filesystem::path& frf_path,
                        int grid_mult = 4);

}  // namespace sprid
