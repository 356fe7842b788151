#pragma once

#include "psvar/bootstrap.hpp"
#include "psvar/decomp.hpp"
#include "psvar/irf.hpp"
#include "psvar/transform.hpp"
#include "psvar/var.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psvar {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir = "out";
  std::string model = "M1";
  std::vector<std::string> variables;      // custom model only
  std::vector<std::string> countries;      // empty: whole panel
  std::string ordering = "default";        // default | inverted | comma-separated names
  std::string return_variant = "longterm_posttax";
  std::string lag = "auto";                // auto | <integer>
  std::string criterion = "aic";
  long max_lag = 4;
  std::map<std::string, long> lag_overrides;
  long horizon = 20;
  long bootstrap_k = 1000;
  std::uint64_t seed = 20240101;
  double z = 1.645;
  std::string scale = "unit_shock";        // scale used for medians_ci and correlations
  std::string bootstrap_mode = "fixed_design";
  bool accumulate = false;
  bool drop_unstable = false;
  long min_coverage = 0;                   // 0: a third of the members
  long min_observations = 0;
  std::string cov_divisor = "sample";
  long whiteness_lags = 8;
  double whiteness_level = 0.05;
  double stability_margin = 0.0;
  std::filesystem::path covariates;        // optional CSV: country,<covariate>...
  long correlation_horizon = 0;
  std::size_t workers = 1;

  void validate() const;
  [[nodiscard]] ModelSpec model_spec() const;
};

/// Per-country baseline results kept for reporting.
struct CountryResult {
  VarModel model;
  StructuralFactorization fact;
  StabilityReport stability;
  WhitenessReport whiteness;
  bool whiteness_ok = true;
  LoadingMatrix loadings;
  IrfTensor composite;  // unit-shock scale, accumulated if configured
  IrfTensor composite_one_pp;
  DecomposedIrf parts;
  DecomposedIrf parts_one_pp;
};

/// Everything a run produces, in memory.
struct RunArtifacts {
  std::vector<CountryResult> countries;
  std::vector<std::pair<std::string, std::string>> excluded;  // (country, reason)
  std::vector<std::string> dropped_unstable;
  CommonModel common;
  std::vector<IrfDistribution> distributions;
  std::optional<BootstrapResult> bootstrap;
  std::map<std::string, std::string> files;  // file name -> contents
};

/// Runs every stage without touching the output directory.
[[nodiscard]] RunArtifacts run_estimation(const RunConfig& config);

/// Writes `artifacts.files` into `dir`; on failure removes what was written.
void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& dir);

/// run_estimation followed by write_artifacts.
RunArtifacts run_pipeline(const RunConfig& config);

enum class PlotFamily { distribution, ci, decomposition, scatter, boxplot };

[[nodiscard]] PlotFamily parse_plot_family(const std::string& text);
[[nodiscard]] std::string to_string(PlotFamily family);

struct PlotRequest {
  std::filesystem::path run_dir;
  PlotFamily family = PlotFamily::distribution;
  std::string kind = "composite";
  std::string scale;                 // empty: the run's configured scale
  std::string shock;                 // scatter: defaults to the first ordered variable
  std::string response;              // scatter: defaults to the last ordered variable
  std::string covariate;             // scatter: column of the covariate file
  std::filesystem::path covariates;  // scatter: overrides the run's covariate file
  std::filesystem::path panel;       // boxplot: overrides the run's input
  bool demeaned = false;             // boxplot on demeaned data
};

/// Builds one tidy plot table from a finished run; returns the CSV text.
[[nodiscard]] std::string plot_table(const PlotRequest& request);

/// Writes plot_<family>.csv into the run directory and returns its path.
std::filesystem::path emit_plotdata(const PlotRequest& request);

/// Per-year order statistics of each variable across countries.
[[nodiscard]] std::string boxplot_table(const PanelDataset& panel);

/// Minimal CSV table used to read run artifacts back.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const;
};
[[nodiscard]] Table read_table(const std::filesystem::path& path);
[[nodiscard]] Table parse_table(const std::string& text);

/// Shortest round-trip text for a double.
[[nodiscard]] std::string format_number(double value);

}  // namespace psvar
