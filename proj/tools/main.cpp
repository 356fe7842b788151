// Command-line driver: estimate, simulate, plotdata, validate.

#include "psvar/dgp.hpp"
#include "psvar/errors.hpp"
#include "psvar/panel.hpp"
#include "psvar/parallel.hpp"
#include "psvar/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace {

std::map<std::string, long> parse_overrides(const std::string& text) {
  std::map<std::string, long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw psvar::ValidationError(fmt::format("lag override '{}' is not COUNTRY:LAG", item));
    }
    out[item.substr(0, colon)] = std::stol(item.substr(colon + 1));
  }
  return out;
}

double default_level(const std::string& name) {
  if (name == "p") return 1.0;
  if (name == "z") return 10.0;
  if (name == "s") return 22.0;
  if (name == "k") return 35.0;
  return 0.0;
}

struct SimulateArgs {
  std::string out = "sample_panel.csv";
  std::size_t countries = 10;
  long periods = 33;
  std::vector<std::string> variables{"p", "z", "s", "k"};
  long lags = 1;
  double dispersion = 0.05;
  std::uint64_t seed = 7;
  long burn_in = 200;
  std::string distribution = "gaussian";
  double df = 5.0;
  int first_year = 1980;
  std::vector<double> loadings{0.0, 0.3, 0.6, 0.9};
  bool ragged = false;
  bool no_levels = false;
};

void run_simulate(const SimulateArgs& a) {
  const auto m = static_cast<Eigen::Index>(a.variables.size());
  psvar::HeterogeneousDgp params;
  params.n_countries = a.countries;
  params.periods = a.periods;
  params.dispersion = a.dispersion;
  params.seed = a.seed;
  params.variable_names = a.variables;
  params.loading_values = a.loadings;
  Eigen::MatrixXd r1 = 0.5 * Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 1; i < m; ++i) r1(i, i - 1) = 0.1;
  params.base.push_back(r1);
  for (long j = 2; j <= a.lags; ++j) {
    params.base.push_back((0.15 / static_cast<double>(j - 1)) * Eigen::MatrixXd::Identity(m, m));
  }
  params.impact = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index i = 1; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) params.impact(i, j) = 0.3;
  }
  psvar::DgpSpec spec = psvar::make_heterogeneous_spec(params);
  spec.burn_in = a.burn_in;
  spec.first_year = a.first_year;
  spec.distribution = a.distribution == "student_t" ? psvar::ShockDistribution::student_t
                                                    : psvar::ShockDistribution::gaussian;
  spec.student_df = a.df;
  if (!a.no_levels) {
    for (std::size_t i = 0; i < spec.n_countries; ++i) {
      Eigen::VectorXd lv(m);
      for (Eigen::Index j = 0; j < m; ++j) {
        // Country fixed effects: small, deterministic offsets around a typical level.
        lv(j) = default_level(a.variables[static_cast<std::size_t>(j)]) +
                0.5 * static_cast<double>(static_cast<long>(i % 5) - 2);
      }
      spec.levels.push_back(lv);
    }
  }
  psvar::PanelDataset panel = psvar::simulate_panel(spec);
  if (a.ragged) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < panel.countries.size(); ++i) {
      auto& c = panel.countries[i];
      const auto lead = static_cast<Eigen::Index>(i % 3);
      const auto trail = static_cast<Eigen::Index>(i % 2);
      if (c.values.cols() > 1 && lead > 0) c.values.col(1).head(lead).setConstant(nan);
      if (trail > 0) c.values.col(c.values.cols() - 1).tail(trail).setConstant(nan);
    }
  }
  psvar::validate_panel(panel, psvar::default_schema(), 1);
  psvar::write_panel(a.out, panel);
  std::cout << fmt::format("wrote {} countries x {} periods to {}\n", panel.countries.size(),
                           a.periods, a.out);
}

void run_validate(const std::string& input, std::size_t min_countries) {
  const auto panel = psvar::load_panel(input, psvar::default_schema(), min_countries);
  std::cout << fmt::format("{} countries, {} variables\n", panel.countries.size(),
                           panel.variable_names.size());
  for (const auto& c : panel.countries) {
    std::cout << fmt::format("  {}: {}-{}", c.country_id, c.first_year,
                             c.year_at(c.length() - 1));
    for (std::size_t j = 0; j < panel.variable_names.size(); ++j) {
      const auto span = c.observed_span(j);
      if (span.begin != 0 || span.end != c.length()) {
        std::cout << fmt::format(" {}[{}-{}]", panel.variable_names[j], c.year_at(span.begin),
                                 c.year_at(span.end - 1));
      }
    }
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous panel structural VAR toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI/TOML file; options go under an [estimate] section");

  psvar::RunConfig config;
  config.workers = psvar::workers_from_env(1);
  std::string overrides;
  auto* estimate = app.add_subcommand("estimate", "Run the full estimation pipeline");
  estimate->fallthrough();
  estimate->add_option("--input", config.input, "Long-format panel CSV")->required();
  estimate->add_option("--out", config.output_dir, "Output directory");
  estimate->add_option("--model", config.model, "M1 | M2 | M3 | custom");
  estimate->add_option("--variables", config.variables, "Variables of a custom model")
      ->delimiter(',');
  estimate->add_option("--countries", config.countries, "Country sample (default: all)")
      ->delimiter(',');
  estimate->add_option("--ordering", config.ordering,
                       "default | inverted | comma-separated variable names");
  estimate->add_option("--return-variant", config.return_variant,
                       "longterm_posttax | longterm_pretax | shortrate | implied");
  estimate->add_option("--lag", config.lag, "auto or a fixed lag order");
  estimate->add_option("--criterion", config.criterion, "aic | bic | hq");
  estimate->add_option("--max-lag", config.max_lag);
  estimate->add_option("--lag-overrides", overrides, "Per-country lags, e.g. AUS:2,CAN:1");
  estimate->add_option("--horizon", config.horizon);
  estimate->add_option("--bootstrap-k", config.bootstrap_k, "Repetitions (0 skips)");
  estimate->add_option("--seed", config.seed);
  estimate->add_option("--z", config.z, "Band multiplier");
  estimate->add_option("--scale", config.scale, "unit_shock | one_pp");
  estimate->add_option("--bootstrap-mode", config.bootstrap_mode, "fixed_design | recursive");
  estimate->add_flag("--accumulate", config.accumulate, "Accumulated responses");
  estimate->add_flag("--drop-unstable", config.drop_unstable, "Drop unstable countries");
  estimate->add_option("--min-coverage", config.min_coverage);
  estimate->add_option("--min-observations", config.min_observations);
  estimate->add_option("--cov-divisor", config.cov_divisor, "sample | dof");
  estimate->add_option("--whiteness-lags", config.whiteness_lags);
  estimate->add_option("--whiteness-level", config.whiteness_level);
  estimate->add_option("--stability-margin", config.stability_margin);
  estimate->add_option("--covariates", config.covariates, "CSV: country,<covariate>...");
  estimate->add_option("--correlation-horizon", config.correlation_horizon);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic panel from a known DGP");
  simulate->add_option("--out", sim.out);
  simulate->add_option("--countries", sim.countries);
  simulate->add_option("--periods", sim.periods);
  simulate->add_option("--variables", sim.variables)->delimiter(',');
  simulate->add_option("--lags", sim.lags);
  simulate->add_option("--dispersion", sim.dispersion);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--burn-in", sim.burn_in);
  simulate->add_option("--distribution", sim.distribution, "gaussian | student_t");
  simulate->add_option("--df", sim.df);
  simulate->add_option("--first-year", sim.first_year);
  simulate->add_option("--loadings", sim.loadings)->delimiter(',');
  simulate->add_flag("--ragged", sim.ragged, "Trim edges to make the panel unbalanced");
  simulate->add_flag("--no-levels", sim.no_levels, "Omit country fixed effects");

  psvar::PlotRequest plot;
  std::string family = "distribution";
  auto* plotdata = app.add_subcommand("plotdata", "Emit tidy plot tables from a finished run");
  plotdata->add_option("--run", plot.run_dir, "Run output directory")->required();
  plotdata->add_option("--family", family, "distribution | ci | decomposition | scatter | boxplot");
  plotdata->add_option("--kind", plot.kind, "composite | common | idiosyncratic");
  plotdata->add_option("--scale", plot.scale);
  plotdata->add_option("--shock", plot.shock);
  plotdata->add_option("--response", plot.response);
  plotdata->add_option("--covariate", plot.covariate);
  plotdata->add_option("--covariates", plot.covariates);
  plotdata->add_option("--panel", plot.panel);
  plotdata->add_flag("--demeaned", plot.demeaned);

  std::string validate_input;
  std::size_t min_countries = 2;
  auto* validate = app.add_subcommand("validate", "Check a panel file");
  validate->add_option("--input", validate_input)->required();
  validate->add_option("--min-countries", min_countries);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) {
      if (!overrides.empty()) config.lag_overrides = parse_overrides(overrides);
      const auto art = psvar::run_pipeline(config);
      std::cout << fmt::format("estimated {} countries", art.countries.size());
      if (!art.excluded.empty()) std::cout << fmt::format(", excluded {}", art.excluded.size());
      if (!art.dropped_unstable.empty()) {
        std::cout << fmt::format(", dropped {} unstable", art.dropped_unstable.size());
      }
      std::cout << fmt::format("; outputs in {}\n", config.output_dir.string());
      for (const auto& [id, reason] : art.excluded) {
        std::cerr << fmt::format("excluded {}: {}\n", id, reason);
      }
    } else if (*simulate) {
      run_simulate(sim);
    } else if (*plotdata) {
      plot.family = psvar::parse_plot_family(family);
      std::cout << psvar::emit_plotdata(plot).string() << '\n';
    } else if (*validate) {
      run_validate(validate_input, min_countries);
    }
  } catch (const psvar::Error& e) {
    std::cerr << "error [" << e.kind() << "] " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error " << e.what() << '\n';
    return 1;
  }
  return 0;
}
