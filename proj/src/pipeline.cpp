#include "psvar/pipeline.hpp"

#include "psvar/errors.hpp"
#include "psvar/panel.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <tuple>
#include <set>
#include <sstream>

namespace psvar {

namespace {

using json = nlohmann::ordered_json;

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(' ');
    auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += fields[i];
  }
  line += '\n';
  return line;
}

double ci_level(double z) { return std::erf(z / std::sqrt(2.0)); }

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{}", value);
}

void RunConfig::validate() const {
  if (input.empty()) throw ValidationError("no input panel given");
  if (horizon < 1) throw ValidationError(fmt::format("horizon must be >= 1, got {}", horizon));
  if (bootstrap_k < 0 || bootstrap_k == 1) {
    throw ValidationError(fmt::format("bootstrap k must be 0 (skip) or >= 2, got {}", bootstrap_k));
  }
  if (max_lag < 1) throw ValidationError("max_lag must be >= 1");
  if (lag != "auto") {
    char* end = nullptr;
    const long v = std::strtol(lag.c_str(), &end, 10);
    if (end != lag.c_str() + lag.size() || v < 1) {
      throw ValidationError(fmt::format("lag must be 'auto' or a positive integer, got '{}'", lag));
    }
  }
  for (const auto& [country, l] : lag_overrides) {
    if (l < 1) throw ValidationError(fmt::format("lag override for {} must be >= 1", country));
  }
  (void)parse_criterion(criterion);
  (void)parse_return_variant(return_variant);
  (void)parse_irf_scale(scale);
  if (bootstrap_mode != "fixed_design" && bootstrap_mode != "recursive") {
    throw ValidationError(fmt::format("unknown bootstrap mode '{}'", bootstrap_mode));
  }
  if (cov_divisor != "sample" && cov_divisor != "dof") {
    throw ValidationError(fmt::format("unknown covariance divisor '{}'", cov_divisor));
  }
  if (!(z > 0.0)) throw ValidationError("z must be positive");
  if (min_coverage < 0 || min_observations < 0) {
    throw ValidationError("coverage and observation thresholds must be non-negative");
  }
  if (correlation_horizon < 0 || correlation_horizon > horizon) {
    throw ValidationError("correlation horizon must lie in [0, horizon]");
  }
  const ModelSpec spec = model_spec();
  if (return_variant == "implied" &&
      std::find(spec.endogenous.begin(), spec.endogenous.end(), "p") == spec.endogenous.end()) {
    throw ValidationError("return variants only apply to models that contain the spread p");
  }
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec spec;
  switch (parse_model_name(model)) {
    case ModelName::m1: spec = ModelSpec::m1(); break;
    case ModelName::m2: spec = ModelSpec::m2(); break;
    case ModelName::m3: spec = ModelSpec::m3(); break;
    case ModelName::custom:
      if (variables.empty()) throw ValidationError("custom model needs a variable list");
      spec = ModelSpec::custom(variables);
      break;
  }
  if (parse_model_name(model) != ModelName::custom && !variables.empty()) {
    throw ValidationError("variables can only be listed for the custom model");
  }
  if (ordering == "default") return spec;
  if (ordering == "inverted") return spec.inverted();
  return spec.with_ordering(split_list(ordering));
}

RunArtifacts run_estimation(const RunConfig& config) {
  stage("config", [&] { config.validate(); });
  const ModelSpec spec = stage("config", [&] { return config.model_spec(); });
  const auto variant = parse_return_variant(config.return_variant);
  const auto criterion = parse_criterion(config.criterion);
  const auto scale = parse_irf_scale(config.scale);
  const Eigen::Index horizon = config.horizon;
  VarOptions var_opts;
  var_opts.divisor =
      config.cov_divisor == "dof" ? CovDivisor::degrees_of_freedom : CovDivisor::sample;

  RunArtifacts art;

  // Load, select, derive the spread, keep the model variables, demean.
  PanelDataset panel = stage("load", [&] {
    PanelDataset p = load_panel(config.input, default_schema());
    if (!config.countries.empty()) p = select_sample(p, config.countries);
    return p;
  });
  panel = stage("transform", [&] { return derive_spread(panel, variant); });

  std::vector<CountrySeries> blocks = stage("transform", [&] {
    std::vector<std::size_t> cols;
    for (const auto& name : spec.endogenous) cols.push_back(panel.variable_index(name));
    PanelDataset subset;
    subset.variable_names = spec.endogenous;
    for (const auto& c : panel.countries) {
      bool usable = true;
      for (auto col : cols) usable &= c.observed_span(col).size() >= 2;
      if (!usable || c.complete_span(cols).empty()) {
        art.excluded.emplace_back(c.country_id, "model variable missing");
        continue;
      }
      CountrySeries s;
      s.country_id = c.country_id;
      s.first_year = c.first_year;
      s.variable_names = spec.endogenous;
      s.values.resize(c.length(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) {
        s.values.col(static_cast<Eigen::Index>(j)) = c.values.col(static_cast<Eigen::Index>(cols[j]));
      }
      subset.countries.push_back(std::move(s));
    }
    std::vector<std::size_t> all(spec.endogenous.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    std::vector<CountrySeries> out;
    for (const auto& c : subset.countries) out.push_back(demean_country(c).restrict_to(all));
    return out;
  });

  // Per-country VARs.
  const Eigen::Index m = static_cast<Eigen::Index>(spec.endogenous.size());
  stage("var", [&] {
    for (const auto& block : blocks) {
      if (block.length() < config.min_observations) {
        art.excluded.emplace_back(block.country_id,
                                  fmt::format("{} observations < min_observations {}",
                                              block.length(), config.min_observations));
        continue;
      }
      Eigen::Index lag = 0;
      std::vector<double> criteria;
      if (auto it = config.lag_overrides.find(block.country_id); it != config.lag_overrides.end()) {
        lag = it->second;
      } else if (config.lag == "auto") {
        const Eigen::Index cap = feasible_max_lag(block.length(), m, config.max_lag, var_opts);
        if (cap == 0) {
          art.excluded.emplace_back(block.country_id,
                                    fmt::format("{} observations support no lag", block.length()));
          continue;
        }
        auto sel = select_lag(block, cap, criterion, var_opts);
        lag = sel.lag;
        criteria = std::move(sel.criteria);
      } else {
        lag = std::stol(config.lag);
      }
      if (feasible_max_lag(block.length(), m, lag, var_opts) < lag) {
        art.excluded.emplace_back(block.country_id,
                                  fmt::format("{} observations cannot support lag {}",
                                              block.length(), lag));
        continue;
      }
      CountryResult r;
      r.model = estimate_var(block, lag, var_opts);
      r.model.criteria = std::move(criteria);
      r.stability = companion_stability(r.model, config.stability_margin);
      const Eigen::Index lb_lags = std::min<Eigen::Index>(
          config.whiteness_lags, (r.model.effective_size() + 1) / 2 - 1);
      if (lb_lags >= 1) {
        try {
          r.whiteness = whiteness(r.model, lb_lags, config.whiteness_level);
        } catch (const DegenerateError&) {
          r.whiteness_ok = false;
        }
      }
      if (config.drop_unstable && !r.stability.stable) {
        art.dropped_unstable.push_back(block.country_id);
        continue;
      }
      art.countries.push_back(std::move(r));
    }
    if (art.countries.empty()) throw InsufficientDataError("no country left to estimate");
  });

  // Identification and composite responses.
  stage("identification", [&] {
    for (auto& r : art.countries) r.fact = structural_residuals(r.model, spec.ordering);
  });
  stage("irf", [&] {
    for (auto& r : art.countries) {
      r.composite = member_irf(r.model, r.fact, horizon, IrfScale::unit_shock, config.accumulate);
      r.composite_one_pp = member_irf(r.model, r.fact, horizon, IrfScale::one_pp, config.accumulate);
    }
  });

  // Common dynamics, loadings, decomposition.
  stage("common", [&] {
    std::vector<CountrySeries> members;
    for (const auto& r : art.countries) {
      for (const auto& b : blocks) {
        if (b.country_id == r.model.country_id) members.push_back(b);
      }
    }
    CommonVarOptions opts;
    opts.min_coverage = static_cast<std::size_t>(config.min_coverage);
    opts.trim_edges = true;
    opts.var = var_opts;
    const std::size_t coverage =
        opts.min_coverage > 0 ? opts.min_coverage : default_min_coverage(members.size());
    const AverageSeries avg = cross_section_average(members, coverage, true);
    Eigen::Index lag = 0;
    if (config.lag == "auto") {
      const Eigen::Index cap = feasible_max_lag(avg.series.length(), m, config.max_lag, var_opts);
      if (cap == 0) throw SampleSizeError("cross-section average is too short for any lag");
      lag = select_lag(avg.series, cap, criterion, var_opts).lag;
    } else {
      lag = std::stol(config.lag);
    }
    art.common = common_var(members, spec.ordering, lag, opts);
  });
  stage("loadings", [&] {
    for (auto& r : art.countries) r.loadings = estimate_loadings(r.fact, art.common.fact);
  });
  stage("decomposition", [&] {
    for (auto& r : art.countries) {
      r.parts = decompose_irf(r.composite, r.loadings.lambda);
      r.parts_one_pp = decompose_irf(r.composite_one_pp, r.loadings.lambda);
    }
  });

  stage("summaries", [&] {
    for (bool one_pp : {false, true}) {
      std::vector<IrfTensor> comp, common, idio;
      for (const auto& r : art.countries) {
        comp.push_back(one_pp ? r.composite_one_pp : r.composite);
        common.push_back(one_pp ? r.parts_one_pp.common : r.parts.common);
        idio.push_back(one_pp ? r.parts_one_pp.idiosyncratic : r.parts.idiosyncratic);
      }
      art.distributions.push_back(summarize(comp));
      art.distributions.push_back(summarize(common));
      art.distributions.push_back(summarize(idio));
    }
  });

  if (config.bootstrap_k > 0) {
    stage("bootstrap", [&] {
      BootstrapInputs inputs;
      for (const auto& r : art.countries) inputs.members.push_back({r.model, r.fact, r.loadings});
      inputs.common = art.common.fact;
      inputs.horizon = horizon;
      inputs.scale = scale;
      inputs.accumulate = config.accumulate;
      BootstrapOptions opts;
      opts.repetitions = static_cast<std::size_t>(config.bootstrap_k);
      opts.seed = config.seed;
      opts.z = config.z;
      opts.workers = config.workers;
      opts.mode = config.bootstrap_mode == "recursive" ? PseudoSeriesMode::recursive
                                                       : PseudoSeriesMode::fixed_design;
      opts.var = var_opts;
      art.bootstrap = run_bootstrap(inputs, opts);
    });
  }

  // Tables.
  const auto& names = spec.ordered_names();
  const std::string acc_suffix = config.accumulate ? "_accumulated" : "";
  {
    std::string out = "kind,country,shock,response,horizon,value,statistic,scale\n";
    for (bool one_pp : {false, true}) {
      const std::string scale_label = to_string(one_pp ? IrfScale::one_pp : IrfScale::unit_shock);
      for (IrfKind kind : {IrfKind::composite, IrfKind::common_part, IrfKind::idiosyncratic_part}) {
        const std::string kind_label = to_string(kind) + acc_suffix;
        std::vector<const CountryResult*> order;
        for (const auto& r : art.countries) order.push_back(&r);
        std::sort(order.begin(), order.end(), [](const CountryResult* a, const CountryResult* b) {
          return a->model.country_id < b->model.country_id;
        });
        for (const auto* r : order) {
          const IrfTensor& t = kind == IrfKind::composite
                                   ? (one_pp ? r->composite_one_pp : r->composite)
                               : kind == IrfKind::common_part
                                   ? (one_pp ? r->parts_one_pp.common : r->parts.common)
                                   : (one_pp ? r->parts_one_pp.idiosyncratic : r->parts.idiosyncratic);
          for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index k = 0; k < m; ++k) {
              for (Eigen::Index h = 0; h <= horizon; ++h) {
                out += csv_line({kind_label, r->model.country_id, names[j], names[k],
                                 std::to_string(h), format_number(t.at(h, j, k)), "point",
                                 scale_label});
              }
            }
          }
        }
        const auto& dist = art.distributions[(one_pp ? 3 : 0) + static_cast<std::size_t>(kind)];
        const std::pair<const char*, const std::vector<Eigen::MatrixXd>*> stats[] = {
            {"median", &dist.median}, {"mean", &dist.mean}, {"q25", &dist.q25}, {"q75", &dist.q75}};
        for (Eigen::Index j = 0; j < m; ++j) {
          for (Eigen::Index k = 0; k < m; ++k) {
            for (Eigen::Index h = 0; h <= horizon; ++h) {
              for (const auto& [label, values] : stats) {
                out += csv_line({kind_label, "AGG", names[j], names[k], std::to_string(h),
                                 format_number((*values)[static_cast<std::size_t>(h)](k, j)), label,
                                 scale_label});
              }
            }
          }
        }
      }
    }
    art.files["irf_distribution.csv"] = std::move(out);
  }
  {
    std::string out = "shock,response,horizon,median,sigma,lower,upper,k,seed\n";
    const auto& dist = art.distributions[scale == IrfScale::one_pp ? 3 : 0];
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index h = 0; h <= horizon; ++h) {
          const auto hs = static_cast<std::size_t>(h);
          if (art.bootstrap) {
            const auto& b = *art.bootstrap;
            out += csv_line({names[j], names[k], std::to_string(h), format_number(b.median[hs](k, j)),
                             format_number(b.sigma[hs](k, j)), format_number(b.lower[hs](k, j)),
                             format_number(b.upper[hs](k, j)), std::to_string(b.used),
                             std::to_string(config.seed)});
          } else {
            out += csv_line({names[j], names[k], std::to_string(h),
                             format_number(dist.median[hs](k, j)), "", "", "", "0",
                             std::to_string(config.seed)});
          }
        }
      }
    }
    art.files["medians_ci.csv"] = std::move(out);
  }
  {
    std::string out = "country,shock,lambda,overlap_first_year,overlap\n";
    for (const auto& r : art.countries) {
      for (Eigen::Index j = 0; j < m; ++j) {
        out += csv_line({r.model.country_id, names[j], format_number(r.loadings.lambda(j)),
                         std::to_string(r.loadings.overlap_first_year),
                         std::to_string(r.loadings.overlap)});
      }
    }
    art.files["loadings.csv"] = std::move(out);
  }
  {
    std::string out =
        "country,lag,first_year,n_obs,max_modulus,stable,whiteness_lags,whiteness_pass,dropped\n";
    auto row = [&](const CountryResult& r, bool dropped) {
      const bool white = r.whiteness_ok && r.whiteness.all_passed();
      return csv_line({r.model.country_id, std::to_string(r.model.lag),
                       std::to_string(r.model.data_first_year), std::to_string(r.model.data.rows()),
                       format_number(r.stability.max_modulus), r.stability.stable ? "1" : "0",
                       std::to_string(r.whiteness.lags), white ? "1" : "0", dropped ? "1" : "0"});
    };
    for (const auto& r : art.countries) out += row(r, false);
    for (const auto& id : art.dropped_unstable) {
      // Re-derive the dropped fit for reporting.
      for (const auto& b : blocks) {
        if (b.country_id != id) continue;
        CountryResult r;
        Eigen::Index lag = 0;
        if (auto it = config.lag_overrides.find(id); it != config.lag_overrides.end()) {
          lag = it->second;
        } else if (config.lag == "auto") {
          lag = select_lag(b, feasible_max_lag(b.length(), m, config.max_lag, var_opts), criterion,
                           var_opts).lag;
        } else {
          lag = std::stol(config.lag);
        }
        r.model = estimate_var(b, lag, var_opts);
        r.stability = companion_stability(r.model, config.stability_margin);
        r.whiteness_ok = false;
        out += row(r, true);
      }
    }
    art.files["stability.csv"] = std::move(out);
  }
  {
    std::string out = "covariate,shock,response,horizon,n,pearson,slope,intercept\n";
    if (!config.covariates.empty()) {
      const Table cov = stage("correlations", [&] { return read_table(config.covariates); });
      if (cov.header.empty() || cov.header[0] != "country") {
        throw StageError("correlations", ParseError("covariate file must start with a 'country' column"));
      }
      std::map<std::string, const CountryResult*> by_id;
      for (const auto& r : art.countries) by_id[r.model.country_id] = &r;
      for (std::size_t c = 1; c < cov.header.size(); ++c) {
        for (Eigen::Index j = 0; j < m; ++j) {
          for (Eigen::Index k = 0; k < m; ++k) {
            std::vector<double> xs, ys;
            for (const auto& row : cov.rows) {
              auto it = by_id.find(row[0]);
              if (it == by_id.end() || row[c].empty()) continue;
              const IrfTensor& t =
                  scale == IrfScale::one_pp ? it->second->composite_one_pp : it->second->composite;
              xs.push_back(std::stod(row[c]));
              ys.push_back(t.at(config.correlation_horizon, j, k));
            }
            try {
              const Correlation corr = covariate_correlation(ys, xs);
              out += csv_line({cov.header[c], names[j], names[k],
                               std::to_string(config.correlation_horizon), std::to_string(corr.n),
                               format_number(corr.pearson), format_number(corr.slope),
                               format_number(corr.intercept)});
            } catch (const Error&) {
              // Fewer than three pairs or a constant side: nothing to report.
            }
          }
        }
      }
    }
    art.files["correlations.csv"] = std::move(out);
  }
  {
    json manifest;
    manifest["version"] = kVersion;
    json cfg;
    cfg["input"] = config.input.string();
    cfg["model"] = to_string(spec.name);
    cfg["variables"] = spec.endogenous;
    cfg["countries"] = config.countries;
    cfg["ordering"] = spec.ordered_names();
    cfg["return_variant"] = config.return_variant;
    cfg["lag"] = config.lag;
    cfg["criterion"] = to_string(criterion);
    cfg["max_lag"] = config.max_lag;
    cfg["lag_overrides"] = config.lag_overrides;
    cfg["horizon"] = config.horizon;
    cfg["bootstrap_k"] = config.bootstrap_k;
    cfg["bootstrap_mode"] = config.bootstrap_mode;
    cfg["seed"] = config.seed;
    cfg["z"] = config.z;
    cfg["scale"] = config.scale;
    cfg["accumulate"] = config.accumulate;
    cfg["drop_unstable"] = config.drop_unstable;
    cfg["min_coverage"] = config.min_coverage;
    cfg["min_observations"] = config.min_observations;
    cfg["cov_divisor"] = config.cov_divisor;
    cfg["whiteness_lags"] = config.whiteness_lags;
    cfg["whiteness_level"] = config.whiteness_level;
    cfg["stability_margin"] = config.stability_margin;
    cfg["covariates"] = config.covariates.string();
    cfg["correlation_horizon"] = config.correlation_horizon;
    manifest["config"] = cfg;
    manifest["seed"] = config.seed;
    json countries = json::array();
    for (const auto& r : art.countries) {
      countries.push_back({{"country", r.model.country_id},
                           {"lag", r.model.lag},
                           {"first_year", r.model.data_first_year},
                           {"observations", r.model.data.rows()},
                           {"max_modulus", r.stability.max_modulus},
                           {"stable", r.stability.stable}});
    }
    manifest["countries"] = countries;
    json excluded = json::array();
    for (const auto& [id, reason] : art.excluded) excluded.push_back({{"country", id}, {"reason", reason}});
    manifest["excluded"] = excluded;
    manifest["dropped_unstable"] = art.dropped_unstable;
    manifest["common"] = {{"lag", art.common.model.lag},
                          {"first_year", art.common.average.series.first_year},
                          {"observations", art.common.average.series.length()},
                          {"trimmed_years", art.common.average.trimmed_years},
                          {"members_per_year", art.common.average.counts}};
    if (art.bootstrap) {
      const auto& b = *art.bootstrap;
      manifest["bootstrap"] = {{"requested", b.requested}, {"used", b.used},
                               {"dropped", b.dropped},     {"z", b.z},
                               {"ci_level", ci_level(b.z)}, {"mode", config.bootstrap_mode},
                               {"seed", b.seed}};
    } else {
      manifest["bootstrap"] = nullptr;
    }
    manifest["scales"] = {{"irf_distribution", {"unit_shock", "one_pp"}},
                          {"medians_ci", config.scale},
                          {"correlations", config.scale}};
    manifest["accumulated"] = config.accumulate;
    std::vector<std::string> files;
    for (const auto& [name, _] : art.files) files.push_back(name);
    files.push_back("run_manifest.json");
    manifest["files"] = files;
    art.files["run_manifest.json"] = manifest.dump(2) + "\n";
  }
  return art;
}

void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(dir);
    for (const auto& [name, contents] : artifacts.files) {
      const auto path = dir / name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ParseError(fmt::format("cannot write '{}'", path.string()));
      written.push_back(path);
      out << contents;
      if (!out) throw ParseError(fmt::format("failed writing '{}'", path.string()));
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
}

RunArtifacts run_pipeline(const RunConfig& config) {
  RunArtifacts art = run_estimation(config);
  stage("output", [&] { write_artifacts(art, config.output_dir); });
  return art;
}

// ---------------------------------------------------------------------------
// Plot tables

Table parse_table(const std::string& text) {
  Table t;
  std::stringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
      auto pos = line.find(',', start);
      fields.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (header) {
      t.header = std::move(fields);
      header = false;
    } else {
      if (fields.size() != t.header.size()) {
        throw ParseError(fmt::format("row has {} fields, header has {}", fields.size(),
                                     t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError(fmt::format("missing artifact '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_table(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::size_t Table::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw LookupError(fmt::format("table has no column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

PlotFamily parse_plot_family(const std::string& text) {
  if (text == "distribution") return PlotFamily::distribution;
  if (text == "ci") return PlotFamily::ci;
  if (text == "decomposition") return PlotFamily::decomposition;
  if (text == "scatter") return PlotFamily::scatter;
  if (text == "boxplot") return PlotFamily::boxplot;
  throw ValidationError(fmt::format("unknown figure family '{}'", text));
}

std::string to_string(PlotFamily family) {
  switch (family) {
    case PlotFamily::distribution: return "distribution";
    case PlotFamily::ci: return "ci";
    case PlotFamily::decomposition: return "decomposition";
    case PlotFamily::scatter: return "scatter";
    case PlotFamily::boxplot: return "boxplot";
  }
  return "distribution";
}

std::string boxplot_table(const PanelDataset& panel) {
  std::string out = "year,variable,n,min,q25,median,q75,max\n";
  int first = std::numeric_limits<int>::max();
  int last = std::numeric_limits<int>::min();
  for (const auto& c : panel.countries) {
    if (c.length() == 0) continue;
    first = std::min(first, c.first_year);
    last = std::max(last, c.year_at(c.length() - 1));
  }
  for (int year = first; year <= last; ++year) {
    for (std::size_t v = 0; v < panel.variable_names.size(); ++v) {
      std::vector<double> values;
      for (const auto& c : panel.countries) {
        const int row = year - c.first_year;
        if (row < 0 || row >= c.length()) continue;
        const double x = c.values(row, static_cast<Eigen::Index>(v));
        if (!std::isnan(x)) values.push_back(x);
      }
      if (values.empty()) continue;
      std::vector<double> work = values;
      const double q25 = interpolated_quantile(work, 0.25);
      const double med = interpolated_quantile(work, 0.5);
      const double q75 = interpolated_quantile(work, 0.75);
      out += csv_line({std::to_string(year), panel.variable_names[v], std::to_string(values.size()),
                       format_number(work.front()), format_number(q25), format_number(med),
                       format_number(q75), format_number(work.back())});
    }
  }
  return out;
}

std::string plot_table(const PlotRequest& request) {
  const auto manifest_path = request.run_dir / "run_manifest.json";
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) throw LookupError(fmt::format("missing artifact '{}'", manifest_path.string()));
  const json manifest = json::parse(manifest_in);
  const std::string run_scale = manifest["config"]["scale"].get<std::string>();
  const std::string scale = request.scale.empty() ? run_scale : request.scale;
  const std::string suffix = manifest["accumulated"].get<bool>() ? "_accumulated" : "";

  switch (request.family) {
    case PlotFamily::distribution:
    case PlotFamily::decomposition: {
      const Table t = read_table(request.run_dir / "irf_distribution.csv");
      const auto c_kind = t.column("kind"), c_country = t.column("country"),
                 c_shock = t.column("shock"), c_resp = t.column("response"),
                 c_h = t.column("horizon"), c_val = t.column("value"),
                 c_stat = t.column("statistic"), c_scale = t.column("scale");
      // (kind, shock, response, horizon) -> statistic -> value
      std::map<std::tuple<std::string, std::string, std::string, int>, std::map<std::string, std::string>>
          cells;
      std::vector<std::tuple<std::string, std::string, std::string, int>> order;
      for (const auto& row : t.rows) {
        if (row[c_country] != "AGG" || row[c_scale] != scale) continue;
        const std::string kind = row[c_kind];
        if (request.family == PlotFamily::distribution && kind != request.kind + suffix) continue;
        auto key = std::make_tuple(kind, row[c_shock], row[c_resp], std::stoi(row[c_h]));
        if (!cells.count(key)) order.push_back(key);
        cells[key][row[c_stat]] = row[c_val];
      }
      if (order.empty()) throw LookupError("no aggregate rows match the request");
      std::string out;
      if (request.family == PlotFamily::distribution) {
        out = "horizon,shock,response,median,mean,q25,q75\n";
        for (const auto& key : order) {
          auto& s = cells[key];
          out += csv_line({std::to_string(std::get<3>(key)), std::get<1>(key), std::get<2>(key),
                           s["median"], s["mean"], s["q25"], s["q75"]});
        }
      } else {
        out = "horizon,shock,response,kind,median,q25,q75\n";
        for (const auto& key : order) {
          auto& s = cells[key];
          out += csv_line({std::to_string(std::get<3>(key)), std::get<1>(key), std::get<2>(key),
                           std::get<0>(key), s["median"], s["q25"], s["q75"]});
        }
      }
      return out;
    }
    case PlotFamily::ci: {
      const Table t = read_table(request.run_dir / "medians_ci.csv");
      std::string out = "horizon,shock,response,median,lower,upper,sigma\n";
      for (const auto& row : t.rows) {
        out += csv_line({row[t.column("horizon")], row[t.column("shock")], row[t.column("response")],
                         row[t.column("median")], row[t.column("lower")], row[t.column("upper")],
                         row[t.column("sigma")]});
      }
      return out;
    }
    case PlotFamily::scatter: {
      const auto ordering = manifest["config"]["ordering"].get<std::vector<std::string>>();
      const std::string shock = request.shock.empty() ? ordering.front() : request.shock;
      const std::string response = request.response.empty() ? ordering.back() : request.response;
      std::filesystem::path cov_path = request.covariates;
      if (cov_path.empty()) cov_path = manifest["config"]["covariates"].get<std::string>();
      if (cov_path.empty()) throw LookupError("scatter needs a covariate file");
      const Table cov = read_table(cov_path);
      const std::size_t c_cov =
          request.covariate.empty() ? std::size_t{1} : cov.column(request.covariate);
      if (c_cov >= cov.header.size()) throw LookupError("covariate file has no covariate column");
      const Table t = read_table(request.run_dir / "irf_distribution.csv");
      std::map<std::string, std::string> h0;
      for (const auto& row : t.rows) {
        if (row[t.column("kind")] == "composite" + suffix && row[t.column("country")] != "AGG" &&
            row[t.column("scale")] == scale && row[t.column("shock")] == shock &&
            row[t.column("response")] == response && row[t.column("horizon")] == "0") {
          h0[row[t.column("country")]] = row[t.column("value")];
        }
      }
      std::string out = "country,response_h0,covariate\n";
      std::vector<double> xs, ys;
      for (const auto& row : cov.rows) {
        auto it = h0.find(row[0]);
        if (it == h0.end() || row[c_cov].empty()) continue;
        out += csv_line({row[0], it->second, row[c_cov]});
        ys.push_back(std::stod(it->second));
        xs.push_back(std::stod(row[c_cov]));
      }
      const Correlation corr = covariate_correlation(ys, xs);
      // Sidecar row: fitted line response = intercept + slope * covariate.
      out += csv_line({"__fit__", format_number(corr.slope), format_number(corr.intercept)});
      return out;
    }
    case PlotFamily::boxplot: {
      std::filesystem::path input = request.panel;
      if (input.empty()) input = manifest["config"]["input"].get<std::string>();
      PanelDataset panel = load_panel(input, default_schema());
      if (request.demeaned) panel = demean_panel(panel);
      return boxplot_table(panel);
    }
  }
  return {};
}

std::filesystem::path emit_plotdata(const PlotRequest& request) {
  const std::string text = stage("plotdata", [&] { return plot_table(request); });
  const auto path = request.run_dir / fmt::format("plot_{}.csv", to_string(request.family));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StageError("plotdata", ParseError(fmt::format("cannot write '{}'", path.string())));
  out << text;
  return path;
}

}  // namespace psvar
