#include "psvar/transform.hpp"

#include "psvar/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace psvar {

namespace {

void require_finite(std::initializer_list<double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(fmt::format("{}: non-finite input", what));
  }
}

void require_growth_plus_depreciation(double g, double delta) {
  if (!(g + delta > 0.0)) {
    throw SingularityError(fmt::format(
        "g + delta = {} is not positive; the capital-to-income ratio diverges", g + delta));
  }
}

}  // namespace

double real_return(double tau, double i_nom, double d) {
  require_finite({tau, i_nom, d}, "real_return");
  return (1.0 - tau) * i_nom - d;
}

double spread(double r, double g) {
  require_finite({r, g}, "spread");
  return r - g;
}

double implied_return(double alpha, double ky) {
  require_finite({alpha, ky}, "implied_return");
  if (ky <= 0.0) throw DomainError(fmt::format("implied_return: K/Y must be positive, got {}", ky));
  return 100.0 * alpha / ky;
}

double steady_state_ky(double s, double g, double delta) {
  require_finite({s, g, delta}, "steady_state_ky");
  require_growth_plus_depreciation(g, delta);
  return s / (g + delta);
}

double steady_state_alpha(double r, double s, double g, double delta) {
  require_finite({r, s, g, delta}, "steady_state_alpha");
  require_growth_plus_depreciation(g, delta);
  return r * s / (g + delta);
}

ModelSpec ModelSpec::m1() { return {ModelName::m1, {"p", "z"}, {0, 1}}; }
ModelSpec ModelSpec::m2() { return {ModelName::m2, {"p", "k"}, {0, 1}}; }
ModelSpec ModelSpec::m3() { return {ModelName::m3, {"p", "s", "k"}, {0, 1, 2}}; }

ModelSpec ModelSpec::custom(std::vector<std::string> variables) {
  ModelSpec spec;
  spec.name = ModelName::custom;
  spec.endogenous = std::move(variables);
  spec.ordering.resize(spec.endogenous.size());
  for (std::size_t i = 0; i < spec.ordering.size(); ++i) spec.ordering[i] = i;
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::inverted() const {
  ModelSpec out = *this;
  std::reverse(out.ordering.begin(), out.ordering.end());
  return out;
}

ModelSpec ModelSpec::with_ordering(const std::vector<std::string>& order) const {
  if (order.size() != endogenous.size()) {
    throw ValidationError(fmt::format("ordering lists {} variables, model has {}", order.size(),
                                      endogenous.size()));
  }
  ModelSpec out = *this;
  out.ordering.clear();
  for (const auto& name : order) {
    auto it = std::find(endogenous.begin(), endogenous.end(), name);
    if (it == endogenous.end()) {
      throw LookupError(fmt::format("ordering names '{}', not an endogenous variable", name));
    }
    out.ordering.push_back(static_cast<std::size_t>(it - endogenous.begin()));
  }
  out.validate();
  return out;
}

std::vector<std::string> ModelSpec::ordered_names() const {
  std::vector<std::string> names;
  for (auto idx : ordering) names.push_back(endogenous.at(idx));
  return names;
}

void check_permutation(const std::vector<std::size_t>& ordering, std::size_t m) {
  if (ordering.size() != m) {
    throw ValidationError(fmt::format("ordering has {} entries, expected {}", ordering.size(), m));
  }
  std::vector<bool> seen(m, false);
  for (auto idx : ordering) {
    if (idx >= m || seen[idx]) {
      throw ValidationError(fmt::format("ordering [{}] is not a permutation of 0..{}",
                                        fmt::join(ordering, ","), m - 1));
    }
    seen[idx] = true;
  }
}

void ModelSpec::validate() const {
  if (endogenous.empty()) throw PreconditionError("model has no endogenous variables");
  check_permutation(ordering, endogenous.size());
}

ModelName parse_model_name(const std::string& text) {
  if (text == "M1" || text == "m1") return ModelName::m1;
  if (text == "M2" || text == "m2") return ModelName::m2;
  if (text == "M3" || text == "m3") return ModelName::m3;
  if (text == "custom") return ModelName::custom;
  throw ValidationError(fmt::format("unknown model '{}'", text));
}

std::string to_string(ModelName name) {
  switch (name) {
    case ModelName::m1: return "M1";
    case ModelName::m2: return "M2";
    case ModelName::m3: return "M3";
    case ModelName::custom: return "custom";
  }
  return "custom";
}

ReturnVariant parse_return_variant(const std::string& text) {
  if (text == "longterm_posttax") return ReturnVariant::longterm_posttax;
  if (text == "longterm_pretax") return ReturnVariant::longterm_pretax;
  if (text == "shortrate") return ReturnVariant::shortrate;
  if (text == "implied") return ReturnVariant::implied;
  throw ValidationError(fmt::format("unknown return variant '{}'", text));
}

std::string to_string(ReturnVariant variant) {
  switch (variant) {
    case ReturnVariant::longterm_posttax: return "longterm_posttax";
    case ReturnVariant::longterm_pretax: return "longterm_pretax";
    case ReturnVariant::shortrate: return "shortrate";
    case ReturnVariant::implied: return "implied";
  }
  return "longterm_posttax";
}

std::vector<std::string> variant_inputs(ReturnVariant variant) {
  switch (variant) {
    case ReturnVariant::longterm_posttax: return {"tau", "i_long", "d", "g"};
    case ReturnVariant::longterm_pretax: return {"i_long", "d", "g"};
    case ReturnVariant::shortrate: return {"tau", "i_short", "d", "g"};
    case ReturnVariant::implied: return {"k", "ky", "g"};
  }
  return {};
}

PanelDataset derive_spread(const PanelDataset& panel, ReturnVariant variant) {
  const auto inputs = variant_inputs(variant);
  std::vector<std::string> missing;
  for (const auto& name : inputs) {
    if (!panel.has_variable(name)) missing.push_back(name);
  }
  if (!missing.empty()) {
    if (variant == ReturnVariant::longterm_posttax && panel.has_variable("p")) return panel;
    throw LookupError(fmt::format("return variant {} needs column(s) {}", to_string(variant),
                                  fmt::join(missing, ", ")));
  }

  PanelDataset out = panel;
  if (!out.has_variable("p")) {
    out.variable_names.push_back("p");
    for (auto& c : out.countries) {
      c.variable_names.push_back("p");
      c.values.conservativeResize(Eigen::NoChange, c.values.cols() + 1);
      c.values.col(c.values.cols() - 1).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
  }
  const auto p_col = static_cast<Eigen::Index>(out.variable_index("p"));
  auto col = [&](const char* name) { return static_cast<Eigen::Index>(panel.variable_index(name)); };

  for (std::size_t ci = 0; ci < out.countries.size(); ++ci) {
    const auto& src = panel.countries[ci];
    auto& dst = out.countries[ci];
    for (Eigen::Index r = 0; r < src.length(); ++r) {
      auto at = [&](const char* name) { return src.values(r, col(name)); };
      bool any_missing = false;
      for (const auto& name : inputs) any_missing |= std::isnan(at(name.c_str()));
      double value = std::numeric_limits<double>::quiet_NaN();
      if (!any_missing) {
        double r_value = 0.0;
        switch (variant) {
          case ReturnVariant::longterm_posttax:
            r_value = real_return(at("tau"), at("i_long"), at("d"));
            break;
          case ReturnVariant::longterm_pretax:
            r_value = real_return(0.0, at("i_long"), at("d"));
            break;
          case ReturnVariant::shortrate:
            r_value = real_return(at("tau"), at("i_short"), at("d"));
            break;
          case ReturnVariant::implied:
            // Capital share is stored in percent of income; the formula wants a fraction.
            r_value = implied_return(at("k") / 100.0, at("ky"));
            break;
        }
        value = spread(r_value, at("g"));
      }
      dst.values(r, p_col) = value;
    }
    validate_series(dst);
  }
  return out;
}

CountrySeries demean_country(const CountrySeries& series) {
  CountrySeries out = series;
  for (Eigen::Index j = 0; j < series.values.cols(); ++j) {
    Span span = series.observed_span(static_cast<std::size_t>(j));
    if (span.size() < 2) {
      throw InsufficientDataError(fmt::format("country {} variable {}: {} observation(s), need 2",
                                              series.country_id,
                                              series.variable_names.at(static_cast<std::size_t>(j)),
                                              span.size()));
    }
    // Deviations from the first observation make the result exactly invariant
    // to adding a constant whenever that addition is itself exact.
    const double anchor = series.values(span.begin, j);
    double sum = 0.0;
    for (Eigen::Index r = span.begin; r < span.end; ++r) sum += series.values(r, j) - anchor;
    const double mean_dev = sum / static_cast<double>(span.size());
    for (Eigen::Index r = span.begin; r < span.end; ++r) {
      out.values(r, j) = (series.values(r, j) - anchor) - mean_dev;
    }
  }
  return out;
}

PanelDataset demean_panel(const PanelDataset& panel) {
  PanelDataset out;
  out.variable_names = panel.variable_names;
  out.countries.reserve(panel.countries.size());
  for (const auto& c : panel.countries) out.countries.push_back(demean_country(c));
  return out;
}

std::size_t default_min_coverage(std::size_t n_countries) {
  return std::max<std::size_t>(1, (n_countries + 2) / 3);
}

AverageSeries cross_section_average(const std::vector<CountrySeries>& members,
                                    std::size_t min_coverage, bool trim_edges) {
  if (members.empty()) throw PreconditionError("cross-section average of an empty panel");
  const auto& names = members.front().variable_names;
  if (names.empty()) throw PreconditionError("cross-section average with no variables");
  int first = std::numeric_limits<int>::max();
  int last = std::numeric_limits<int>::min();
  for (const auto& m : members) {
    if (m.variable_names != names) {
      throw ContractError(fmt::format("country {} has a different variable list", m.country_id));
    }
    if (m.values.hasNaN()) {
      throw ContractError(fmt::format("country {} has missing values in the model block",
                                      m.country_id));
    }
    if (m.length() == 0) continue;
    first = std::min(first, m.first_year);
    last = std::max(last, m.year_at(m.length() - 1));
  }
  if (first > last) throw InsufficientDataError("no observations to average");

  const auto years = static_cast<Eigen::Index>(last - first + 1);
  const auto n_vars = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(years, n_vars);
  std::vector<int> counts(static_cast<std::size_t>(years), 0);
  for (const auto& m : members) {
    for (Eigen::Index r = 0; r < m.length(); ++r) {
      const Eigen::Index row = m.year_at(r) - first;
      sums.row(row) += m.values.row(r);
      ++counts[static_cast<std::size_t>(row)];
    }
  }

  auto covered = [&](Eigen::Index row) {
    return static_cast<std::size_t>(counts[static_cast<std::size_t>(row)]) >= min_coverage;
  };
  Eigen::Index lo = 0;
  Eigen::Index hi = years;
  AverageSeries out;
  if (trim_edges) {
    while (lo < hi && !covered(lo)) out.trimmed_years.push_back(first + static_cast<int>(lo++));
    while (hi > lo && !covered(hi - 1)) out.trimmed_years.push_back(first + static_cast<int>(--hi));
    std::sort(out.trimmed_years.begin(), out.trimmed_years.end());
  }
  std::vector<int> low;
  for (Eigen::Index r = lo; r < hi; ++r) {
    if (!covered(r)) low.push_back(first + static_cast<int>(r));
  }
  if (!low.empty() || lo == hi) {
    throw CoverageError(fmt::format("years below coverage {} of {} countries: [{}]", min_coverage,
                                    members.size(), fmt::join(low, ", ")));
  }

  out.series.country_id = "AVG";
  out.series.first_year = first + static_cast<int>(lo);
  out.series.variable_names = names;
  out.series.values.resize(hi - lo, n_vars);
  for (Eigen::Index r = lo; r < hi; ++r) {
    const int n = counts[static_cast<std::size_t>(r)];
    out.series.values.row(r - lo) = sums.row(r) / static_cast<double>(n);
    out.counts.push_back(n);
  }
  return out;
}

}  // namespace psvar
