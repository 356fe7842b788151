#pragma once

#include "psvar/panel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace psvar {

// Derived-variable formulas. Rates are percent, shares and tax rates are unit
// fractions, K/Y is a plain ratio.

/// Post-tax real return: (1 - tau) * i_nom - d.
[[nodiscard]] double real_return(double tau, double i_nom, double d);
/// r - g.
[[nodiscard]] double spread(double r, double g);
/// Return implied by the national accounts, alpha * Y / K, in percent.
[[nodiscard]] double implied_return(double alpha, double ky);
/// Balanced-growth capital-to-income ratio s / (g + delta).
[[nodiscard]] double steady_state_ky(double s, double g, double delta);
/// Balanced-growth capital share r * s / (g + delta).
[[nodiscard]] double steady_state_alpha(double r, double s, double g, double delta);

enum class ModelName { m1, m2, m3, custom };

/// Endogenous variables of one model plus the recursive (Cholesky) order.
/// `ordering[k]` is the index into `endogenous` of the k-th most exogenous
/// variable.
struct ModelSpec {
  ModelName name = ModelName::custom;
  std::vector<std::string> endogenous;
  std::vector<std::size_t> ordering;

  /// Spread/top-1% share.
  static ModelSpec m1();
  /// Spread/capital share.
  static ModelSpec m2();
  /// Spread/savings rate/capital share.
  static ModelSpec m3();
  static ModelSpec custom(std::vector<std::string> variables);

  [[nodiscard]] ModelSpec inverted() const;
  [[nodiscard]] ModelSpec with_ordering(const std::vector<std::string>& order) const;
  [[nodiscard]] std::vector<std::string> ordered_names() const;
  void validate() const;
};

[[nodiscard]] ModelName parse_model_name(const std::string& text);
[[nodiscard]] std::string to_string(ModelName name);

/// Checks that `ordering` is a permutation of 0..m-1.
void check_permutation(const std::vector<std::size_t>& ordering, std::size_t m);

enum class ReturnVariant { longterm_posttax, longterm_pretax, shortrate, implied };

[[nodiscard]] ReturnVariant parse_return_variant(const std::string& text);
[[nodiscard]] std::string to_string(ReturnVariant variant);

/// Input columns a return variant needs to build the spread `p`.
[[nodiscard]] std::vector<std::string> variant_inputs(ReturnVariant variant);

/// Adds (or replaces) column `p` built from the raw return inputs of `variant`.
/// When those inputs are absent and the panel already carries `p`, the panel is
/// returned unchanged for the baseline variant; otherwise throws LookupError.
[[nodiscard]] PanelDataset derive_spread(const PanelDataset& panel, ReturnVariant variant);

/// Subtracts each variable's mean over its own observed span. Missing edges
/// stay missing.
[[nodiscard]] CountrySeries demean_country(const CountrySeries& series);
[[nodiscard]] PanelDataset demean_panel(const PanelDataset& panel);

/// Per-year cross-country average of complete, contiguous country blocks.
struct AverageSeries {
  CountrySeries series;
  std::vector<int> counts;        // countries contributing at each row
  std::vector<int> trimmed_years; // edge years dropped for low coverage
};

/// Averages `members` (all with identical variable lists, no missing values)
/// year by year. Years with fewer than `min_coverage` contributors raise
/// CoverageError unless `trim_edges` is set and they sit at either end.
[[nodiscard]] AverageSeries cross_section_average(const std::vector<CountrySeries>& members,
                                                  std::size_t min_coverage,
                                                  bool trim_edges = false);

/// Default coverage threshold: a third of the cross-section, at least one.
[[nodiscard]] std::size_t default_min_coverage(std::size_t n_countries);

}  // namespace psvar
