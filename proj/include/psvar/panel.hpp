#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace psvar {

/// Half-open row range [begin, end) inside a CountrySeries.
struct Span {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;

  [[nodiscard]] Eigen::Index size() const noexcept { return end > begin ? end - begin : 0; }
  [[nodiscard]] bool empty() const noexcept { return size() == 0; }
};

enum class Units { percent, percent_of_income, index, fraction, ratio };

struct VariableSpec {
  std::string name;
  Units units = Units::percent;
  std::optional<std::pair<double, double>> bounded;
};

/// Schema entries for the variables the toolkit knows about. Unknown names are
/// accepted without bounds.
[[nodiscard]] std::vector<VariableSpec> default_schema();

/// One country's annual observations. Missing values are NaN and may only
/// appear as leading or trailing runs per variable.
struct CountrySeries {
  std::string country_id;
  int first_year = 0;
  std::vector<std::string> variable_names;
  Eigen::MatrixXd values;  // rows = years, cols = variables

  [[nodiscard]] Eigen::Index length() const noexcept { return values.rows(); }
  [[nodiscard]] int year_at(Eigen::Index row) const noexcept {
    return first_year + static_cast<int>(row);
  }
  [[nodiscard]] std::size_t variable_index(const std::string& name) const;

  /// Observed span of one variable; empty when the variable is all missing.
  [[nodiscard]] Span observed_span(std::size_t column) const;

  /// Rows where every listed column is observed. Contiguous by the
  /// no-interior-gap invariant.
  [[nodiscard]] Span complete_span(const std::vector<std::size_t>& columns) const;

  /// Copy restricted to `columns` over their complete span.
  [[nodiscard]] CountrySeries restrict_to(const std::vector<std::size_t>& columns) const;
};

struct PanelDataset {
  std::vector<std::string> variable_names;
  std::vector<CountrySeries> countries;

  [[nodiscard]] std::size_t variable_index(const std::string& name) const;
  [[nodiscard]] const CountrySeries& country(const std::string& id) const;
  [[nodiscard]] bool has_variable(const std::string& name) const;
};

/// Checks every dataset invariant; throws ValidationError on the first breach.
void validate_panel(const PanelDataset& panel, const std::vector<VariableSpec>& schema = {},
                    std::size_t min_countries = 2);

/// Checks a single country's year/gap invariants.
void validate_series(const CountrySeries& series);

[[nodiscard]] PanelDataset read_panel_csv(std::istream& in,
                                          const std::vector<VariableSpec>& schema = {},
                                          std::size_t min_countries = 2);
[[nodiscard]] PanelDataset load_panel(const std::filesystem::path& path,
                                      const std::vector<VariableSpec>& schema = {},
                                      std::size_t min_countries = 2);

void write_panel_csv(std::ostream& out, const PanelDataset& panel);
void write_panel(const std::filesystem::path& path, const PanelDataset& panel);

[[nodiscard]] PanelDataset select_sample(const PanelDataset& panel,
                                         const std::vector<std::string>& countries);

}  // namespace psvar
