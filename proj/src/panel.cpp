#include "psvar/panel.hpp"

#include "psvar/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace psvar {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size() && std::isfinite(out);
}

bool parse_int(const std::string& text, int& out) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(text.c_str(), &end, 10);
  if (errno != 0 || end != text.c_str() + text.size()) return false;
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) return false;
  out = static_cast<int>(v);
  return true;
}

}  // namespace

std::vector<VariableSpec> default_schema() {
  const std::pair<double, double> pct{0.0, 100.0};
  return {
      {"p", Units::percent, std::nullopt},
      {"z", Units::percent_of_income, pct},
      {"k", Units::percent_of_income, pct},
      {"s", Units::percent_of_income, pct},
      {"g", Units::percent, std::nullopt},
      {"d", Units::percent, std::nullopt},
      {"i_long", Units::percent, std::nullopt},
      {"i_short", Units::percent, std::nullopt},
      {"tau", Units::fraction, std::pair<double, double>{0.0, 1.0}},
      {"ky", Units::ratio, std::pair<double, double>{0.0, std::numeric_limits<double>::infinity()}},
  };
}

std::size_t CountrySeries::variable_index(const std::string& name) const {
  auto it = std::find(variable_names.begin(), variable_names.end(), name);
  if (it == variable_names.end()) {
    throw LookupError(fmt::format("country {}: unknown variable '{}'", country_id, name));
  }
  return static_cast<std::size_t>(it - variable_names.begin());
}

Span CountrySeries::observed_span(std::size_t column) const {
  const auto col = values.col(static_cast<Eigen::Index>(column));
  Span span{0, 0};
  Eigen::Index first = -1;
  Eigen::Index last = -1;
  for (Eigen::Index r = 0; r < col.size(); ++r) {
    if (!std::isnan(col(r))) {
      if (first < 0) first = r;
      last = r;
    }
  }
  if (first >= 0) span = {first, last + 1};
  return span;
}

Span CountrySeries::complete_span(const std::vector<std::size_t>& columns) const {
  Span span{0, length()};
  for (auto c : columns) {
    Span s = observed_span(c);
    span.begin = std::max(span.begin, s.begin);
    span.end = std::min(span.end, s.end);
  }
  if (span.end < span.begin) span.end = span.begin;
  return span;
}

CountrySeries CountrySeries::restrict_to(const std::vector<std::size_t>& columns) const {
  Span span = complete_span(columns);
  CountrySeries out;
  out.country_id = country_id;
  out.first_year = year_at(span.begin);
  out.values.resize(span.size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.variable_names.push_back(variable_names.at(columns[j]));
    out.values.col(static_cast<Eigen::Index>(j)) =
        values.col(static_cast<Eigen::Index>(columns[j])).segment(span.begin, span.size());
  }
  return out;
}

std::size_t PanelDataset::variable_index(const std::string& name) const {
  auto it = std::find(variable_names.begin(), variable_names.end(), name);
  if (it == variable_names.end()) throw LookupError(fmt::format("unknown variable '{}'", name));
  return static_cast<std::size_t>(it - variable_names.begin());
}

bool PanelDataset::has_variable(const std::string& name) const {
  return std::find(variable_names.begin(), variable_names.end(), name) != variable_names.end();
}

const CountrySeries& PanelDataset::country(const std::string& id) const {
  for (const auto& c : countries) {
    if (c.country_id == id) return c;
  }
  throw LookupError(fmt::format("unknown country '{}'", id));
}

void validate_series(const CountrySeries& series) {
  if (series.country_id.empty()) throw ValidationError("empty country identifier");
  if (series.values.cols() != static_cast<Eigen::Index>(series.variable_names.size())) {
    throw ValidationError(fmt::format("country {}: {} value columns for {} variables",
                                      series.country_id, series.values.cols(),
                                      series.variable_names.size()));
  }
  for (std::size_t c = 0; c < series.variable_names.size(); ++c) {
    Span span = series.observed_span(c);
    for (Eigen::Index r = span.begin; r < span.end; ++r) {
      if (std::isnan(series.values(r, static_cast<Eigen::Index>(c)))) {
        throw ValidationError(fmt::format("interior gap: country {} variable {} year {}",
                                          series.country_id, series.variable_names[c],
                                          series.year_at(r)));
      }
    }
  }
}

void validate_panel(const PanelDataset& panel, const std::vector<VariableSpec>& schema,
                    std::size_t min_countries) {
  if (panel.variable_names.empty()) throw ValidationError("panel has no variables");
  if (panel.countries.size() < min_countries) {
    throw ValidationError(fmt::format("panel needs at least {} countries, got {}", min_countries,
                                      panel.countries.size()));
  }
  std::set<std::string> ids;
  for (const auto& c : panel.countries) {
    if (!ids.insert(c.country_id).second) {
      throw ValidationError(fmt::format("duplicate country identifier '{}'", c.country_id));
    }
    if (c.variable_names != panel.variable_names) {
      throw ValidationError(fmt::format("country {} does not expose the panel variables",
                                        c.country_id));
    }
    validate_series(c);
  }
  for (const auto& spec : schema) {
    if (!spec.bounded || !panel.has_variable(spec.name)) continue;
    const auto col = static_cast<Eigen::Index>(panel.variable_index(spec.name));
    const auto [lo, hi] = *spec.bounded;
    for (const auto& c : panel.countries) {
      for (Eigen::Index r = 0; r < c.length(); ++r) {
        double v = c.values(r, col);
        if (!std::isnan(v) && (v < lo || v > hi)) {
          throw ValidationError(fmt::format(
              "bound violation: country {} variable {} year {} value {} outside [{}, {}]",
              c.country_id, spec.name, c.year_at(r), v, lo, hi));
        }
      }
    }
  }
}

PanelDataset read_panel_csv(std::istream& in, const std::vector<VariableSpec>& schema,
                            std::size_t min_countries) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.size() < 3 || header[0] != "country" || header[1] != "year") {
    throw ParseError(fmt::format("line {}: header must be 'country,year,<variable>...'", line_no));
  }
  PanelDataset panel;
  panel.variable_names.assign(header.begin() + 2, header.end());
  {
    std::set<std::string> seen;
    for (const auto& v : panel.variable_names) {
      if (v.empty() || !seen.insert(v).second) {
        throw ParseError(fmt::format("line {}: empty or duplicate variable name '{}'", line_no, v));
      }
    }
  }
  const std::size_t n_vars = panel.variable_names.size();

  std::map<std::string, std::map<int, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != n_vars + 2) {
      throw ParseError(fmt::format("line {}: expected {} fields, got {}", line_no, n_vars + 2,
                                   fields.size()));
    }
    if (fields[0].empty()) throw ParseError(fmt::format("line {}: empty country", line_no));
    int year = 0;
    if (!parse_int(fields[1], year)) {
      throw ParseError(fmt::format("line {}: invalid year '{}'", line_no, fields[1]));
    }
    std::vector<double> vals(n_vars, kMissing);
    for (std::size_t j = 0; j < n_vars; ++j) {
      const auto& f = fields[j + 2];
      if (f.empty()) continue;
      if (!parse_double(f, vals[j])) {
        throw ParseError(fmt::format("line {}: invalid number '{}' for {}", line_no, f,
                                     panel.variable_names[j]));
      }
    }
    auto& by_year = rows[fields[0]];
    if (!by_year.emplace(year, std::move(vals)).second) {
      throw ValidationError(
          fmt::format("line {}: duplicate observation for ({}, {})", line_no, fields[0], year));
    }
  }

  for (auto& [id, by_year] : rows) {
    CountrySeries series;
    series.country_id = id;
    series.variable_names = panel.variable_names;
    series.first_year = by_year.begin()->first;
    const int last_year = by_year.rbegin()->first;
    const auto length = static_cast<Eigen::Index>(last_year - series.first_year + 1);
    series.values = Eigen::MatrixXd::Constant(length, static_cast<Eigen::Index>(n_vars), kMissing);
    for (const auto& [year, vals] : by_year) {
      for (std::size_t j = 0; j < n_vars; ++j) {
        series.values(year - series.first_year, static_cast<Eigen::Index>(j)) = vals[j];
      }
    }
    // Trim rows where every variable is missing at the edges.
    Eigen::Index first = 0;
    Eigen::Index last = length;
    auto all_missing = [&](Eigen::Index r) { return series.values.row(r).array().isNaN().all(); };
    while (first < last && all_missing(first)) ++first;
    while (last > first && all_missing(last - 1)) --last;
    if (first > 0 || last < length) {
      series.values = series.values.middleRows(first, last - first).eval();
      series.first_year += static_cast<int>(first);
    }
    panel.countries.push_back(std::move(series));
  }

  validate_panel(panel, schema, min_countries);
  return panel;
}

PanelDataset load_panel(const std::filesystem::path& path, const std::vector<VariableSpec>& schema,
                        std::size_t min_countries) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  return read_panel_csv(in, schema, min_countries);
}

void write_panel_csv(std::ostream& out, const PanelDataset& panel) {
  out << "country,year";
  for (const auto& v : panel.variable_names) out << ',' << v;
  out << '\n';
  for (const auto& c : panel.countries) {
    for (Eigen::Index r = 0; r < c.length(); ++r) {
      out << c.country_id << ',' << c.year_at(r);
      for (Eigen::Index j = 0; j < c.values.cols(); ++j) {
        out << ',';
        double v = c.values(r, j);
        if (!std::isnan(v)) out << fmt::format("{}", v);
      }
      out << '\n';
    }
  }
}

void write_panel(const std::filesystem::path& path, const PanelDataset& panel) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ParseError(fmt::format("cannot write '{}'", path.string()));
  write_panel_csv(out, panel);
}

PanelDataset select_sample(const PanelDataset& panel, const std::vector<std::string>& countries) {
  for (const auto& id : countries) (void)panel.country(id);
  PanelDataset out;
  out.variable_names = panel.variable_names;
  for (const auto& c : panel.countries) {
    if (std::find(countries.begin(), countries.end(), c.country_id) != countries.end()) {
      out.countries.push_back(c);
    }
  }
  return out;
}

}  // namespace psvar
