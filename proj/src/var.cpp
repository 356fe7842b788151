#include "psvar/var.hpp"

#include "psvar/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace psvar {

namespace {

struct LsFit {
  Eigen::MatrixXd beta;  // (M*J) x M
  Eigen::MatrixXd fitted;
  Eigen::MatrixXd residuals;
};

std::string regressor_name(const std::vector<std::string>& names, Eigen::Index column,
                           Eigen::Index dim) {
  const auto lag = column / dim + 1;
  const auto var = static_cast<std::size_t>(column % dim);
  const std::string base = var < names.size() ? names[var] : fmt::format("y{}", var);
  return fmt::format("{}(t-{})", base, lag);
}

LsFit least_squares(const Eigen::MatrixXd& data, Eigen::Index lag, Eigen::Index first_row,
                    const std::vector<std::string>& names, const std::string& country) {
  const Eigen::MatrixXd x = lagged_regressors(data, lag, first_row);
  const Eigen::MatrixXd y = data.bottomRows(data.rows() - first_row);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    std::vector<std::string> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < x.cols(); ++k) {
      offending.push_back(regressor_name(names, perm(k), data.cols()));
    }
    throw CollinearityError(fmt::format("country {}: regressors are collinear (rank {} of {}): {}",
                                        country, qr.rank(), x.cols(), fmt::join(offending, ", ")));
  }
  LsFit fit;
  fit.beta = qr.solve(y);
  fit.fitted = x * fit.beta;
  fit.residuals = y - fit.fitted;
  return fit;
}

double divisor_for(Eigen::Index t_eff, Eigen::Index regressors, CovDivisor divisor) {
  if (divisor == CovDivisor::degrees_of_freedom) {
    return static_cast<double>(std::max<Eigen::Index>(1, t_eff - regressors));
  }
  return static_cast<double>(t_eff);
}

void require_complete(const CountrySeries& series) {
  if (series.values.hasNaN()) {
    throw ContractError(fmt::format("country {}: VAR input has missing values", series.country_id));
  }
}

}  // namespace

InfoCriterion parse_criterion(const std::string& text) {
  if (text == "aic" || text == "AIC") return InfoCriterion::aic;
  if (text == "bic" || text == "BIC") return InfoCriterion::bic;
  if (text == "hq" || text == "HQ") return InfoCriterion::hq;
  throw ValidationError(fmt::format("unknown information criterion '{}'", text));
}

std::string to_string(InfoCriterion criterion) {
  switch (criterion) {
    case InfoCriterion::aic: return "AIC";
    case InfoCriterion::bic: return "BIC";
    case InfoCriterion::hq: return "HQ";
  }
  return "AIC";
}

Eigen::MatrixXd lagged_regressors(const Eigen::MatrixXd& data, Eigen::Index lag,
                                  Eigen::Index first_row) {
  const Eigen::Index m = data.cols();
  const Eigen::Index rows = data.rows() - first_row;
  Eigen::MatrixXd x(rows, m * lag);
  for (Eigen::Index j = 1; j <= lag; ++j) {
    x.middleCols((j - 1) * m, m) = data.middleRows(first_row - j, rows);
  }
  return x;
}

Eigen::MatrixXd VarModel::regressors() const { return lagged_regressors(data, lag, lag); }

Eigen::Index feasible_max_lag(Eigen::Index observations, Eigen::Index dim, Eigen::Index max_lag,
                              const VarOptions& options) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j <= max_lag; ++j) {
    if (observations - j >= dim * j + options.buffer) best = j;
  }
  return best;
}

VarModel estimate_var(const CountrySeries& series, Eigen::Index lag, const VarOptions& options) {
  require_complete(series);
  const Eigen::Index t = series.length();
  const Eigen::Index m = series.values.cols();
  if (m == 0) throw PreconditionError("VAR with no variables");
  if (lag < 1) throw PreconditionError(fmt::format("lag order must be >= 1, got {}", lag));
  if (t - lag < m * lag + options.buffer) {
    throw SampleSizeError(fmt::format(
        "country {}: {} observations cannot support VAR({}) in {} variables (need {})",
        series.country_id, t, lag, m, m * lag + options.buffer + lag));
  }
  LsFit fit = least_squares(series.values, lag, lag, series.variable_names, series.country_id);

  VarModel model;
  model.country_id = series.country_id;
  model.variable_names = series.variable_names;
  model.data_first_year = series.first_year;
  model.lag = lag;
  model.data = series.values;
  for (Eigen::Index j = 0; j < lag; ++j) {
    model.coefficients.push_back(fit.beta.middleRows(j * m, m).transpose());
  }
  model.fitted = std::move(fit.fitted);
  model.residuals = std::move(fit.residuals);
  const double div = divisor_for(model.residuals.rows(), m * lag, options.divisor);
  model.residual_cov = (model.residuals.transpose() * model.residuals) / div;
  model.residual_cov = 0.5 * (model.residual_cov + model.residual_cov.transpose());
  return model;
}

LagSelection select_lag(const CountrySeries& series, Eigen::Index max_lag, InfoCriterion criterion,
                        const VarOptions& options) {
  require_complete(series);
  if (max_lag < 1) throw PreconditionError(fmt::format("max_lag must be >= 1, got {}", max_lag));
  const Eigen::Index t = series.length();
  const Eigen::Index m = series.values.cols();
  if (t - max_lag < m * max_lag + options.buffer) {
    throw SampleSizeError(fmt::format("country {}: {} observations cannot support max lag {}",
                                      series.country_id, t, max_lag));
  }
  LagSelection out;
  if (max_lag == 1) {
    out.lag = 1;
    return out;
  }
  const Eigen::Index t_eff = t - max_lag;
  const double n = static_cast<double>(t_eff);
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 1; j <= max_lag; ++j) {
    LsFit fit = least_squares(series.values, j, max_lag, series.variable_names, series.country_id);
    const Eigen::MatrixXd cov = (fit.residuals.transpose() * fit.residuals) / n;
    const double det = cov.determinant();
    const double log_det = det > 0.0 ? std::log(det) : -std::numeric_limits<double>::infinity();
    const double params = static_cast<double>(m * m * j);
    double penalty = 0.0;
    switch (criterion) {
      case InfoCriterion::aic: penalty = 2.0 * params / n; break;
      case InfoCriterion::bic: penalty = std::log(n) * params / n; break;
      case InfoCriterion::hq: penalty = 2.0 * std::log(std::log(n)) * params / n; break;
    }
    const double value = log_det + penalty;
    out.criteria.push_back(value);
    if (value < best) {
      best = value;
      out.lag = j;
    }
  }
  return out;
}

Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& coefficients) {
  if (coefficients.empty()) throw PreconditionError("companion matrix of an empty lag polynomial");
  const Eigen::Index m = coefficients.front().rows();
  const auto lags = static_cast<Eigen::Index>(coefficients.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m * lags, m * lags);
  for (Eigen::Index j = 0; j < lags; ++j) {
    c.block(0, j * m, m, m) = coefficients[static_cast<std::size_t>(j)];
  }
  if (lags > 1) c.block(m, 0, m * (lags - 1), m * (lags - 1)).setIdentity();
  return c;
}

StabilityReport companion_stability(const std::vector<Eigen::MatrixXd>& coefficients,
                                    double margin) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion_matrix(coefficients), false);
  StabilityReport report;
  for (const auto& ev : solver.eigenvalues()) report.companion_moduli.push_back(std::abs(ev));
  std::sort(report.companion_moduli.begin(), report.companion_moduli.end(), std::greater<>());
  report.max_modulus = report.companion_moduli.front();
  report.stable = report.max_modulus < 1.0 - margin;
  return report;
}

StabilityReport companion_stability(const VarModel& model, double margin) {
  return companion_stability(model.coefficients, margin);
}

bool WhitenessReport::all_passed() const {
  return std::all_of(passed.begin(), passed.end(), [](bool b) { return b; });
}

double ljung_box_q(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index lags) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd centered = x.array() - x.mean();
  const double denom = centered.squaredNorm();
  if (!(denom > 0.0)) throw DegenerateError("zero-variance residual series");
  double q = 0.0;
  for (Eigen::Index k = 1; k <= lags; ++k) {
    const double rho = centered.tail(n - k).dot(centered.head(n - k)) / denom;
    q += rho * rho / static_cast<double>(n - k);
  }
  return static_cast<double>(n) * static_cast<double>(n + 2) * q;
}

WhitenessReport whiteness(const VarModel& model, Eigen::Index lags, double level) {
  const Eigen::Index t_eff = model.effective_size();
  if (lags < 1 || 2 * lags >= t_eff) {
    throw PreconditionError(
        fmt::format("portmanteau lags {} must be in [1, {}) for {} residuals", lags,
                    (t_eff + 1) / 2, t_eff));
  }
  WhitenessReport report;
  report.lags = lags;
  report.dof = std::max<Eigen::Index>(1, lags - model.lag);
  report.level = level;
  boost::math::chi_squared dist(static_cast<double>(report.dof));
  report.critical_value = boost::math::quantile(dist, 1.0 - level);
  for (Eigen::Index j = 0; j < model.dim(); ++j) {
    const double q = ljung_box_q(model.residuals.col(j), lags);
    report.q.push_back(q);
    report.passed.push_back(q < report.critical_value);
  }
  return report;
}

}  // namespace psvar
