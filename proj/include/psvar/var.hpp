#pragma once

#include "psvar/panel.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace psvar {

enum class InfoCriterion { aic, bic, hq };

[[nodiscard]] InfoCriterion parse_criterion(const std::string& text);
[[nodiscard]] std::string to_string(InfoCriterion criterion);

enum class CovDivisor {
  sample,              // T_eff, maximum-likelihood scaling
  degrees_of_freedom,  // T_eff - M*J
};

struct VarOptions {
  /// Extra observations required beyond the M*J regressors.
  Eigen::Index buffer = 5;
  CovDivisor divisor = CovDivisor::sample;
};

/// Reduced-form VAR without intercept, fitted by least squares.
///
/// Row t of `fitted`/`residuals` corresponds to row J + t of `data`, i.e. the
/// year `data_first_year + J + t`.
struct VarModel {
  std::string country_id;
  std::vector<std::string> variable_names;
  int data_first_year = 0;
  Eigen::Index lag = 1;
  std::vector<Eigen::MatrixXd> coefficients;  // lag matrices R_1..R_J, each M x M
  Eigen::MatrixXd data;                       // full regression sample, T x M
  Eigen::MatrixXd fitted;                     // (T - J) x M
  Eigen::MatrixXd residuals;                  // (T - J) x M
  Eigen::MatrixXd residual_cov;               // M x M
  std::vector<double> criteria;               // filled by select_lag, else empty

  [[nodiscard]] Eigen::Index dim() const noexcept { return data.cols(); }
  [[nodiscard]] Eigen::Index effective_size() const noexcept { return residuals.rows(); }
  [[nodiscard]] int effective_first_year() const noexcept {
    return data_first_year + static_cast<int>(lag);
  }
  /// Regressand block (rows J.. of the data).
  [[nodiscard]] Eigen::MatrixXd regressand() const { return data.bottomRows(effective_size()); }
  /// Stacked regressors [y_{t-1}, ..., y_{t-J}].
  [[nodiscard]] Eigen::MatrixXd regressors() const;
};

/// Builds the lagged regressor matrix for rows `offset + lag ..` of `data`
/// with lags 1..lag.
[[nodiscard]] Eigen::MatrixXd lagged_regressors(const Eigen::MatrixXd& data, Eigen::Index lag,
                                                Eigen::Index first_row);

/// Least-squares VAR(lag) on a complete (no missing) demeaned series.
[[nodiscard]] VarModel estimate_var(const CountrySeries& series, Eigen::Index lag,
                                    const VarOptions& options = {});

struct LagSelection {
  Eigen::Index lag = 1;
  std::vector<double> criteria;  // index k holds lag k + 1
};

/// Fits lags 1..max_lag on the same effective sample and returns the
/// criterion minimizer; ties go to the smaller lag.
[[nodiscard]] LagSelection select_lag(const CountrySeries& series, Eigen::Index max_lag,
                                      InfoCriterion criterion, const VarOptions& options = {});

/// Largest lag the sample supports, capped at `max_lag`; 0 if none.
[[nodiscard]] Eigen::Index feasible_max_lag(Eigen::Index observations, Eigen::Index dim,
                                            Eigen::Index max_lag, const VarOptions& options = {});

[[nodiscard]] Eigen::MatrixXd companion_matrix(const std::vector<Eigen::MatrixXd>& coefficients);

struct StabilityReport {
  std::vector<double> companion_moduli;  // sorted descending
  double max_modulus = 0.0;
  bool stable = false;
};

[[nodiscard]] StabilityReport companion_stability(const std::vector<Eigen::MatrixXd>& coefficients,
                                                  double margin = 0.0);
[[nodiscard]] StabilityReport companion_stability(const VarModel& model, double margin = 0.0);

struct WhitenessReport {
  Eigen::Index lags = 0;
  Eigen::Index dof = 0;
  double level = 0.05;
  double critical_value = 0.0;
  std::vector<double> q;     // Ljung-Box Q per equation
  std::vector<bool> passed;  // Q below the chi-square critical value

  [[nodiscard]] bool all_passed() const;
};

/// Ljung-Box portmanteau test on each residual column.
[[nodiscard]] WhitenessReport whiteness(const VarModel& model, Eigen::Index lags,
                                        double level = 0.05);

/// Ljung-Box Q for one series.
[[nodiscard]] double ljung_box_q(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index lags);

}  // namespace psvar
