#pragma once

#include "psvar/irf.hpp"
#include "psvar/svar.hpp"
#include "psvar/transform.hpp"
#include "psvar/var.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace psvar {

/// VAR on the cross-sectional average plus its identification.
struct CommonModel {
  AverageSeries average;
  VarModel model;
  StructuralFactorization fact;
};

struct CommonVarOptions {
  std::size_t min_coverage = 0;  // 0 selects default_min_coverage(N)
  bool trim_edges = false;
  VarOptions var;
};

/// Country blocks restricted to the model variables (complete-case span).
/// Countries lacking any model variable are skipped and reported in `excluded`.
[[nodiscard]] std::vector<CountrySeries> model_blocks(const PanelDataset& panel,
                                                      const ModelSpec& spec,
                                                      std::vector<std::string>* excluded = nullptr);

[[nodiscard]] CommonModel common_var(const std::vector<CountrySeries>& members,
                                     const std::vector<std::size_t>& ordering, Eigen::Index lag,
                                     const CommonVarOptions& options = {});
[[nodiscard]] CommonModel common_var(const PanelDataset& demeaned, const ModelSpec& spec,
                                     Eigen::Index lag, const CommonVarOptions& options = {});

/// Diagonal loadings of a country's composite shocks on the common shocks.
struct LoadingMatrix {
  std::string country_id;
  Eigen::VectorXd lambda;         // one loading per ordered shock
  int overlap_first_year = 0;
  Eigen::Index overlap = 0;
  Eigen::MatrixXd idiosyncratic;  // e - lambda * ebar over the overlap

  [[nodiscard]] Eigen::MatrixXd matrix() const { return lambda.asDiagonal(); }
};

inline constexpr Eigen::Index kMinLoadingOverlap = 10;

/// lambda_m = cov(e_m, ebar_m) / var(ebar_m) over the overlapping years.
[[nodiscard]] LoadingMatrix estimate_loadings(const StructuralFactorization& member,
                                              const StructuralFactorization& common,
                                              Eigen::Index min_overlap = kMinLoadingOverlap);

/// Common part Lambda A and idiosyncratic part (I - Lambda Lambda') A, both
/// acting on the shock dimension.
struct DecomposedIrf {
  IrfTensor common;
  IrfTensor idiosyncratic;
};

[[nodiscard]] DecomposedIrf decompose_irf(const IrfTensor& composite,
                                          const Eigen::VectorXd& lambda);

struct IrfDistribution {
  IrfKind kind = IrfKind::composite;
  IrfScale scale = IrfScale::unit_shock;
  bool accumulated = false;
  std::vector<std::string> variables;
  std::vector<std::string> members;
  std::vector<Eigen::MatrixXd> median;
  std::vector<Eigen::MatrixXd> mean;
  std::vector<Eigen::MatrixXd> q25;
  std::vector<Eigen::MatrixXd> q75;
  std::size_t count = 0;

  [[nodiscard]] Eigen::Index horizon() const noexcept {
    return static_cast<Eigen::Index>(median.size()) - 1;
  }
};

/// Sample quantile by linear interpolation between order statistics
/// (position p * (n - 1)). Sorts `values` in place.
[[nodiscard]] double interpolated_quantile(std::vector<double>& values, double p);
[[nodiscard]] double median_of(std::vector<double> values);

/// Pointwise cross-country summaries. Members are reduced in ascending
/// country-id order.
[[nodiscard]] IrfDistribution summarize(const std::vector<IrfTensor>& irfs);

/// Pointwise cross-sectional median only (bootstrap inner loop).
[[nodiscard]] std::vector<Eigen::MatrixXd> pointwise_median(const std::vector<IrfTensor>& irfs);

struct Correlation {
  std::size_t n = 0;
  double pearson = 0.0;
  double slope = 0.0;      // response on covariate
  double intercept = 0.0;
};

[[nodiscard]] Correlation covariate_correlation(std::span<const double> responses,
                                                std::span<const double> covariate);

}  // namespace psvar
