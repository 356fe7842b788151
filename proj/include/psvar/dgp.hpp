#pragma once

#include "psvar/irf.hpp"
#include "psvar/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace psvar {

enum class ShockDistribution { gaussian, student_t };

/// Known data-generating process for a heterogeneous panel SVAR:
///   ebar_t ~ iid(0, I),  etilde_it ~ iid(0, I - Lambda_i^2),
///   e_it = Lambda_i ebar_t + etilde_it,  u_it = B_i e_it,
///   y_it = sum_j R_ij y_i,t-j + u_it.
struct DgpSpec {
  std::size_t n_countries = 0;
  Eigen::Index periods = 0;
  Eigen::Index dim = 0;
  std::vector<std::vector<Eigen::MatrixXd>> coefficients;  // [country][lag]
  std::vector<Eigen::MatrixXd> impact;                     // B_i, lower triangular
  std::vector<Eigen::VectorXd> lambda;                     // diagonal loadings
  std::vector<Eigen::VectorXd> levels;                     // optional fixed effects added at the end
  std::vector<std::string> country_ids;
  std::vector<std::string> variable_names;
  Eigen::Index burn_in = 200;
  int first_year = 1000;
  std::uint64_t seed = 0;
  ShockDistribution distribution = ShockDistribution::gaussian;
  double student_df = 5.0;

  /// Throws ValidationError when a companion matrix has modulus >= 0.98, a
  /// loading lies outside [-1, 1], or shapes disagree.
  void validate() const;
};

/// Builds a DgpSpec with per-country coefficients `base + dispersion * U(-1,1)`
/// (redrawn until stable), a common B and cycling loadings taken from
/// `loading_values`.
struct HeterogeneousDgp {
  std::size_t n_countries = 10;
  Eigen::Index periods = 400;
  std::vector<Eigen::MatrixXd> base;
  double dispersion = 0.05;
  Eigen::MatrixXd impact;
  std::vector<double> loading_values{0.0, 0.3, 0.6, 0.9};
  std::vector<std::string> variable_names;
  std::uint64_t seed = 0;
};

[[nodiscard]] DgpSpec make_heterogeneous_spec(const HeterogeneousDgp& params);

/// Simulated panel together with the shocks that generated it (post burn-in).
struct SimulatedPanel {
  PanelDataset panel;
  Eigen::MatrixXd common_shocks;                 // periods x M
  std::vector<Eigen::MatrixXd> composite_shocks; // per country, periods x M
  std::vector<Eigen::MatrixXd> idiosyncratic_shocks;
};

[[nodiscard]] SimulatedPanel simulate(const DgpSpec& spec);
[[nodiscard]] PanelDataset simulate_panel(const DgpSpec& spec);

/// True structural IRF of one country (natural variable order).
[[nodiscard]] IrfTensor true_irf(const DgpSpec& spec, std::size_t country, Eigen::Index horizon);

/// Cross-country pointwise median of the true IRFs.
[[nodiscard]] std::vector<Eigen::MatrixXd> true_median_irf(const DgpSpec& spec, Eigen::Index horizon);

}  // namespace psvar
