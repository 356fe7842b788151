#pragma once

#include "psvar/var.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace psvar {

/// Recursive identification of one VAR. Everything is stored in ordered
/// coordinates: column/row k refers to variable `ordering[k]` of the model.
struct StructuralFactorization {
  std::string country_id;
  std::vector<std::size_t> ordering;
  std::vector<std::string> ordered_names;
  int first_year = 0;                    // year of row 0 of `shocks`
  Eigen::MatrixXd impact;                // B, lower triangular, positive diagonal
  Eigen::MatrixXd shocks;                // structural residuals e_t, T_eff x M

  [[nodiscard]] Eigen::Index dim() const noexcept { return impact.rows(); }
};

/// Lower-triangular B with B B' = cov. Symmetrizes first; rejects matrices
/// that are not positive semidefinite within 1e-10 or have a non-positive
/// pivot.
[[nodiscard]] Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov, double tolerance = 1e-10);

/// Columns of `m` (and rows, if `square`) rearranged so position k holds
/// original index ordering[k].
[[nodiscard]] Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& m,
                                              const std::vector<std::size_t>& ordering);
[[nodiscard]] Eigen::MatrixXd permute_symmetric(const Eigen::MatrixXd& m,
                                                const std::vector<std::size_t>& ordering);
/// Inverse of permute_columns.
[[nodiscard]] Eigen::MatrixXd unpermute_columns(const Eigen::MatrixXd& m,
                                                const std::vector<std::size_t>& ordering);

/// e_t = B^{-1} u_t under `ordering`.
[[nodiscard]] StructuralFactorization structural_residuals(const VarModel& model,
                                                           const std::vector<std::size_t>& ordering);

}  // namespace psvar
