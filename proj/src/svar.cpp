#include "psvar/svar.hpp"

#include "psvar/errors.hpp"
#include "psvar/transform.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <cmath>

namespace psvar {

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov, double tolerance) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw FactorizationError(fmt::format("covariance must be square and non-empty, got {}x{}",
                                         cov.rows(), cov.cols()));
  }
  if (!cov.allFinite()) throw FactorizationError("covariance has non-finite entries");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tolerance * scale) {
    throw FactorizationError("covariance is not symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -tolerance * scale) {
    throw FactorizationError(
        fmt::format("covariance is not positive semidefinite (most negative eigenvalue {})",
                    min_eig));
  }

  const Eigen::Index m = sym.rows();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double pivot = sym(j, j) - b.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0)) {
      throw FactorizationError(fmt::format(
          "covariance is singular at pivot {} (value {}, most negative eigenvalue {})", j, pivot,
          min_eig));
    }
    b(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < m; ++i) {
      b(i, j) = (sym(i, j) - b.row(i).head(j).dot(b.row(j).head(j))) / b(j, j);
    }
  }
  return b;
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& ordering) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t k = 0; k < ordering.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(ordering[k]));
  }
  return out;
}

Eigen::MatrixXd permute_symmetric(const Eigen::MatrixXd& m,
                                  const std::vector<std::size_t>& ordering) {
  const auto n = static_cast<Eigen::Index>(ordering.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      out(a, b) = m(static_cast<Eigen::Index>(ordering[static_cast<std::size_t>(a)]),
                    static_cast<Eigen::Index>(ordering[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

Eigen::MatrixXd unpermute_columns(const Eigen::MatrixXd& m,
                                  const std::vector<std::size_t>& ordering) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t k = 0; k < ordering.size(); ++k) {
    out.col(static_cast<Eigen::Index>(ordering[k])) = m.col(static_cast<Eigen::Index>(k));
  }
  return out;
}

StructuralFactorization structural_residuals(const VarModel& model,
                                             const std::vector<std::size_t>& ordering) {
  check_permutation(ordering, static_cast<std::size_t>(model.dim()));
  StructuralFactorization fact;
  fact.country_id = model.country_id;
  fact.ordering = ordering;
  for (auto idx : ordering) fact.ordered_names.push_back(model.variable_names.at(idx));
  fact.first_year = model.effective_first_year();
  try {
    fact.impact = cholesky_factor(permute_symmetric(model.residual_cov, ordering));
  } catch (const FactorizationError& e) {
    throw FactorizationError(fmt::format("country {}: {}", model.country_id, e.what()));
  }
  const Eigen::MatrixXd ordered_u = permute_columns(model.residuals, ordering);
  fact.shocks = fact.impact.triangularView<Eigen::Lower>()
                    .solve(ordered_u.transpose())
                    .transpose();
  return fact;
}

}  // namespace psvar
