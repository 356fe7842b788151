#pragma once

#include "psvar/svar.hpp"
#include "psvar/var.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace psvar {

enum class IrfKind { composite, common_part, idiosyncratic_part };
enum class IrfScale { unit_shock, one_pp };

[[nodiscard]] std::string to_string(IrfKind kind);
[[nodiscard]] std::string to_string(IrfScale scale);
[[nodiscard]] IrfScale parse_irf_scale(const std::string& text);

/// Structural impulse responses in ordered coordinates. `responses[h](m, j)`
/// is the response of ordered variable m at horizon h to ordered shock j.
struct IrfTensor {
  std::string country_id;
  std::vector<std::string> variables;  // ordered names, labels both axes
  std::vector<Eigen::MatrixXd> responses;
  IrfKind kind = IrfKind::composite;
  IrfScale scale = IrfScale::unit_shock;
  bool accumulated = false;

  [[nodiscard]] Eigen::Index horizon() const noexcept {
    return static_cast<Eigen::Index>(responses.size()) - 1;
  }
  [[nodiscard]] Eigen::Index dim() const noexcept {
    return responses.empty() ? 0 : responses.front().rows();
  }
  [[nodiscard]] double at(Eigen::Index h, Eigen::Index shock, Eigen::Index response) const {
    return responses[static_cast<std::size_t>(h)](response, shock);
  }
};

/// Moving-average matrices Phi_0..Phi_H of a lag polynomial (original
/// coordinates): Phi_0 = I, Phi_h = sum_j R_j Phi_{h-j}.
[[nodiscard]] std::vector<Eigen::MatrixXd> ma_coefficients(
    const std::vector<Eigen::MatrixXd>& coefficients, Eigen::Index horizon);

/// Structural IRFs from raw coefficients, an ordered impact matrix and the
/// ordering that maps it back to the coefficients' coordinates.
[[nodiscard]] IrfTensor compute_irf(const std::vector<Eigen::MatrixXd>& coefficients,
                                    const Eigen::MatrixXd& impact,
                                    const std::vector<std::size_t>& ordering,
                                    Eigen::Index horizon);

[[nodiscard]] IrfTensor compute_irf(const VarModel& model, const StructuralFactorization& fact,
                                    Eigen::Index horizon);

/// Running sum over horizons.
[[nodiscard]] IrfTensor accumulate_irf(const IrfTensor& irf);

/// Rescales shock j by 1 / B_jj so each shock moves its own variable by one
/// unit (one percentage point for percent data) on impact.
[[nodiscard]] IrfTensor rescale_one_pp(const IrfTensor& irf, const Eigen::MatrixXd& impact);

}  // namespace psvar
