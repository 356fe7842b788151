#include "psvar/irf.hpp"

#include "psvar/errors.hpp"
#include "psvar/transform.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace psvar {

std::string to_string(IrfKind kind) {
  switch (kind) {
    case IrfKind::composite: return "composite";
    case IrfKind::common_part: return "common";
    case IrfKind::idiosyncratic_part: return "idiosyncratic";
  }
  return "composite";
}

std::string to_string(IrfScale scale) {
  return scale == IrfScale::unit_shock ? "unit_shock" : "one_pp";
}

IrfScale parse_irf_scale(const std::string& text) {
  if (text == "unit_shock" || text == "unit") return IrfScale::unit_shock;
  if (text == "one_pp" || text == "onepp" || text == "1pp") return IrfScale::one_pp;
  throw ValidationError(fmt::format("unknown IRF scale '{}'", text));
}

std::vector<Eigen::MatrixXd> ma_coefficients(const std::vector<Eigen::MatrixXd>& coefficients,
                                             Eigen::Index horizon) {
  if (horizon < 1) throw PreconditionError(fmt::format("horizon must be >= 1, got {}", horizon));
  if (coefficients.empty()) throw PreconditionError("empty lag polynomial");
  const Eigen::Index m = coefficients.front().rows();
  const auto lags = static_cast<Eigen::Index>(coefficients.size());
  std::vector<Eigen::MatrixXd> phi;
  phi.reserve(static_cast<std::size_t>(horizon + 1));
  phi.push_back(Eigen::MatrixXd::Identity(m, m));
  for (Eigen::Index h = 1; h <= horizon; ++h) {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 1; j <= std::min(h, lags); ++j) {
      next.noalias() += coefficients[static_cast<std::size_t>(j - 1)] *
                        phi[static_cast<std::size_t>(h - j)];
    }
    phi.push_back(std::move(next));
  }
  return phi;
}

IrfTensor compute_irf(const std::vector<Eigen::MatrixXd>& coefficients,
                      const Eigen::MatrixXd& impact, const std::vector<std::size_t>& ordering,
                      Eigen::Index horizon) {
  check_permutation(ordering, static_cast<std::size_t>(impact.rows()));
  const auto phi = ma_coefficients(coefficients, horizon);
  IrfTensor irf;
  irf.responses.reserve(phi.size());
  for (const auto& p : phi) irf.responses.push_back(permute_symmetric(p, ordering) * impact);
  // Phi_0 = I, so the impact slice is B itself; keep it exact.
  irf.responses.front() = impact;
  return irf;
}

IrfTensor compute_irf(const VarModel& model, const StructuralFactorization& fact,
                      Eigen::Index horizon) {
  IrfTensor irf = compute_irf(model.coefficients, fact.impact, fact.ordering, horizon);
  irf.country_id = model.country_id;
  irf.variables = fact.ordered_names;
  return irf;
}

IrfTensor accumulate_irf(const IrfTensor& irf) {
  IrfTensor out = irf;
  for (std::size_t h = 1; h < out.responses.size(); ++h) {
    out.responses[h] = out.responses[h - 1] + irf.responses[h];
  }
  out.accumulated = true;
  return out;
}

IrfTensor rescale_one_pp(const IrfTensor& irf, const Eigen::MatrixXd& impact) {
  if (irf.scale == IrfScale::one_pp) return irf;
  IrfTensor out = irf;
  for (auto& r : out.responses) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) r.col(j) /= impact(j, j);
  }
  out.scale = IrfScale::one_pp;
  return out;
}

}  // namespace psvar
