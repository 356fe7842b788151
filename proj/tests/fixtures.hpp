#pragma once

// Baseline estimation of a simulated panel at fixed lags, shared by the
// bootstrap tests and the acceptance suite.

#include "psvar/bootstrap.hpp"
#include "psvar/decomp.hpp"
#include "psvar/dgp.hpp"
#include "psvar/transform.hpp"

#include <Eigen/Dense>

namespace fixture {

inline psvar::BootstrapInputs baseline(const psvar::PanelDataset& raw, Eigen::Index lag,
                                       Eigen::Index horizon = 20) {
  const auto demeaned = psvar::demean_panel(raw);
  const auto spec = psvar::ModelSpec::custom(raw.variable_names);
  const auto blocks = psvar::model_blocks(demeaned, spec);
  psvar::BootstrapInputs in;
  in.horizon = horizon;
  const auto common = psvar::common_var(blocks, spec.ordering, lag);
  in.common = common.fact;
  for (const auto& b : blocks) {
    psvar::BootstrapMember m;
    m.model = psvar::estimate_var(b, lag);
    m.fact = psvar::structural_residuals(m.model, spec.ordering);
    m.loadings = psvar::estimate_loadings(m.fact, in.common);
    in.members.push_back(std::move(m));
  }
  return in;
}

/// Panel and DGP with N countries, a common B and loadings cycling through
/// {0, 0.3, 0.6, 0.9}.
inline psvar::DgpSpec heterogeneous(std::uint64_t seed, std::size_t n = 10, Eigen::Index t = 400) {
  psvar::HeterogeneousDgp p;
  p.n_countries = n;
  p.periods = t;
  Eigen::MatrixXd r1(2, 2);
  r1 << 0.5, 0.1, 0.2, 0.4;
  p.base = {r1};
  p.dispersion = 0.05;
  p.impact = Eigen::MatrixXd::Identity(2, 2);
  p.impact(1, 0) = 0.3;
  p.variable_names = {"y1", "y2"};
  p.seed = seed;
  return psvar::make_heterogeneous_spec(p);
}

}  // namespace fixture
