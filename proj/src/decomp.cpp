#include "psvar/decomp.hpp"

#include "psvar/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace psvar {

std::vector<CountrySeries> model_blocks(const PanelDataset& panel, const ModelSpec& spec,
                                        std::vector<std::string>* excluded) {
  spec.validate();
  std::vector<std::size_t> cols;
  for (const auto& name : spec.endogenous) cols.push_back(panel.variable_index(name));
  std::vector<CountrySeries> blocks;
  for (const auto& c : panel.countries) {
    bool usable = true;
    for (auto col : cols) usable &= !c.observed_span(col).empty();
    if (usable && c.complete_span(cols).empty()) usable = false;
    if (!usable) {
      if (excluded != nullptr) excluded->push_back(c.country_id);
      continue;
    }
    blocks.push_back(c.restrict_to(cols));
  }
  return blocks;
}

CommonModel common_var(const std::vector<CountrySeries>& members,
                       const std::vector<std::size_t>& ordering, Eigen::Index lag,
                       const CommonVarOptions& options) {
  if (members.empty()) throw PreconditionError("common VAR needs at least one member");
  if (members.front().variable_names.empty()) {
    throw PreconditionError("common VAR needs at least one variable");
  }
  const std::size_t coverage =
      options.min_coverage > 0 ? options.min_coverage : default_min_coverage(members.size());
  CommonModel out;
  out.average = cross_section_average(members, coverage, options.trim_edges);
  out.model = estimate_var(out.average.series, lag, options.var);
  out.fact = structural_residuals(out.model, ordering);
  return out;
}

CommonModel common_var(const PanelDataset& demeaned, const ModelSpec& spec, Eigen::Index lag,
                       const CommonVarOptions& options) {
  if (spec.endogenous.empty()) throw PreconditionError("common VAR needs at least one variable");
  return common_var(model_blocks(demeaned, spec), spec.ordering, lag, options);
}

LoadingMatrix estimate_loadings(const StructuralFactorization& member,
                                const StructuralFactorization& common, Eigen::Index min_overlap) {
  if (member.ordered_names != common.ordered_names) {
    throw ContractError(fmt::format("country {}: shock labels differ from the common model",
                                    member.country_id));
  }
  const int first = std::max(member.first_year, common.first_year);
  const int last = std::min(member.first_year + static_cast<int>(member.shocks.rows()),
                            common.first_year + static_cast<int>(common.shocks.rows()));
  const Eigen::Index overlap = std::max(0, last - first);
  if (overlap < min_overlap) {
    throw SampleSizeError(fmt::format("country {}: {} overlapping years with the common shocks, need {}",
                                      member.country_id, overlap, min_overlap));
  }
  const Eigen::MatrixXd e = member.shocks.middleRows(first - member.first_year, overlap);
  const Eigen::MatrixXd ebar = common.shocks.middleRows(first - common.first_year, overlap);

  LoadingMatrix out;
  out.country_id = member.country_id;
  out.overlap_first_year = first;
  out.overlap = overlap;
  out.lambda.resize(e.cols());
  out.idiosyncratic.resize(overlap, e.cols());
  for (Eigen::Index m = 0; m < e.cols(); ++m) {
    const Eigen::VectorXd ec = e.col(m).array() - e.col(m).mean();
    const Eigen::VectorXd bc = ebar.col(m).array() - ebar.col(m).mean();
    const double var = bc.squaredNorm();
    if (!(var > 0.0)) {
      throw DegenerateError(fmt::format("common shock {} has zero variance", m));
    }
    out.lambda(m) = ec.dot(bc) / var;
    out.idiosyncratic.col(m) = e.col(m) - out.lambda(m) * ebar.col(m);
  }
  return out;
}

DecomposedIrf decompose_irf(const IrfTensor& composite, const Eigen::VectorXd& lambda) {
  if (lambda.size() != composite.dim() || !lambda.allFinite()) {
    throw ContractError("loadings must be finite with one entry per shock");
  }
  DecomposedIrf out{composite, composite};
  out.common.kind = IrfKind::common_part;
  out.idiosyncratic.kind = IrfKind::idiosyncratic_part;
  const Eigen::VectorXd idio_weight = (1.0 - lambda.array().square()).matrix();
  for (std::size_t h = 0; h < composite.responses.size(); ++h) {
    out.common.responses[h] = composite.responses[h] * lambda.asDiagonal();
    out.idiosyncratic.responses[h] = composite.responses[h] * idio_weight.asDiagonal();
  }
  return out;
}

double interpolated_quantile(std::vector<double>& values, double p) {
  if (values.empty()) throw PreconditionError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median_of(std::vector<double> values) { return interpolated_quantile(values, 0.5); }

namespace {

std::vector<const IrfTensor*> sorted_members(const std::vector<IrfTensor>& irfs) {
  if (irfs.empty()) throw PreconditionError("summary of an empty IRF collection");
  const auto& ref = irfs.front();
  std::vector<const IrfTensor*> order;
  for (const auto& irf : irfs) {
    if (irf.responses.size() != ref.responses.size() || irf.dim() != ref.dim() ||
        irf.variables != ref.variables || irf.kind != ref.kind || irf.scale != ref.scale ||
        irf.accumulated != ref.accumulated) {
      throw ContractError(fmt::format("IRF of {} does not match the shape of {}", irf.country_id,
                                      ref.country_id));
    }
    order.push_back(&irf);
  }
  std::stable_sort(order.begin(), order.end(), [](const IrfTensor* a, const IrfTensor* b) {
    return a->country_id < b->country_id;
  });
  return order;
}

}  // namespace

IrfDistribution summarize(const std::vector<IrfTensor>& irfs) {
  const auto order = sorted_members(irfs);
  const auto& ref = *order.front();
  IrfDistribution dist;
  dist.kind = ref.kind;
  dist.scale = ref.scale;
  dist.accumulated = ref.accumulated;
  dist.variables = ref.variables;
  dist.count = order.size();
  for (const auto* irf : order) dist.members.push_back(irf->country_id);

  const Eigen::Index m = ref.dim();
  std::vector<double> cell(order.size());
  for (std::size_t h = 0; h < ref.responses.size(); ++h) {
    Eigen::MatrixXd med(m, m), mean(m, m), lo(m, m), hi(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < order.size(); ++i) cell[i] = order[i]->responses[h](r, c);
        mean(r, c) = std::accumulate(cell.begin(), cell.end(), 0.0) /
                     static_cast<double>(cell.size());
        lo(r, c) = interpolated_quantile(cell, 0.25);
        med(r, c) = interpolated_quantile(cell, 0.5);
        hi(r, c) = interpolated_quantile(cell, 0.75);
      }
    }
    dist.median.push_back(std::move(med));
    dist.mean.push_back(std::move(mean));
    dist.q25.push_back(std::move(lo));
    dist.q75.push_back(std::move(hi));
  }
  return dist;
}

std::vector<Eigen::MatrixXd> pointwise_median(const std::vector<IrfTensor>& irfs) {
  const auto order = sorted_members(irfs);
  const auto& ref = *order.front();
  const Eigen::Index m = ref.dim();
  std::vector<double> cell(order.size());
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t h = 0; h < ref.responses.size(); ++h) {
    Eigen::MatrixXd med(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < order.size(); ++i) cell[i] = order[i]->responses[h](r, c);
        med(r, c) = interpolated_quantile(cell, 0.5);
      }
    }
    out.push_back(std::move(med));
  }
  return out;
}

Correlation covariate_correlation(std::span<const double> responses,
                                  std::span<const double> covariate) {
  if (responses.size() != covariate.size()) {
    throw ContractError("responses and covariate differ in length");
  }
  if (responses.size() < 3) {
    throw PreconditionError(fmt::format("correlation needs >= 3 pairs, got {}", responses.size()));
  }
  const auto n = static_cast<double>(responses.size());
  const double my = std::accumulate(responses.begin(), responses.end(), 0.0) / n;
  const double mx = std::accumulate(covariate.begin(), covariate.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const double dx = covariate[i] - mx;
    const double dy = responses[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateError("correlation with a constant series");
  Correlation out;
  out.n = responses.size();
  out.pearson = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  return out;
}

}  // namespace psvar
