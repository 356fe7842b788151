#include "psvar/bootstrap.hpp"

#include "psvar/errors.hpp"
#include "psvar/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace psvar {

namespace {

std::mt19937_64 repetition_stream(std::uint64_t seed, std::size_t repetition) {
  const auto rep = static_cast<std::uint64_t>(repetition);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32),
                    0x70737661u};
  return std::mt19937_64(seq);
}

void check_pools(const BootstrapInputs& inputs, const std::vector<IdiosyncraticShocks>& pools) {
  if (inputs.members.empty()) throw PreconditionError("bootstrap needs at least one member");
  if (pools.size() != inputs.members.size()) {
    throw ContractError("one idiosyncratic pool per member is required");
  }
  if (inputs.common.shocks.rows() == 0) throw PreconditionError("empty common shock series");
  for (const auto& p : pools) {
    if (p.values.rows() == 0) {
      throw PreconditionError(fmt::format("country {}: empty idiosyncratic pool", p.country_id));
    }
  }
}

}  // namespace

IdiosyncraticShocks recover_idiosyncratic(const StructuralFactorization& member,
                                          const LoadingMatrix& loadings,
                                          const StructuralFactorization& common) {
  const int first = loadings.overlap_first_year;
  const Eigen::Index n = loadings.overlap;
  const Eigen::Index member_row = first - member.first_year;
  const Eigen::Index common_row = first - common.first_year;
  if (member_row < 0 || common_row < 0 || member_row + n > member.shocks.rows() ||
      common_row + n > common.shocks.rows() || loadings.lambda.size() != member.dim()) {
    throw ContractError(fmt::format("country {}: loadings span is not aligned with the shocks",
                                    member.country_id));
  }
  IdiosyncraticShocks out;
  out.country_id = member.country_id;
  out.first_year = first;
  out.values = member.shocks.middleRows(member_row, n) -
               common.shocks.middleRows(common_row, n) * loadings.lambda.asDiagonal();
  return out;
}

YearRange member_year_range(const std::vector<BootstrapMember>& members) {
  YearRange range{std::numeric_limits<int>::max(), std::numeric_limits<int>::min()};
  for (const auto& m : members) {
    range.first = std::min(range.first, m.fact.first_year);
    range.last = std::max(range.last,
                          m.fact.first_year + static_cast<int>(m.fact.shocks.rows()) - 1);
  }
  return range;
}

ResampleIndices draw_indices(const BootstrapInputs& inputs,
                             const std::vector<IdiosyncraticShocks>& pools, std::mt19937_64& rng) {
  check_pools(inputs, pools);
  const YearRange years = member_year_range(inputs.members);
  ResampleIndices idx;
  idx.first_year = years.first;
  std::uniform_int_distribution<Eigen::Index> common_draw(0, inputs.common.shocks.rows() - 1);
  idx.common.resize(static_cast<std::size_t>(years.last - years.first + 1));
  for (auto& c : idx.common) c = common_draw(rng);
  for (std::size_t i = 0; i < inputs.members.size(); ++i) {
    std::uniform_int_distribution<Eigen::Index> draw(0, pools[i].values.rows() - 1);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(inputs.members[i].fact.shocks.rows()));
    for (auto& r : rows) r = draw(rng);
    idx.idiosyncratic.push_back(std::move(rows));
  }
  return idx;
}

ResampleIndices identity_indices(const BootstrapInputs& inputs,
                                 const std::vector<IdiosyncraticShocks>& pools) {
  check_pools(inputs, pools);
  const YearRange years = member_year_range(inputs.members);
  ResampleIndices idx;
  idx.first_year = years.first;
  for (int y = years.first; y <= years.last; ++y) {
    idx.common.push_back(static_cast<Eigen::Index>(y - inputs.common.first_year));
  }
  for (std::size_t i = 0; i < inputs.members.size(); ++i) {
    const auto& fact = inputs.members[i].fact;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < fact.shocks.rows(); ++t) {
      rows.push_back(fact.first_year + static_cast<Eigen::Index>(t) - pools[i].first_year);
    }
    idx.idiosyncratic.push_back(std::move(rows));
  }
  return idx;
}

ResampledShocks resample_shocks(const BootstrapInputs& inputs,
                                const std::vector<IdiosyncraticShocks>& pools,
                                const ResampleIndices& indices) {
  check_pools(inputs, pools);
  if (indices.idiosyncratic.size() != inputs.members.size()) {
    throw ContractError("resample indices do not cover every member");
  }
  const auto& ebar = inputs.common.shocks;
  ResampledShocks out;
  for (std::size_t i = 0; i < inputs.members.size(); ++i) {
    const auto& member = inputs.members[i];
    const auto& pool = pools[i].values;
    const Eigen::Index t_eff = member.fact.shocks.rows();
    const Eigen::Index m = member.fact.dim();
    if (static_cast<Eigen::Index>(indices.idiosyncratic[i].size()) != t_eff) {
      throw ContractError(fmt::format("country {}: index draw length mismatch",
                                      member.model.country_id));
    }
    Eigen::MatrixXd common(t_eff, m);
    Eigen::MatrixXd idio(t_eff, m);
    for (Eigen::Index t = 0; t < t_eff; ++t) {
      const auto year_slot = static_cast<std::size_t>(member.fact.first_year + t - indices.first_year);
      if (year_slot >= indices.common.size()) {
        throw ContractError("common index draw does not cover the member's years");
      }
      const Eigen::Index crow = indices.common[year_slot];
      const Eigen::Index irow = indices.idiosyncratic[i][static_cast<std::size_t>(t)];
      if (crow < 0 || crow >= ebar.rows() || irow < 0 || irow >= pool.rows()) {
        throw ContractError(fmt::format("country {}: resample index out of range",
                                        member.model.country_id));
      }
      common.row(t) = ebar.row(crow);
      idio.row(t) = pool.row(irow);
    }
    out.composite.push_back(common * member.loadings.lambda.asDiagonal() + idio);
    out.common.push_back(std::move(common));
    out.idiosyncratic.push_back(std::move(idio));
  }
  return out;
}

Eigen::MatrixXd pseudo_series(const VarModel& model, const StructuralFactorization& fact,
                              const Eigen::MatrixXd& composite_shocks, PseudoSeriesMode mode) {
  if (composite_shocks.rows() != model.fitted.rows() ||
      composite_shocks.cols() != model.fitted.cols()) {
    throw ContractError(fmt::format("country {}: {}x{} resampled shocks for a {}x{} fit",
                                    model.country_id, composite_shocks.rows(),
                                    composite_shocks.cols(), model.fitted.rows(),
                                    model.fitted.cols()));
  }
  const Eigen::MatrixXd ordered_u = composite_shocks * fact.impact.transpose();
  const Eigen::MatrixXd u = unpermute_columns(ordered_u, fact.ordering);
  Eigen::MatrixXd out(model.data.rows(), model.data.cols());
  out.topRows(model.lag) = model.data.topRows(model.lag);
  if (mode == PseudoSeriesMode::fixed_design) {
    out.bottomRows(u.rows()) = model.fitted + u;
    return out;
  }
  for (Eigen::Index t = model.lag; t < out.rows(); ++t) {
    Eigen::VectorXd y = u.row(t - model.lag).transpose();
    for (Eigen::Index j = 1; j <= model.lag; ++j) {
      y.noalias() += model.coefficients[static_cast<std::size_t>(j - 1)] * out.row(t - j).transpose();
    }
    out.row(t) = y.transpose();
  }
  return out;
}

IrfTensor member_irf(const VarModel& model, const StructuralFactorization& fact,
                     Eigen::Index horizon, IrfScale scale, bool accumulate) {
  IrfTensor irf = compute_irf(model, fact, horizon);
  if (scale == IrfScale::one_pp) irf = rescale_one_pp(irf, fact.impact);
  if (accumulate) irf = accumulate_irf(irf);
  return irf;
}

Eigen::MatrixXd BootstrapResult::simulated_medians(Eigen::Index shock, Eigen::Index response) const {
  Eigen::MatrixXd d(horizon + 1, static_cast<Eigen::Index>(draws.size()));
  for (std::size_t r = 0; r < draws.size(); ++r) {
    for (Eigen::Index h = 0; h <= horizon; ++h) {
      d(h, static_cast<Eigen::Index>(r)) = draws[r][static_cast<std::size_t>(h)](response, shock);
    }
  }
  return d;
}

BootstrapResult run_bootstrap(const BootstrapInputs& inputs, const BootstrapOptions& options) {
  if (options.repetitions < 2) {
    throw PreconditionError(fmt::format("bootstrap needs k >= 2, got {}", options.repetitions));
  }
  if (inputs.members.empty()) throw PreconditionError("bootstrap needs at least one member");

  std::vector<IdiosyncraticShocks> pools;
  std::vector<IrfTensor> baseline;
  for (const auto& m : inputs.members) {
    pools.push_back(recover_idiosyncratic(m.fact, m.loadings, inputs.common));
    baseline.push_back(member_irf(m.model, m.fact, inputs.horizon, inputs.scale, inputs.accumulate));
  }

  BootstrapResult result;
  result.variables = inputs.members.front().fact.ordered_names;
  result.horizon = inputs.horizon;
  result.requested = options.repetitions;
  result.seed = options.seed;
  result.z = options.z;
  result.median = pointwise_median(baseline);

  using Draw = std::optional<std::vector<Eigen::MatrixXd>>;
  std::vector<Draw> draws(options.repetitions);
  std::vector<std::string> errors(options.repetitions);

  parallel_for(options.repetitions, options.workers, [&](std::size_t rep) {
    auto rng = repetition_stream(options.seed, rep);
    try {
      const auto indices = draw_indices(inputs, pools, rng);
      const auto shocks = resample_shocks(inputs, pools, indices);
      std::vector<IrfTensor> irfs;
      irfs.reserve(inputs.members.size());
      for (std::size_t i = 0; i < inputs.members.size(); ++i) {
        const auto& m = inputs.members[i];
        CountrySeries series;
        series.country_id = m.model.country_id;
        series.first_year = m.model.data_first_year;
        series.variable_names = m.model.variable_names;
        series.values = pseudo_series(m.model, m.fact, shocks.composite[i], options.mode);
        const VarModel refit = estimate_var(series, m.model.lag, options.var);
        const StructuralFactorization fact = structural_residuals(refit, m.fact.ordering);
        irfs.push_back(member_irf(refit, fact, inputs.horizon, inputs.scale, inputs.accumulate));
      }
      draws[rep] = pointwise_median(irfs);
    } catch (const Error& e) {
      errors[rep] = fmt::format("repetition {}: {}", rep, e.what());
    }
  });

  for (std::size_t rep = 0; rep < draws.size(); ++rep) {
    if (draws[rep]) {
      result.kept.push_back(rep);
      result.draws.push_back(std::move(*draws[rep]));
    } else {
      result.failures.push_back(errors[rep]);
    }
  }
  result.used = result.kept.size();
  result.dropped = result.requested - result.used;
  if (static_cast<double>(result.dropped) >
          options.max_drop_fraction * static_cast<double>(result.requested) ||
      result.used < 2) {
    std::string report = fmt::format("{} of {} repetitions failed", result.dropped,
                                     result.requested);
    for (std::size_t i = 0; i < std::min<std::size_t>(5, result.failures.size()); ++i) {
      report += "\n  " + result.failures[i];
    }
    throw BootstrapError(report);
  }

  const Eigen::Index m = result.median.front().rows();
  for (Eigen::Index h = 0; h <= inputs.horizon; ++h) {
    const auto hs = static_cast<std::size_t>(h);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(m, m);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(m, m);
    double n = 0.0;
    for (const auto& d : result.draws) {
      n += 1.0;
      const Eigen::MatrixXd delta = d[hs] - mean;
      mean += delta / n;
      m2 += delta.cwiseProduct(d[hs] - mean);
    }
    Eigen::MatrixXd sigma = (m2 / (n - 1.0)).cwiseMax(0.0).cwiseSqrt();
    result.lower.push_back(result.median[hs] - options.z * sigma);
    result.upper.push_back(result.median[hs] + options.z * sigma);
    result.sigma.push_back(std::move(sigma));
  }
  return result;
}

}  // namespace psvar
