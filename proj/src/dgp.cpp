#include "psvar/dgp.hpp"

#include "psvar/decomp.hpp"
#include "psvar/errors.hpp"
#include "psvar/var.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace psvar {

namespace {

constexpr double kMaxModulus = 0.98;

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x64677031u};
  return std::mt19937_64(seq);
}

class ShockSource {
 public:
  ShockSource(ShockDistribution dist, double df) : dist_(dist), student_(df), df_(df) {}

  /// Unit-variance draw.
  double operator()(std::mt19937_64& rng) {
    if (dist_ == ShockDistribution::gaussian) return normal_(rng);
    return student_(rng) * std::sqrt((df_ - 2.0) / df_);
  }

 private:
  ShockDistribution dist_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::student_t_distribution<double> student_;
  double df_;
};

}  // namespace

void DgpSpec::validate() const {
  if (n_countries == 0 || periods < 1 || dim < 1) {
    throw ValidationError("DGP needs N >= 1, T >= 1 and M >= 1");
  }
  if (coefficients.size() != n_countries || impact.size() != n_countries ||
      lambda.size() != n_countries) {
    throw ValidationError("DGP needs coefficients, impact and loadings for every country");
  }
  if (!levels.empty() && levels.size() != n_countries) {
    throw ValidationError("DGP levels must be empty or given for every country");
  }
  if (country_ids.size() != n_countries ||
      variable_names.size() != static_cast<std::size_t>(dim)) {
    throw ValidationError("DGP labels do not match N and M");
  }
  if (distribution == ShockDistribution::student_t && !(student_df > 2.0)) {
    throw ValidationError("Student-t shocks need df > 2 for a finite variance");
  }
  for (std::size_t i = 0; i < n_countries; ++i) {
    if (coefficients[i].empty()) throw ValidationError("DGP lag polynomial is empty");
    for (const auto& r : coefficients[i]) {
      if (r.rows() != dim || r.cols() != dim) throw ValidationError("DGP coefficient shape");
    }
    const auto report = companion_stability(coefficients[i]);
    if (!(report.max_modulus < kMaxModulus)) {
      throw ValidationError(fmt::format("DGP country {} is not stable enough (modulus {})",
                                        country_ids[i], report.max_modulus));
    }
    if (impact[i].rows() != dim || impact[i].cols() != dim) {
      throw ValidationError("DGP impact matrix shape");
    }
    if (!impact[i].isLowerTriangular() || (impact[i].diagonal().array() <= 0.0).any()) {
      throw ValidationError("DGP impact matrix must be lower triangular with positive diagonal");
    }
    if (lambda[i].size() != dim || (lambda[i].array().abs() > 1.0).any()) {
      throw ValidationError("DGP loadings must lie in [-1, 1]");
    }
    if (!levels.empty() && levels[i].size() != dim) throw ValidationError("DGP levels shape");
  }
}

DgpSpec make_heterogeneous_spec(const HeterogeneousDgp& params) {
  if (params.base.empty()) throw ValidationError("heterogeneous DGP needs a base lag polynomial");
  const Eigen::Index m = params.base.front().rows();
  DgpSpec spec;
  spec.n_countries = params.n_countries;
  spec.periods = params.periods;
  spec.dim = m;
  spec.seed = params.seed;
  spec.variable_names = params.variable_names;
  if (spec.variable_names.empty()) {
    for (Eigen::Index j = 0; j < m; ++j) spec.variable_names.push_back(fmt::format("y{}", j + 1));
  }
  auto rng = substream(params.seed, 0xC0EFu);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t i = 0; i < params.n_countries; ++i) {
    spec.country_ids.push_back(fmt::format("C{:02}", i + 1));
    std::vector<Eigen::MatrixXd> coeffs;
    for (int attempt = 0;; ++attempt) {
      coeffs.clear();
      for (const auto& r : params.base) {
        Eigen::MatrixXd noise = r;
        for (Eigen::Index a = 0; a < m; ++a) {
          for (Eigen::Index b = 0; b < m; ++b) noise(a, b) = params.dispersion * unif(rng);
        }
        coeffs.push_back(r + noise);
      }
      if (companion_stability(coeffs).max_modulus < kMaxModulus) break;
      if (attempt > 1000) throw ValidationError("could not draw a stable heterogeneous DGP");
    }
    spec.coefficients.push_back(std::move(coeffs));
    spec.impact.push_back(params.impact);
    Eigen::VectorXd lam(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      lam(j) = params.loading_values[(i + static_cast<std::size_t>(j)) % params.loading_values.size()];
    }
    spec.lambda.push_back(std::move(lam));
  }
  spec.validate();
  return spec;
}

SimulatedPanel simulate(const DgpSpec& spec) {
  spec.validate();
  const Eigen::Index m = spec.dim;
  const Eigen::Index total = spec.burn_in + spec.periods;

  ShockSource common_source(spec.distribution, spec.student_df);
  auto common_rng = substream(spec.seed, 0);
  Eigen::MatrixXd common(total, m);
  for (Eigen::Index t = 0; t < total; ++t) {
    for (Eigen::Index j = 0; j < m; ++j) common(t, j) = common_source(common_rng);
  }

  SimulatedPanel out;
  out.panel.variable_names = spec.variable_names;
  out.common_shocks = common.bottomRows(spec.periods);
  for (std::size_t i = 0; i < spec.n_countries; ++i) {
    ShockSource source(spec.distribution, spec.student_df);
    auto rng = substream(spec.seed, i + 1);
    const Eigen::VectorXd& lam = spec.lambda[i];
    const Eigen::ArrayXd idio_sd = (1.0 - lam.array().square()).max(0.0).sqrt();
    const auto& coeffs = spec.coefficients[i];
    const auto lags = static_cast<Eigen::Index>(coeffs.size());

    Eigen::MatrixXd idio(total, m);
    Eigen::MatrixXd composite(total, m);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(total, m);
    for (Eigen::Index t = 0; t < total; ++t) {
      for (Eigen::Index j = 0; j < m; ++j) idio(t, j) = idio_sd(j) * source(rng);
      composite.row(t) = common.row(t).cwiseProduct(lam.transpose()) + idio.row(t);
      Eigen::VectorXd yt = spec.impact[i] * composite.row(t).transpose();
      for (Eigen::Index j = 1; j <= std::min(t, lags); ++j) {
        yt.noalias() += coeffs[static_cast<std::size_t>(j - 1)] * y.row(t - j).transpose();
      }
      y.row(t) = yt.transpose();
    }

    CountrySeries series;
    series.country_id = spec.country_ids[i];
    series.first_year = spec.first_year;
    series.variable_names = spec.variable_names;
    series.values = y.bottomRows(spec.periods);
    if (!spec.levels.empty()) series.values.rowwise() += spec.levels[i].transpose();
    out.panel.countries.push_back(std::move(series));
    out.composite_shocks.push_back(composite.bottomRows(spec.periods));
    out.idiosyncratic_shocks.push_back(idio.bottomRows(spec.periods));
  }
  return out;
}

PanelDataset simulate_panel(const DgpSpec& spec) { return simulate(spec).panel; }

IrfTensor true_irf(const DgpSpec& spec, std::size_t country, Eigen::Index horizon) {
  if (country >= spec.n_countries) throw LookupError(fmt::format("no DGP country {}", country));
  std::vector<std::size_t> identity(static_cast<std::size_t>(spec.dim));
  for (std::size_t j = 0; j < identity.size(); ++j) identity[j] = j;
  IrfTensor irf = compute_irf(spec.coefficients[country], spec.impact[country], identity, horizon);
  irf.country_id = spec.country_ids[country];
  irf.variables = spec.variable_names;
  return irf;
}

std::vector<Eigen::MatrixXd> true_median_irf(const DgpSpec& spec, Eigen::Index horizon) {
  std::vector<IrfTensor> irfs;
  for (std::size_t i = 0; i < spec.n_countries; ++i) irfs.push_back(true_irf(spec, i, horizon));
  return pointwise_median(irfs);
}

}  // namespace psvar
