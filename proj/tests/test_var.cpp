#include "oracles.hpp"

#include "psvar/errors.hpp"
#include "psvar/var.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

using namespace psvar;

namespace {

Eigen::MatrixXd ar_path(const std::vector<double>& phi, Eigen::Index t, std::uint64_t seed) {
  std::vector<Eigen::MatrixXd> coeffs;
  for (double p : phi) coeffs.push_back(Eigen::MatrixXd::Constant(1, 1, p));
  std::mt19937_64 rng(seed);
  return oracle::simulate_var(coeffs, Eigen::MatrixXd::Identity(1, 1), t, rng);
}

// Criterion value straight from the definition, using the oracle solver.
double criterion_oracle(const Eigen::MatrixXd& data, int lag, int max_lag, const std::string& kind) {
  const Eigen::MatrixXd sub = data.bottomRows(data.rows() - max_lag + lag);
  const auto coeffs = oracle::normal_equations_var(sub, lag);
  const Eigen::Index m = data.cols();
  const Eigen::Index n = data.rows() - max_lag;
  Eigen::MatrixXd resid(n, m);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::VectorXd pred = Eigen::VectorXd::Zero(m);
    for (int j = 1; j <= lag; ++j) pred += coeffs[static_cast<std::size_t>(j - 1)] * sub.row(t + lag - j).transpose();
    resid.row(t) = sub.row(t + lag) - pred.transpose();
  }
  const double dn = static_cast<double>(n);
  const double ld = std::log((resid.transpose() * resid / dn).determinant());
  const double k = static_cast<double>(m * m * lag);
  if (kind == "aic") return ld + 2.0 * k / dn;
  if (kind == "bic") return ld + std::log(dn) * k / dn;
  return ld + 2.0 * std::log(std::log(dn)) * k / dn;
}

}  // namespace

TEST_CASE("noiseless scalar AR(1) is fitted exactly") {
  Eigen::MatrixXd clean(40, 1);
  clean(0, 0) = 1.0;
  for (Eigen::Index t = 1; t < clean.rows(); ++t) clean(t, 0) = 0.5 * clean(t - 1, 0);
  const auto model = estimate_var(oracle::make_series("A", clean), 1);
  CHECK(std::abs(model.coefficients[0](0, 0) - 0.5) < 1e-10);
  CHECK(model.residuals.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bivariate VAR(1) estimates agree with the normal-equations oracle") {
  Eigen::MatrixXd r1(2, 2);
  r1 << 0.5, 0.0, 0.2, 0.3;
  std::mt19937_64 rng(42);
  const Eigen::MatrixXd y = oracle::simulate_var({r1}, Eigen::MatrixXd::Identity(2, 2), 500, rng);
  const auto model = estimate_var(oracle::make_series("A", y), 1);
  const auto ref = oracle::normal_equations_var(y, 1);
  CHECK((model.coefficients[0] - ref[0]).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((model.coefficients[0] - r1).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("fit invariants: reconstruction, orthogonality, PSD covariance, zero-mean residuals") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index m = 1 + rep % 3;
    const int lag = 1 + rep % 2;
    const auto coeffs = oracle::random_stable(rng, m, lag);
    Eigen::MatrixXd y = oracle::simulate_var(coeffs, oracle::random_lower(rng, m), 120, rng);
    y.rowwise() -= y.colwise().mean();
    const auto model = estimate_var(oracle::make_series("A", y), lag);
    const Eigen::MatrixXd yy = model.regressand();
    CHECK((model.fitted + model.residuals - yy).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd x = model.regressors();
    const double scale = x.cwiseAbs().maxCoeff() * model.residuals.cwiseAbs().maxCoeff() * x.rows();
    CHECK((x.transpose() * model.residuals).cwiseAbs().maxCoeff() < 1e-8 * scale);
    CHECK((model.residual_cov - model.residual_cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.residual_cov);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
    const Eigen::MatrixXd expected =
        model.residuals.transpose() * model.residuals / static_cast<double>(model.effective_size());
    CHECK((model.residual_cov - expected).cwiseAbs().maxCoeff() < 1e-12);
    // No intercept, so residual means are small relative to their spread rather than exactly zero.
    const double sd = std::sqrt(model.residual_cov.diagonal().maxCoeff());
    CHECK(model.residuals.colwise().mean().cwiseAbs().maxCoeff() < 0.5 * sd);
  }
}

TEST_CASE("degrees-of-freedom divisor") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd y = oracle::simulate_var({0.4 * Eigen::MatrixXd::Identity(2, 2)},
                                                 Eigen::MatrixXd::Identity(2, 2), 60, rng);
  VarOptions opts;
  opts.divisor = CovDivisor::degrees_of_freedom;
  const auto ml = estimate_var(oracle::make_series("A", y), 2);
  const auto dof = estimate_var(oracle::make_series("A", y), 2, opts);
  const double ratio = 58.0 / (58.0 - 4.0);
  CHECK((dof.residual_cov - ratio * ml.residual_cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sample size and collinearity errors") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd y8 = oracle::simulate_var({0.3 * Eigen::MatrixXd::Identity(3, 3)},
                                                  Eigen::MatrixXd::Identity(3, 3), 8, rng);
  CHECK_THROWS_AS(estimate_var(oracle::make_series("A", y8), 2), SampleSizeError);

  Eigen::MatrixXd y = oracle::simulate_var({0.3 * Eigen::MatrixXd::Identity(2, 2)},
                                           Eigen::MatrixXd::Identity(2, 2), 50, rng);
  y.col(1) = 2.0 * y.col(0);
  try {
    (void)estimate_var(oracle::make_series("A", y), 2);
    FAIL("expected CollinearityError");
  } catch (const CollinearityError& e) {
    CHECK(std::string(e.what()).find("(t-") != std::string::npos);
  }
}

TEST_CASE("missing values are rejected by the estimator") {
  Eigen::MatrixXd y = Eigen::MatrixXd::Random(30, 1);
  y(0, 0) = std::nan("");
  CHECK_THROWS(estimate_var(oracle::make_series("A", y), 1));
}

TEST_CASE("lag selection matches direct criterion evaluation") {
  for (const std::string kind : {"aic", "bic", "hq"}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Eigen::MatrixXd y = ar_path({0.2, 0.3}, 120, seed);
      const auto sel = select_lag(oracle::make_series("A", y), 4, parse_criterion(kind));
      REQUIRE(sel.criteria.size() == 4);
      int best = 1;
      double best_v = criterion_oracle(y, 1, 4, kind);
      for (int j = 1; j <= 4; ++j) {
        const double v = criterion_oracle(y, j, 4, kind);
        CHECK(sel.criteria[static_cast<std::size_t>(j - 1)] == doctest::Approx(v).epsilon(1e-9));
        if (v < best_v) {
          best_v = v;
          best = j;
        }
      }
      CHECK(sel.lag == best);
    }
  }
}

TEST_CASE("Monte Carlo: BIC picks lag 1 on AR(1) data, lag >= 2 on strong AR(2)") {
  std::map<Eigen::Index, int> counts;
  int ar2_hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    counts[select_lag(oracle::make_series("A", ar_path({0.5}, 300, seed)), 4, InfoCriterion::bic).lag]++;
    const auto sel2 = select_lag(oracle::make_series("A", ar_path({0.2, 0.6}, 300, 1000 + seed)), 4,
                                 InfoCriterion::bic);
    if (sel2.lag >= 2) ++ar2_hits;
  }
  int mode_count = 0;
  Eigen::Index mode = 0;
  for (const auto& [lag, n] : counts) {
    if (n > mode_count) {
      mode_count = n;
      mode = lag;
    }
  }
  CHECK(mode == 1);
  CHECK(ar2_hits >= 95);
}

TEST_CASE("max_lag 1 always selects 1") {
  const Eigen::MatrixXd y = ar_path({0.2, 0.6}, 100, 3);
  CHECK(select_lag(oracle::make_series("A", y), 1, InfoCriterion::aic).lag == 1);
}

TEST_CASE("companion stability") {
  CHECK(companion_stability({Eigen::MatrixXd::Constant(1, 1, 0.5)}).max_modulus ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(companion_stability({Eigen::MatrixXd::Constant(1, 1, 0.5)}).stable);
  CHECK_FALSE(companion_stability({Eigen::MatrixXd::Constant(1, 1, 1.01)}).stable);
  CHECK_FALSE(companion_stability({Eigen::MatrixXd::Constant(1, 1, 0.95)}, 0.1).stable);

  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const auto coeffs = oracle::random_stable(rng, 2, 2, 0.99);
    const auto report = companion_stability(coeffs);
    CHECK(report.companion_moduli.size() == 4);
    CHECK(std::abs(report.max_modulus - oracle::max_root_modulus(coeffs)) < 1e-8);
  }
}

TEST_CASE("whiteness: iid residuals pass about 95% of the time") {
  int pass = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(500 + rep);
    const Eigen::MatrixXd y = oracle::simulate_var({Eigen::MatrixXd::Constant(1, 1, 0.3)},
                                                   Eigen::MatrixXd::Identity(1, 1), 1000, rng);
    const auto w = whiteness(estimate_var(oracle::make_series("A", y), 1), 10);
    CHECK(w.dof == 9);
    const boost::math::chi_squared chi(9.0);
    CHECK(w.critical_value == doctest::Approx(boost::math::quantile(chi, 0.95)).epsilon(1e-12));
    if (w.all_passed()) ++pass;
  }
  CHECK(pass >= 180);
  CHECK(pass <= 199);
}

TEST_CASE("whiteness: autocorrelated residuals fail") {
  // An AR(1) fit cannot absorb MA(1) dependence with coefficient 0.8.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Eigen::MatrixXd z(600, 1);
  std::vector<double> eps(601);
  for (auto& v : eps) v = n(rng);
  for (Eigen::Index t = 0; t < z.rows(); ++t) z(t, 0) = eps[static_cast<std::size_t>(t + 1)] + 0.8 * eps[static_cast<std::size_t>(t)];
  const auto w = whiteness(estimate_var(oracle::make_series("A", z), 1), 10);
  CHECK_FALSE(w.all_passed());
}

TEST_CASE("Ljung-Box Q by direct formula") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  Eigen::VectorXd x(50);
  for (auto& v : x) v = n(rng);
  const double mean = x.mean();
  double c0 = 0.0;
  for (auto v : x) c0 += (v - mean) * (v - mean);
  double q = 0.0;
  for (int k = 1; k <= 5; ++k) {
    double ck = 0.0;
    for (Eigen::Index t = k; t < 50; ++t) ck += (x(t) - mean) * (x(t - k) - mean);
    q += (ck / c0) * (ck / c0) / (50.0 - k);
  }
  q *= 50.0 * 52.0;
  CHECK(ljung_box_q(x, 5) == doctest::Approx(q).epsilon(1e-12));
  CHECK_THROWS_AS(ljung_box_q(Eigen::VectorXd::Zero(20), 3), DegenerateError);
}

TEST_CASE("whiteness precondition on the number of lags") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd y = oracle::simulate_var({Eigen::MatrixXd::Constant(1, 1, 0.3)},
                                                 Eigen::MatrixXd::Identity(1, 1), 41, rng);
  const auto model = estimate_var(oracle::make_series("A", y), 1);
  CHECK_THROWS_AS(whiteness(model, 20), PreconditionError);
  CHECK_THROWS_AS(whiteness(model, 0), PreconditionError);
  CHECK_NOTHROW(whiteness(model, 19));
}

TEST_CASE("Monte Carlo: coefficient RMSE shrinks with T") {
  Eigen::MatrixXd r1(2, 2);
  r1 << 0.5, 0.1, -0.2, 0.3;
  double rmse_small = 0.0, rmse_large = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(900 + seed);
    const Eigen::MatrixXd a = oracle::simulate_var({r1}, Eigen::MatrixXd::Identity(2, 2), 100, rng);
    const Eigen::MatrixXd b = oracle::simulate_var({r1}, Eigen::MatrixXd::Identity(2, 2), 800, rng);
    rmse_small += (estimate_var(oracle::make_series("A", a), 1).coefficients[0] - r1).squaredNorm();
    rmse_large += (estimate_var(oracle::make_series("A", b), 1).coefficients[0] - r1).squaredNorm();
  }
  CHECK(rmse_large < rmse_small);
}
