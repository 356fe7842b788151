#include "oracles.hpp"

#include "psvar/irf.hpp"
#include "psvar/svar.hpp"
#include "psvar/var.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace psvar;

namespace {

const std::vector<std::size_t> kIdentity2{0, 1};

}  // namespace

TEST_CASE("scalar AR(1) gives geometric decay") {
  const auto irf = compute_irf({Eigen::MatrixXd::Constant(1, 1, 0.5)}, Eigen::MatrixXd::Ones(1, 1),
                               {0}, 40);
  for (Eigen::Index h = 0; h <= 40; ++h) CHECK(irf.at(h, 0, 0) == std::pow(0.5, static_cast<double>(h)));
  const auto acc = accumulate_irf(irf);
  CHECK(acc.accumulated);
  CHECK(acc.at(1, 0, 0) == 1.5);
  CHECK(acc.at(2, 0, 0) == 1.75);
  CHECK(std::abs(acc.at(40, 0, 0) - 2.0) < 1e-3);
}

TEST_CASE("decoupled system has no spillover") {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
  r(0, 0) = 0.5;
  r(1, 1) = 0.3;
  const auto irf = compute_irf({r}, Eigen::MatrixXd::Identity(2, 2), kIdentity2, 20);
  for (Eigen::Index h = 0; h <= 20; ++h) {
    CHECK(irf.at(h, 0, 1) == 0.0);
    CHECK(irf.at(h, 1, 0) == 0.0);
  }
}

TEST_CASE("zero tensor accumulates to zero") {
  IrfTensor z;
  z.responses.assign(5, Eigen::MatrixXd::Zero(2, 2));
  const auto acc = accumulate_irf(z);
  for (const auto& r : acc.responses) CHECK(r.isZero(0.0));
}

TEST_CASE("VMA recursion equals unit-shock simulation") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index m = 1 + rep % 3;
    const int lags = 1 + (rep / 3) % 3;
    const auto coeffs = oracle::random_stable(rng, m, lags);
    const Eigen::MatrixXd b = oracle::random_lower(rng, m);
    std::vector<std::size_t> id(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < id.size(); ++k) id[k] = k;
    const auto irf = compute_irf(coeffs, b, id, 20);
    const auto sim = oracle::simulate_impulse(coeffs, b, 20);
    for (Eigen::Index h = 0; h <= 20; ++h) {
      CHECK((irf.responses[static_cast<std::size_t>(h)] - sim[static_cast<std::size_t>(h)])
                .cwiseAbs()
                .maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("ordered IRFs agree with simulation in permuted coordinates") {
  std::mt19937_64 rng(32);
  const auto coeffs = oracle::random_stable(rng, 3, 2);
  const Eigen::MatrixXd b_ordered = oracle::random_lower(rng, 3);
  const std::vector<std::size_t> ord{2, 0, 1};
  // Natural-coordinate impact: row ord[k] holds ordered row k.
  Eigen::MatrixXd b_nat(3, 3);
  for (std::size_t k = 0; k < 3; ++k) b_nat.row(static_cast<Eigen::Index>(ord[k])) = b_ordered.row(static_cast<Eigen::Index>(k));
  const auto irf = compute_irf(coeffs, b_ordered, ord, 15);
  const auto sim = oracle::simulate_impulse(coeffs, b_nat, 15);
  for (Eigen::Index h = 0; h <= 15; ++h) {
    for (std::size_t resp = 0; resp < 3; ++resp) {
      for (Eigen::Index shock = 0; shock < 3; ++shock) {
        CHECK(std::abs(irf.at(h, shock, static_cast<Eigen::Index>(resp)) -
                       sim[static_cast<std::size_t>(h)](static_cast<Eigen::Index>(ord[resp]), shock)) < 1e-10);
      }
    }
  }
}

TEST_CASE("estimated model: h=0 equals B, stable responses decay, linearity") {
  std::mt19937_64 rng(33);
  const auto coeffs = oracle::random_stable(rng, 2, 2, 0.7);
  const Eigen::MatrixXd y = oracle::simulate_var(coeffs, oracle::random_lower(rng, 2), 400, rng);
  const auto model = estimate_var(oracle::make_series("A", y), 2);
  for (const std::vector<std::size_t>& ord : {std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{1, 0}}) {
    const auto fact = structural_residuals(model, ord);
    const auto irf = compute_irf(model, fact, 20);
    CHECK(irf.responses[0] == fact.impact);
    CHECK(irf.at(0, 1, 0) == 0.0);
    double early = 0.0, late = 0.0;
    for (Eigen::Index h = 0; h <= 2; ++h) early = std::max(early, irf.responses[static_cast<std::size_t>(h)].cwiseAbs().maxCoeff());
    for (Eigen::Index h = 18; h <= 20; ++h) late = std::max(late, irf.responses[static_cast<std::size_t>(h)].cwiseAbs().maxCoeff());
    CHECK(late < early);
    const auto scaled = compute_irf(model.coefficients, 3.0 * fact.impact, ord, 20);
    for (Eigen::Index h = 0; h <= 20; ++h) {
      CHECK((scaled.responses[static_cast<std::size_t>(h)] - 3.0 * irf.responses[static_cast<std::size_t>(h)])
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("one-pp rescaling sets own impact responses to one") {
  std::mt19937_64 rng(34);
  const auto coeffs = oracle::random_stable(rng, 3, 1);
  const Eigen::MatrixXd b = oracle::random_lower(rng, 3);
  const auto irf = rescale_one_pp(compute_irf(coeffs, b, {0, 1, 2}, 10), b);
  CHECK(irf.scale == IrfScale::one_pp);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(irf.at(0, j, j) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(irf.at(0, 0, 1) == doctest::Approx(b(1, 0) / b(0, 0)).epsilon(1e-14));
}

TEST_CASE("label helpers") {
  CHECK(to_string(IrfKind::common_part) == "common");
  CHECK(to_string(IrfKind::idiosyncratic_part) == "idiosyncratic");
  CHECK(parse_irf_scale("one_pp") == IrfScale::one_pp);
  CHECK_THROWS(parse_irf_scale("weird"));
}
