#pragma once

// Independent reference computations used by the tests. None of these call
// the library's numerics; they are slow, direct and easy to audit.

#include "psvar/panel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

namespace oracle {

/// Solves A x = b for each column of b by Gaussian elimination with partial
/// pivoting.
inline Eigen::MatrixXd gauss_solve(Eigen::MatrixXd a, Eigen::MatrixXd b) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    a.row(c).swap(a.row(piv));
    b.row(c).swap(b.row(piv));
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (Eigen::Index k = c; k < n; ++k) a(r, k) -= f * a(c, k);
      for (Eigen::Index k = 0; k < b.cols(); ++k) b(r, k) -= f * b(c, k);
    }
  }
  Eigen::MatrixXd x(n, b.cols());
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    for (Eigen::Index k = 0; k < b.cols(); ++k) {
      double s = b(r, k);
      for (Eigen::Index j = r + 1; j < n; ++j) s -= a(r, j) * x(j, k);
      x(r, k) = s / a(r, r);
    }
  }
  return x;
}

/// OLS through the normal equations, coefficients returned as J matrices
/// R_j (M x M) for a no-intercept VAR on `data`.
inline std::vector<Eigen::MatrixXd> normal_equations_var(const Eigen::MatrixXd& data, int lag) {
  const Eigen::Index m = data.cols();
  const Eigen::Index t_eff = data.rows() - lag;
  Eigen::MatrixXd x(t_eff, m * lag);
  Eigen::MatrixXd y(t_eff, m);
  for (Eigen::Index t = 0; t < t_eff; ++t) {
    y.row(t) = data.row(t + lag);
    for (int j = 1; j <= lag; ++j) {
      for (Eigen::Index c = 0; c < m; ++c) x(t, (j - 1) * m + c) = data(t + lag - j, c);
    }
  }
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(m * lag, m * lag);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(m * lag, m);
  for (Eigen::Index t = 0; t < t_eff; ++t) {
    for (Eigen::Index a = 0; a < m * lag; ++a) {
      for (Eigen::Index b = 0; b < m * lag; ++b) xtx(a, b) += x(t, a) * x(t, b);
      for (Eigen::Index b = 0; b < m; ++b) xty(a, b) += x(t, a) * y(t, b);
    }
  }
  const Eigen::MatrixXd beta = gauss_solve(xtx, xty);  // (MJ) x M
  std::vector<Eigen::MatrixXd> out;
  for (int j = 0; j < lag; ++j) out.push_back(beta.middleRows(j * m, m).transpose());
  return out;
}

/// Characteristic polynomial coefficients c_0..c_n (c_n = 1) of a square
/// matrix by the Faddeev-LeVerrier recursion.
inline std::vector<double> char_poly(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Eigen::MatrixXd mk = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = a * mk + c[static_cast<std::size_t>(n - k + 1)] * Eigen::MatrixXd::Identity(n, n);
    c[static_cast<std::size_t>(n - k)] = -(a * mk).trace() / static_cast<double>(k);
  }
  return c;
}

/// Roots of a monic polynomial by Durand-Kerner iteration.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
  const std::size_t n = c.size() - 1;
  std::vector<std::complex<double>> z(n);
  const std::complex<double> seed(0.4, 0.9);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(seed, static_cast<double>(i));
  auto eval = [&](std::complex<double> x) {
    std::complex<double> v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
    return v;
  };
  for (int it = 0; it < 2000; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> den = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) den *= z[i] - z[j];
      }
      const auto step = eval(z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15) break;
  }
  return z;
}

inline double max_root_modulus(const std::vector<Eigen::MatrixXd>& coeffs) {
  const Eigen::Index m = coeffs.front().rows();
  const auto lags = static_cast<Eigen::Index>(coeffs.size());
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m * lags, m * lags);
  for (Eigen::Index j = 0; j < lags; ++j) comp.block(0, j * m, m, m) = coeffs[static_cast<std::size_t>(j)];
  if (lags > 1) comp.bottomLeftCorner(m * (lags - 1), m * (lags - 1)).setIdentity();
  double best = 0.0;
  for (const auto& r : poly_roots(char_poly(comp))) best = std::max(best, std::abs(r));
  return best;
}

/// Response path of every variable to a one-time structural impulse: feed
/// u_0 = B e_j, zero afterwards, iterate the VAR. Returns [h](response, shock)
/// in natural coordinates.
inline std::vector<Eigen::MatrixXd> simulate_impulse(const std::vector<Eigen::MatrixXd>& coeffs,
                                                     const Eigen::MatrixXd& b, int horizon) {
  const Eigen::Index m = b.rows();
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(horizon + 1), Eigen::MatrixXd(m, m));
  for (Eigen::Index shock = 0; shock < m; ++shock) {
    std::vector<Eigen::VectorXd> path;
    for (int h = 0; h <= horizon; ++h) {
      Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
      if (h == 0) y = b.col(shock);
      for (std::size_t j = 1; j <= coeffs.size(); ++j) {
        if (static_cast<int>(j) <= h) y += coeffs[j - 1] * path[static_cast<std::size_t>(h) - j];
      }
      path.push_back(y);
      out[static_cast<std::size_t>(h)].col(shock) = y;
    }
  }
  return out;
}

/// Quantile with linear interpolation between order statistics, found by
/// counting ranks instead of sorting.
inline double rank_quantile(const std::vector<double>& v, double p) {
  const std::size_t n = v.size();
  auto kth = [&](std::size_t k) {
    for (double x : v) {
      std::size_t below = 0, equal = 0;
      for (double y : v) {
        if (y < x) ++below;
        if (y == x) ++equal;
      }
      if (below <= k && k < below + equal) return x;
    }
    return v.front();
  };
  const double pos = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, n - 1);
  return kth(lo) + (pos - static_cast<double>(lo)) * (kth(hi) - kth(lo));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  long double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  const auto n = static_cast<long double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    saa += static_cast<long double>(a[i]) * a[i];
    sbb += static_cast<long double>(b[i]) * b[i];
    sab += static_cast<long double>(a[i]) * b[i];
  }
  const long double cov = sab - sa * sb / n;
  return static_cast<double>(cov / std::sqrt((saa - sa * sa / n) * (sbb - sb * sb / n)));
}

/// Sample covariance with divisor n of the columns of x (rows = observations).
inline Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean;
  return c.transpose() * c / static_cast<double>(x.rows());
}

/// VAR path from zero initial conditions with Gaussian shocks u = B e.
inline Eigen::MatrixXd simulate_var(const std::vector<Eigen::MatrixXd>& coeffs,
                                    const Eigen::MatrixXd& b, Eigen::Index periods,
                                    std::mt19937_64& rng, Eigen::Index burn_in = 200) {
  const Eigen::Index m = b.rows();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(burn_in + periods, m);
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    Eigen::VectorXd e(m);
    for (Eigen::Index j = 0; j < m; ++j) e(j) = normal(rng);
    Eigen::VectorXd v = b * e;
    for (std::size_t j = 1; j <= coeffs.size(); ++j) {
      if (t >= static_cast<Eigen::Index>(j)) v += coeffs[j - 1] * y.row(t - static_cast<Eigen::Index>(j)).transpose();
    }
    y.row(t) = v.transpose();
  }
  return y.bottomRows(periods);
}

/// Random lag polynomial rescaled until its largest root is below `cap`.
inline std::vector<Eigen::MatrixXd> random_stable(std::mt19937_64& rng, Eigen::Index m, int lags,
                                                  double cap = 0.9) {
  std::uniform_real_distribution<double> unif(-0.6, 0.6);
  std::vector<Eigen::MatrixXd> coeffs;
  for (int j = 0; j < lags; ++j) {
    Eigen::MatrixXd r(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index c = 0; c < m; ++c) r(a, c) = unif(rng) / (j + 1);
    }
    coeffs.push_back(r);
  }
  while (max_root_modulus(coeffs) >= cap) {
    for (int j = 0; j < lags; ++j) coeffs[static_cast<std::size_t>(j)] *= std::pow(0.8, j + 1);
  }
  return coeffs;
}

inline Eigen::MatrixXd random_lower(std::mt19937_64& rng, Eigen::Index m) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) b(i, j) = unif(rng);
    b(i, i) = 0.5 + std::abs(unif(rng));
  }
  return b;
}

inline psvar::CountrySeries make_series(const std::string& id, const Eigen::MatrixXd& values,
                                        int first_year = 2000) {
  psvar::CountrySeries s;
  s.country_id = id;
  s.first_year = first_year;
  for (Eigen::Index j = 0; j < values.cols(); ++j) s.variable_names.push_back("y" + std::to_string(j + 1));
  s.values = values;
  return s;
}

}  // namespace oracle
