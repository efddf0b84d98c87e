#pragma once

// Test-only oracles and generators. Everything here stays independent of the
// implementation paths it is used to check: the affine-flow oracle goes
// through the matrix exponential, and the curvature oracle differentiates
// scalars numerically instead of assembling derivative products.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "koopcheck/dictionary.hpp"
#include "koopcheck/rng.hpp"
#include "koopcheck/systems.hpp"

namespace koopcheck::testing {

// Stateful convenience wrapper around the counter generator.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * rng_.uniform01(counter_++);
  }
  Eigen::VectorXd vector(int n, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
  Eigen::MatrixXd matrix(int r, int c, double lo = -1.0, double hi = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
    }
    return m;
  }
  int integer(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform(0.0, 1.0) * (hi - lo + 1)) % (hi - lo + 1);
  }

 private:
  CounterRng rng_;
  std::uint64_t counter_ = 0;
};

inline Eigen::MatrixXd random_full_rank(TestRng& rng, int rows, int cols) {
  for (;;) {
    Eigen::MatrixXd g = rng.matrix(rows, cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 1e-3 * sv(0)) return g;
  }
}

// Exact one-step map of xdot = F x + c: x(dt) = exp(F dt) x(0) + S c with
// S = int_0^dt exp(F s) ds, both read off exp([[F, I], [0, 0]] dt).
struct AffineFlow {
  Eigen::MatrixXd state_transition;  // exp(F dt)
  Eigen::MatrixXd forced_response;   // S
};

inline AffineFlow exact_affine_flow(const Eigen::MatrixXd& F, double dt) {
  const auto n = F.rows();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = F;
  block.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd e = (block * dt).exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

// Central-difference Hessian of a scalar function, step eps^{1/4}.
inline Eigen::MatrixXd fd_hessian_scalar(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  const double scale = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  Eigen::VectorXd h(n);
  for (int k = 0; k < n; ++k) h(k) = scale * std::max(1.0, std::abs(x(k)));
  Eigen::MatrixXd hess(n, n);
  const double f0 = f(x);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp(k) += h(k);
    xm(k) -= h(k);
    hess(k, k) = (f(xp) - 2.0 * f0 + f(xm)) / (h(k) * h(k));
    for (int l = k + 1; l < n; ++l) {
      Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(k) += h(k); xpp(l) += h(l);
      xpm(k) += h(k); xpm(l) -= h(l);
      xmp(k) -= h(k); xmp(l) += h(l);
      xmm(k) -= h(k); xmm(l) -= h(l);
      hess(k, l) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h(k) * h(l));
      hess(l, k) = hess(k, l);
    }
  }
  return hess;
}

// Random polynomial drift f(x) = C * lift(x) with the analytic Jacobian
// C * lift_jacobian(x).
inline ControlAffineSystem random_polynomial_system(TestRng& rng, int n, int m, int degree,
                                                    double coeff_scale = 0.5) {
  const Dictionary basis = Dictionary::monomials(n, degree);
  const Eigen::MatrixXd coeffs = coeff_scale * rng.matrix(n, basis.size());
  const Eigen::MatrixXd g = random_full_rank(rng, n, m);
  auto drift = [basis, coeffs](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return coeffs * basis.lift(x);
  };
  auto jac = [basis, coeffs](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    return coeffs * basis.lift_jacobian(x);
  };
  return ControlAffineSystem("poly", drift, g, jac);
}

// Sparse polynomial arithmetic over exponent tuples, used to expand
// observables of the form phi(P x) into monomial coordinates.
using Poly = std::map<std::vector<int>, double>;

inline Poly poly_constant(int n, double c) {
  return {{std::vector<int>(n, 0), c}};
}

inline Poly poly_linear(const Eigen::VectorXd& coeffs) {
  Poly p;
  const int n = static_cast<int>(coeffs.size());
  for (int k = 0; k < n; ++k) {
    if (coeffs(k) == 0.0) continue;
    std::vector<int> e(n, 0);
    e[k] = 1;
    p[e] = coeffs(k);
  }
  return p;
}

inline Poly poly_mul(const Poly& a, const Poly& b, int n) {
  Poly out;
  for (const auto& [ea, ca] : a) {
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(n);
      for (int k = 0; k < n; ++k) e[k] = ea[k] + eb[k];
      out[e] += ca * cb;
    }
  }
  return out;
}

inline void poly_add(Poly& a, const Poly& b, double scale = 1.0) {
  for (const auto& [e, c] : b) a[e] += scale * c;
}

// Coefficient vector of `p` over the given monomial dictionary. Exponents
// outside the dictionary must not occur.
inline Eigen::VectorXd poly_to_coefficients(const Poly& p, const Dictionary& dict) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(dict.size());
  for (const auto& [e, c] : p) {
    bool found = false;
    for (int i = 0; i < dict.size(); ++i) {
      if (dict.exponents()[i] == e) {
        a(i) = c;
        found = true;
        break;
      }
    }
    if (!found && c != 0.0) throw std::logic_error("monomial outside dictionary");
  }
  return a;
}

// Random polynomial observable psi = alpha0 + alpha^T x + phi(P x) with
// P = I - G G^+, so the Hessian of psi along the columns of G vanishes
// identically. Returned as coefficients over `dict`.
inline Eigen::VectorXd random_restricted_observable(TestRng& rng, const Eigen::MatrixXd& g,
                                                    const Dictionary& dict) {
  const int n = static_cast<int>(g.rows());
  const Eigen::MatrixXd gdag =
      g.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - g * gdag;

  Poly psi = poly_constant(n, rng.uniform(-1.0, 1.0));
  poly_add(psi, poly_linear(rng.vector(n)));

  // phi(Px): a few random products of up to dmax projected linear forms.
  for (int term = 0; term < 4; ++term) {
    const int factors = 2 + (term % std::max(1, dict.max_degree() - 1));
    Poly prod = poly_constant(n, rng.uniform(-0.5, 0.5));
    for (int k = 0; k < factors && k < dict.max_degree(); ++k) {
      prod = poly_mul(prod, poly_linear(proj.transpose() * rng.vector(n)), n);
    }
    poly_add(psi, prod);
  }
  return poly_to_coefficients(psi, dict);
}

}  // namespace koopcheck::testing
