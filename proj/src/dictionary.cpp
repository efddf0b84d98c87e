#include "koopcheck/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "koopcheck/error.hpp"

namespace koopcheck {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= x;
  return r;
}

// Exponent tuples of total degree `degree`, lexicographically descending.
void append_degree(int n, int degree, std::vector<std::vector<int>>& out) {
  std::vector<int> current(n, 0);
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      current[pos] = remaining;
      out.push_back(current);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[pos] = e;
      self(self, pos + 1, remaining - e);
    }
  };
  rec(rec, 0, degree);
}

std::string monomial_label(const std::vector<int>& exps) {
  std::string label;
  for (size_t k = 0; k < exps.size(); ++k) {
    if (exps[k] == 0) continue;
    if (!label.empty()) label += "*";
    label += "x" + std::to_string(k + 1);
    if (exps[k] > 1) label += "^" + std::to_string(exps[k]);
  }
  return label.empty() ? "1" : label;
}

}  // namespace

Dictionary Dictionary::monomials(int n, int dmax) {
  if (n < 1 || dmax < 1) {
    throw InvalidArgumentError("monomial dictionary requires n >= 1 and dmax >= 1");
  }
  Dictionary dict;
  dict.n_ = n;
  dict.dmax_ = dmax;
  dict.exponents_.push_back(std::vector<int>(n, 0));
  for (int d = 1; d <= dmax; ++d) append_degree(n, d, dict.exponents_);
  dict.coeffs_ = Eigen::VectorXd::Ones(static_cast<int>(dict.exponents_.size()));
  dict.finalize();
  return dict;
}

Dictionary Dictionary::from_exponents(int n, std::vector<std::vector<int>> exponents) {
  if (n < 1 || exponents.empty()) {
    throw InvalidArgumentError("dictionary requires n >= 1 and a nonempty observable list");
  }
  Dictionary dict;
  dict.n_ = n;
  dict.exponents_ = std::move(exponents);
  dict.dmax_ = 0;
  for (const auto& e : dict.exponents_) {
    if (static_cast<int>(e.size()) != n) {
      throw InvalidArgumentError("dictionary exponent tuple has wrong arity");
    }
    int total = 0;
    for (int p : e) {
      if (p < 0) throw InvalidArgumentError("dictionary exponents must be nonnegative");
      total += p;
    }
    dict.dmax_ = std::max(dict.dmax_, total);
  }
  dict.coeffs_ = Eigen::VectorXd::Ones(static_cast<int>(dict.exponents_.size()));
  dict.finalize();
  return dict;
}

void Dictionary::finalize() {
  std::set<std::vector<int>> seen;
  labels_.clear();
  labels_.reserve(exponents_.size());
  for (const auto& e : exponents_) {
    if (!seen.insert(e).second) {
      throw InvalidArgumentError("dictionary contains a duplicate observable: " +
                                 monomial_label(e));
    }
    labels_.push_back(monomial_label(e));
  }
}

Dictionary Dictionary::scaled(int i, double factor) const {
  if (i < 0 || i >= size()) {
    throw InvalidArgumentError("dictionary observable index out of range");
  }
  if (!(factor > 0.0)) {
    throw InvalidArgumentError("observable scale factor must be positive");
  }
  Dictionary copy = *this;
  copy.coeffs_(i) *= factor;
  return copy;
}

Eigen::VectorXd Dictionary::lift(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw InvalidArgumentError("lift: state has wrong dimension");
  Eigen::VectorXd z(size());
  for (int i = 0; i < size(); ++i) {
    double v = coeffs_(i);
    for (int k = 0; k < n_; ++k) v *= ipow(x(k), exponents_[i][k]);
    z(i) = v;
  }
  return z;
}

Eigen::VectorXd Dictionary::gradient(int i, const Eigen::VectorXd& x) const {
  if (i < 0 || i >= size()) {
    throw InvalidArgumentError("dictionary observable index out of range");
  }
  const auto& e = exponents_[i];
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  for (int k = 0; k < n_; ++k) {
    if (e[k] == 0) continue;
    double v = coeffs_(i) * e[k] * ipow(x(k), e[k] - 1);
    for (int j = 0; j < n_; ++j) {
      if (j != k) v *= ipow(x(j), e[j]);
    }
    g(k) = v;
  }
  return g;
}

Eigen::MatrixXd Dictionary::lift_jacobian(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw InvalidArgumentError("lift_jacobian: state has wrong dimension");
  Eigen::MatrixXd jac(size(), n_);
  for (int i = 0; i < size(); ++i) jac.row(i) = gradient(i, x).transpose();
  return jac;
}

Eigen::MatrixXd Dictionary::hessian(int i, const Eigen::VectorXd& x) const {
  if (i < 0 || i >= size()) {
    throw InvalidArgumentError("dictionary observable index out of range");
  }
  const auto& e = exponents_[i];
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, n_);
  for (int k = 0; k < n_; ++k) {
    for (int l = k; l < n_; ++l) {
      double coeff;
      if (k == l) {
        if (e[k] < 2) continue;
        coeff = static_cast<double>(e[k]) * (e[k] - 1);
      } else {
        if (e[k] < 1 || e[l] < 1) continue;
        coeff = static_cast<double>(e[k]) * e[l];
      }
      double v = coeffs_(i) * coeff;
      for (int j = 0; j < n_; ++j) {
        int p = e[j];
        if (j == k) p -= (k == l) ? 2 : 1;
        if (j == l && k != l) p -= 1;
        v *= ipow(x(j), p);
      }
      h(k, l) = v;
      h(l, k) = v;
    }
  }
  return h;
}

Eigen::MatrixXd Dictionary::coordinate_matrix() const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n_, size());
  for (int k = 0; k < n_; ++k) {
    std::vector<int> unit(n_, 0);
    unit[k] = 1;
    const auto it = std::find(exponents_.begin(), exponents_.end(), unit);
    if (it == exponents_.end()) {
      throw AssumptionViolatedError("dictionary is missing the coordinate map x" +
                                    std::to_string(k + 1));
    }
    const int pos = static_cast<int>(it - exponents_.begin());
    c(k, pos) = 1.0 / coeffs_(pos);
  }
  return c;
}

bool Dictionary::same_layout(const Dictionary& other) const {
  return n_ == other.n_ && exponents_ == other.exponents_ && coeffs_ == other.coeffs_;
}

nlohmann::json Dictionary::to_json() const {
  nlohmann::json j{{"n", n_}, {"dmax", dmax_}, {"exponents", exponents_}};
  if ((coeffs_.array() != 1.0).any()) {
    j["coeffs"] = std::vector<double>(coeffs_.data(), coeffs_.data() + coeffs_.size());
  }
  return j;
}

Dictionary Dictionary::from_json(const nlohmann::json& j) {
  Dictionary dict = from_exponents(j.at("n").get<int>(),
                                   j.at("exponents").get<std::vector<std::vector<int>>>());
  if (j.contains("coeffs")) {
    const auto coeffs = j.at("coeffs").get<std::vector<double>>();
    if (static_cast<int>(coeffs.size()) != dict.size()) {
      throw InvalidArgumentError("dictionary coeffs have wrong length");
    }
    for (int i = 0; i < dict.size(); ++i) dict.coeffs_(i) = coeffs[i];
  }
  return dict;
}

}  // namespace koopcheck
