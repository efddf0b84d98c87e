#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include <json.hpp>

namespace koopcheck {

/// Ordered monomial observable dictionary over R^n.
///
/// Ordering is graded lexicographic: the constant observable first, then the
/// n coordinate maps, then higher total degrees; within a degree, exponent
/// tuples are enumerated lexicographically descending. The ordering is
/// deterministic for fixed (n, dmax), which keeps the coordinate-recovery
/// matrix a fixed selector and serialized outputs reproducible.
class Dictionary {
 public:
  /// Empty placeholder; every usable dictionary comes from a factory below.
  Dictionary() = default;

  /// All monomials of total degree 0..dmax; size() = C(n + dmax, dmax).
  /// Requires n >= 1 and dmax >= 1 so the coordinate maps are present.
  static Dictionary monomials(int n, int dmax);

  /// Explicit observable subset (e.g. an invariant subspace). Duplicate
  /// exponent tuples are rejected.
  static Dictionary from_exponents(int n, std::vector<std::vector<int>> exponents);

  int state_dim() const { return n_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  int max_degree() const { return dmax_; }
  const std::vector<std::vector<int>>& exponents() const { return exponents_; }
  const std::string& label(int i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }
  double coefficient(int i) const { return coeffs_(i); }

  /// Copy with observable i multiplied by `factor` (> 0).
  Dictionary scaled(int i, double factor) const;

  /// z(x) = (psi_1(x), ..., psi_N(x)).
  Eigen::VectorXd lift(const Eigen::VectorXd& x) const;

  /// N x n matrix whose row i is the gradient of psi_i.
  Eigen::MatrixXd lift_jacobian(const Eigen::VectorXd& x) const;

  /// Gradient of a single observable.
  Eigen::VectorXd gradient(int i, const Eigen::VectorXd& x) const;

  /// Exact symmetric Hessian of psi_i, from the exponents.
  Eigen::MatrixXd hessian(int i, const Eigen::VectorXd& x) const;

  /// Selector C in R^{n x N} with C * lift(x) = x. Throws
  /// AssumptionViolatedError when some coordinate map is missing.
  Eigen::MatrixXd coordinate_matrix() const;

  /// True when n, exponents, and coefficients all match.
  bool same_layout(const Dictionary& other) const;

  nlohmann::json to_json() const;
  static Dictionary from_json(const nlohmann::json& j);

 private:
  void finalize();  // validates, builds labels

  int n_ = 0;
  int dmax_ = 0;
  std::vector<std::vector<int>> exponents_;
  std::vector<std::string> labels_;
  Eigen::VectorXd coeffs_;
};

}  // namespace koopcheck
