#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "koopcheck/box.hpp"

namespace koopcheck {

/// Control-affine dynamics  xdot = f(x) + G u  with constant input matrix G.
///
/// Immutable after construction and safe to share across threads; all
/// evaluation methods are pure functions of their arguments.
class ControlAffineSystem {
 public:
  using DriftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  /// Throws InvalidSystemError unless 1 <= m <= n and G has full column
  /// rank (sigma_min > 1e-10 * sigma_max).
  ControlAffineSystem(std::string name, DriftFn drift, Eigen::MatrixXd input_matrix,
                      std::optional<JacobianFn> jacobian = std::nullopt);

  const std::string& name() const { return name_; }
  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  const Eigen::MatrixXd& input_matrix() const { return input_matrix_; }
  bool has_analytic_jacobian() const { return jacobian_.has_value(); }

  /// f(x). Throws EvaluationError on non-finite values.
  Eigen::VectorXd drift(const Eigen::VectorXd& x) const;

  /// df/dx: the analytic Jacobian when supplied, otherwise central finite
  /// differences with step sqrt(eps) * max(1, |x_k|) per coordinate.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

  /// d^2 f_i / dx^2 (0-based component), via central differences of row i
  /// of the Jacobian with step cbrt(eps) * max(1, |x_k|), symmetrized as
  /// (H + H^T)/2.
  Eigen::MatrixXd drift_hessian(int component, const Eigen::VectorXd& x) const;

  /// f(x) + G u.
  Eigen::VectorXd rhs(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  /// One classical fourth-order Runge-Kutta step with the input held
  /// constant (zero-order hold). Requires dt > 0.
  Eigen::VectorXd rk4_step(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           double dt) const;

 private:
  std::string name_;
  DriftFn drift_;
  Eigen::MatrixXd input_matrix_;
  std::optional<JacobianFn> jacobian_;
  int n_ = 0;
  int m_ = 0;
};

/// Benchmark systems, by stable identifier:
///   slow-manifold-x1: f(x) = (x1 - x2^2, x2), G = (1, 0)^T
///   slow-manifold-x2: same drift,             G = (0, 1)^T
///   triple-chain:     f(x) = (x2^2, x3, 0),   G = (0, 0, 1)^T
/// All carry analytic Jacobians. Throws NotFoundError for other names.
ControlAffineSystem make_builtin(const std::string& name);

/// xdot = F x + d + G u with the constant Jacobian F.
ControlAffineSystem make_affine_system(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                                       const Eigen::VectorXd& d);

/// Max relative deviation between the analytic Jacobian and central finite
/// differences over `count` uniform points of `box`.
double jacobian_deviation(const ControlAffineSystem& sys, const Box& box, int count,
                          std::uint64_t seed);

}  // namespace koopcheck
