#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "koopcheck/box.hpp"
#include "koopcheck/dictionary.hpp"
#include "koopcheck/systems.hpp"

namespace koopcheck {

/// Sampled sup-norms of the curvature quantities that obstruct an exact LTI
/// lifted model. All norms are spectral norms; sups are maxima over the
/// sample set, which is exact whenever the underlying quantity is constant
/// in x (true for every built-in with a degree <= 2 dictionary).
struct ConditionReport {
  std::vector<std::string> labels;        // observable labels
  Eigen::VectorXd observable_curvature;   // per observable: sup ||Hpsi_i G||
  Eigen::VectorXd drift_curvature;        // per component:  sup ||Hf_j G||
  Eigen::VectorXd coupling_curvature;     // per observable: sup ||Hpsi_i Jf G||
  Eigen::VectorXd total_curvature;        // per observable: sup of the
                                          // assembled generator curvature
  int sample_count = 0;
  Box box;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

/// (G^+, P) with G^+ = (G^T G)^{-1} G^T and P = I - G G^+, computed via a
/// rank-revealing QR. Requires full column rank.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pseudo_projector(const Eigen::MatrixXd& G);

/// Curvature of x -> <grad psi, f(x) + G u> along the input directions,
/// assembled as  sum_k dpsi/dx_k * Hf_k * G + Hpsi * Jf * G  with
/// psi = a^T z. The assembly equals the true second derivative times G
/// whenever Hpsi G vanishes identically.
Eigen::MatrixXd generator_curvature(const ControlAffineSystem& sys, const Dictionary& dict,
                                    const Eigen::VectorXd& a, const Eigen::VectorXd& x);
Eigen::MatrixXd generator_curvature(const ControlAffineSystem& sys, const Dictionary& dict,
                                    int observable, const Eigen::VectorXd& x);

/// Sampled curvature sup-norms over `count` uniform points of `box`.
/// Deterministic for fixed seed; estimates are monotone in `count` for a
/// fixed seed (prefix sampling).
ConditionReport curvature_conditions(const ControlAffineSystem& sys, const Dictionary& dict,
                                     const Box& box, int count, std::uint64_t seed);

/// Continuous-time lifted model  zdot ~= A z + B u  with the input matrix
/// anchored at a reference state: B = lift_jacobian(anchor) * G exactly.
struct GeneratorModel {
  Eigen::MatrixXd drift_matrix;  // A, N x N
  Eigen::MatrixXd input_matrix;  // B, N x m
  Eigen::VectorXd anchor;
  double max_residual = 0.0;   // autonomous fit, max |.| entry
  double mean_residual = 0.0;  // autonomous fit, mean |.| entry
  // Per observable: max autonomous residual, and the worst deviation of the
  // true input coupling grad psi_i(x)^T G from the anchored row of B.
  Eigen::VectorXd residual_per_observable;
  Eigen::VectorXd input_residual_per_observable;
};

/// Least-squares fit of A over the given states (rows of `states`):
/// minimize sum_x ||lift_jacobian(x) f(x) - A lift(x)||^2 via SVD, with
/// Tikhonov weight `ridge` (0 = plain minimum-norm least squares).
/// Requires at least size() samples. Throws IllConditionedError when the
/// lifted data matrix is degenerate.
GeneratorModel generator_fit(const ControlAffineSystem& sys, const Dictionary& dict,
                             const Eigen::MatrixXd& states, const Eigen::VectorXd& anchor,
                             double ridge = 0.0);

/// Two sides of the anchored-input-matrix error bound for psi = a^T z:
///   |<grad psi, f + G u> - a^T (A z + B u)|
///     <= max_x |<grad psi, f> - a^T A z| + diam(X) sup ||Hpsi G|| ||u||.
struct BiasBound {
  double lhs_max = 0.0;
  double rhs = 0.0;
  double autonomous_max = 0.0;
  double input_term = 0.0;
  double hessian_sup = 0.0;  // sampled sup ||Hpsi G||
  // ||B_alt - B_anchored|| when an alternative input matrix was supplied.
  std::optional<double> input_matrix_gap;
};

/// Evaluates both sides over the given sample states. The model anchor must
/// lie inside `box`. Supplying `alt_input_matrix` additionally reports its
/// spectral distance from the anchored B.
BiasBound anchored_bias_bound(const ControlAffineSystem& sys, const Dictionary& dict,
                              const Eigen::VectorXd& a, const GeneratorModel& model,
                              const Box& box, const Eigen::VectorXd& u,
                              const Eigen::MatrixXd& states,
                              const Eigen::MatrixXd* alt_input_matrix = nullptr);

/// Worst-case bias bound for observables that are affine along the input
/// directions:  diam(X)^2 ||G^+|| sup_x ||generator_curvature(psi_i, x)||.
/// Throws AssumptionViolatedError when ||Hpsi_i G|| exceeds
/// `restriction_tol` at any sample.
double restricted_bias_bound(const ControlAffineSystem& sys, const Dictionary& dict,
                             int observable, const Box& box, const Eigen::MatrixXd& states,
                             double restriction_tol = 1e-10);

/// Largest singular value; 0 for an empty matrix.
double spectral_norm(const Eigen::MatrixXd& a);

}  // namespace koopcheck
