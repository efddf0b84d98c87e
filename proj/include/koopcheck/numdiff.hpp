#pragma once

#include <Eigen/Core>
#include <functional>

namespace koopcheck {

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline constexpr double kFirstOrderStep = 1.4901161193847656e-08;  // sqrt(eps)
inline constexpr double kSecondOrderStep = 6.0554544523933395e-06;  // cbrt(eps)

// Central-difference Jacobian with per-coordinate step
// h_k = step_scale * max(1, |x_k|). Divides by the realized step
// (xp_k - xm_k), which keeps affine components exact to rounding.
// Throws EvaluationError on non-finite field values.
Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x,
                            double step_scale = kFirstOrderStep);

}  // namespace koopcheck
