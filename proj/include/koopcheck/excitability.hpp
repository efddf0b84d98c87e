#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "koopcheck/box.hpp"
#include "koopcheck/numdiff.hpp"
#include "koopcheck/systems.hpp"

namespace koopcheck {

/// How a basis column was produced: column `column` of the basis equals
/// jacobian(point) * basis.col(parent), with parent < column.
struct BasisWitness {
  int column = 0;
  int parent = 0;
  Eigen::VectorXd point;
};

/// Result of the directional-excitability search. The first input_dim
/// columns of `basis` are the columns of G; every later column carries a
/// witness and is replayable from it bit-for-bit.
struct ExcitabilityCertificate {
  Eigen::MatrixXd basis;  // n x rank
  int rank = 0;
  bool excitable = false;  // rank == n
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::vector<BasisWitness> witnesses;

  nlohmann::json to_json() const;
};

/// Greedy basis construction: start from the columns of G, repeatedly draw
/// uniform points x from `box` and accept any Jacobian image J(x) * v of a
/// current column v whose component orthogonal to the current span exceeds
/// tol * ||candidate||. Stops at rank n or after `budget` consecutive
/// rejected sampling rounds (budget <= 0 selects 100 * n). Deterministic
/// for fixed seed. A non-excitable verdict means no witness was found
/// inside the box, not a proof of non-excitability.
ExcitabilityCertificate excitability_basis(const ControlAffineSystem& sys, const Box& box,
                                           std::uint64_t seed, double tol = 1e-8,
                                           int budget = 0);

/// Numerical rank of [G, F G, ..., F^{n-1} G] via SVD with threshold
/// tol * sigma_max.
int kalman_rank(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G, double tol = 1e-10);

/// [a, b](x) = db/dx(x) a(x) - da/dx(x) b(x), with central finite-difference
/// Jacobians of step scale `step_scale`.
Eigen::VectorXd lie_bracket(const VectorField& a, const VectorField& b,
                            const Eigen::VectorXd& x,
                            double step_scale = kFirstOrderStep);

/// Dimension of the span at x0 of all iterated brackets of the drift and the
/// input columns up to `max_depth` nestings (depth 0 contributes f(x0) and
/// the columns of G). Bracket values with norm below an absolute floor are
/// kept as fields for deeper bracketing but contribute no rank. The nesting
/// depth is capped at 4: nested numerical differentiation loses roughly half
/// the significant digits per level. Throws DepthLimitError beyond the cap.
int larc_dimension(const ControlAffineSystem& sys, const Eigen::VectorXd& x0, int max_depth,
                   double tol = 1e-6);

}  // namespace koopcheck
