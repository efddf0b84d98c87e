#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "koopcheck/box.hpp"
#include "koopcheck/dictionary.hpp"
#include "koopcheck/systems.hpp"

namespace koopcheck {

/// Negative ridge selects the default Tikhonov weight 1e-10 * sigma_max^2.
inline constexpr double kAutoRidge = -1.0;

struct SampleSet {
  Eigen::MatrixXd states;  // count x n
  Eigen::MatrixXd inputs;  // count x m
  std::uint64_t seed = 0;
  Box state_box;
  Box input_box;
};

/// I.i.d. uniform samples from the product box. Sample s consumes counters
/// [s*(n+m), (s+1)*(n+m)) of the seeded counter stream: states first, then
/// inputs, so prefixes agree across different counts.
SampleSet sample_uniform(const Box& state_box, const Box& input_box, int count,
                         std::uint64_t seed);

/// One-step transition data: the controlled successor under zero-order-hold
/// input and the paired autonomous successor from the same state.
struct TransitionTriples {
  Eigen::MatrixXd states;           // x,          count x n
  Eigen::MatrixXd inputs;           // u,          count x m
  Eigen::MatrixXd next_controlled;  // x+ under u, count x n
  Eigen::MatrixXd next_autonomous;  // x+ under 0, count x n
  double dt = 0.0;
};

TransitionTriples generate_triples(const ControlAffineSystem& sys, const SampleSet& samples,
                                   double dt);

/// Discrete-time lifted model  z+ ~= A z + B u  fitted by least squares.
struct EdmdcModel {
  Eigen::MatrixXd A;  // N x N
  Eigen::MatrixXd B;  // N x m
  double dt = 0.0;
  Dictionary dictionary;
  Eigen::VectorXd scaling;  // mean |psi_i| over training data, all > 0
  double condition_number = 0.0;
  double ridge_used = 0.0;
  double training_residual = 0.0;  // max scaled combined residual

  nlohmann::json to_json() const;
};

/// Stacks Z = [lift(x)], Z+ = [lift(x+)], U = [u] and solves
/// min ||Z+ - A Z - B U||_F via an SVD pseudoinverse of the stacked
/// regressor [Z; U] with Tikhonov weight `ridge` (kAutoRidge selects
/// 1e-10 * sigma_max^2). Requires at least N + m samples; throws
/// IllConditionedError when the regressor is rank deficient and ridge = 0.
EdmdcModel fit_edmdc(const Dictionary& dict, const TransitionTriples& triples,
                     double ridge = kAutoRidge);

/// Mean over samples of the per-sample max scaled residual, for the
/// combined, autonomous, and input-dependent residuals. Per sample:
///   r_combined = lift(x+_u) - A z - B u
///   r_autonomous = lift(x+_0) - A z
///   r_input = (lift(x+_u) - lift(x+_0)) - B u
/// so r_combined = r_autonomous + r_input identically. Residuals are scaled
/// componentwise by the model's scaling vector before the max.
struct ErrorTriple {
  double combined = 0.0;
  double autonomous = 0.0;
  double input_dependent = 0.0;
};

ErrorTriple error_decomposition(const EdmdcModel& model, const Dictionary& dict,
                                const TransitionTriples& triples);

struct SweepRow {
  int degree = 0;
  ErrorTriple errors;
};

/// Fits and decomposes errors for each dictionary degree on one shared
/// sample set (fixed seed isolates the dictionary effect).
std::vector<SweepRow> degree_sweep(const ControlAffineSystem& sys,
                                   const std::vector<int>& degrees, int count,
                                   std::uint64_t seed, double dt, const Box& state_box,
                                   const Box& input_box, double ridge = kAutoRidge);

}  // namespace koopcheck
