#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "koopcheck/bias.hpp"
#include "koopcheck/edmdc.hpp"
#include "koopcheck/excitability.hpp"

namespace koopcheck {

/// One run's full configuration. Echoed verbatim into every output artifact
/// so any result is reproducible from its own header.
struct RunConfig {
  std::string system = "slow-manifold-x2";
  std::string system_file;  // affine system JSON ({"F":.., "G":.., "d":..})
  int degree = 2;
  std::vector<int> degrees;  // sweep only
  int samples = 10000;
  std::uint64_t seed = 42;
  double dt = 0.01;
  // Box bounds; size 1 broadcasts over the system dimension.
  std::vector<double> state_lo{-1.0}, state_hi{1.0};
  std::vector<double> input_lo{-0.1}, input_hi{0.1};
  std::vector<double> x0;  // anchor; empty = state-box center
  int larc_depth = 3;
  double rank_tol = 1e-8;        // excitability acceptance
  double restriction_tol = 1e-10;
  double ridge = kAutoRidge;
  std::string out;
  std::string format = "csv";  // sweep output: csv | json

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

/// Resolves the configured system: a built-in name, "affine-random" (seeded
/// random controllable affine system), or "affine" read from system_file.
ControlAffineSystem resolve_system(const RunConfig& config);

Box resolve_state_box(const RunConfig& config, int n);
Box resolve_input_box(const RunConfig& config, int m);
Eigen::VectorXd resolve_anchor(const RunConfig& config, const Box& state_box);

struct BoundRow {
  std::string label;
  double lhs_max = 0.0;
  double rhs = 0.0;
};

struct DiagnosticsReport {
  RunConfig config;
  std::string system_name;
  ExcitabilityCertificate certificate;
  int kalman_rank_at_anchor = 0;
  int larc_dim = 0;
  int larc_depth = 0;
  ConditionReport conditions;
  // sup ||d^2 f_j/dx^2|| per component: zero iff the drift is affine on the
  // sampled box.
  Eigen::VectorXd drift_nonlinearity;
  std::vector<BoundRow> anchored_bounds;  // per observable, u = 0.1 per channel
  // Worst-case bias bound per observable; empty where the observable has
  // curvature along an input direction.
  std::vector<std::optional<double>> restricted_bounds;
  std::string verdict;

  nlohmann::json to_json() const;
  std::string table() const;
};

/// Pure function of the numeric findings, re-derivable from a serialized
/// report.
std::string derive_verdict(bool excitable, double max_drift_nonlinearity,
                           double affine_tol = 1e-8);

DiagnosticsReport run_diagnostics(const RunConfig& config);

/// CSV with a `#` config-echo line followed by the exact header
/// `Degree,Training Error,Autonomous Part Error,Control Part Error`.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                     const RunConfig& config);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows, const RunConfig& config);

/// Shortest round-trip decimal form of a double (%.17g).
std::string format_double(double v);

}  // namespace koopcheck
