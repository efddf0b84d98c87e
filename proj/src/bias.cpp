#include "koopcheck/bias.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "koopcheck/error.hpp"

namespace koopcheck {

namespace {
constexpr double kInputRankTol = 1e-10;
constexpr double kDegenerateSigma = 1e-12;
}  // namespace

double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  if (a.cols() == 1) return a.col(0).norm();
  if (a.rows() == 1) return a.row(0).norm();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()(0);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> pseudo_projector(const Eigen::MatrixXd& G) {
  const auto n = G.rows();
  const auto m = G.cols();
  if (n < 1 || m < 1 || m > n) {
    throw InvalidSystemError("pseudo_projector: G must be n x m with 1 <= m <= n");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  const auto& sv = svd.singularValues();
  if (sv(m - 1) <= kInputRankTol * sv(0)) {
    throw InvalidSystemError("pseudo_projector: G is rank deficient");
  }
  const Eigen::MatrixXd gdag =
      G.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - G * gdag;
  return {gdag, proj};
}

nlohmann::json ConditionReport::to_json() const {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  return {{"labels", labels},
          {"observable_curvature", vec(observable_curvature)},
          {"drift_curvature", vec(drift_curvature)},
          {"coupling_curvature", vec(coupling_curvature)},
          {"total_curvature", vec(total_curvature)},
          {"sample_count", sample_count},
          {"box", {{"lo", vec(box.lo)}, {"hi", vec(box.hi)}}},
          {"seed", seed}};
}

Eigen::MatrixXd generator_curvature(const ControlAffineSystem& sys, const Dictionary& dict,
                                    const Eigen::VectorXd& a, const Eigen::VectorXd& x) {
  if (a.size() != dict.size()) {
    throw InvalidArgumentError("generator_curvature: combination vector has wrong length");
  }
  const int n = sys.state_dim();
  const Eigen::MatrixXd& g = sys.input_matrix();
  const Eigen::MatrixXd jg = sys.jacobian(x) * g;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < dict.size(); ++i) {
    if (a(i) == 0.0) continue;
    grad += a(i) * dict.gradient(i, x);
    hess += a(i) * dict.hessian(i, x);
  }

  Eigen::MatrixXd total = hess * jg;
  for (int k = 0; k < n; ++k) {
    if (grad(k) == 0.0) continue;
    total += grad(k) * (sys.drift_hessian(k, x) * g);
  }
  return total;
}

Eigen::MatrixXd generator_curvature(const ControlAffineSystem& sys, const Dictionary& dict,
                                    int observable, const Eigen::VectorXd& x) {
  if (observable < 0 || observable >= dict.size()) {
    throw InvalidArgumentError("generator_curvature: observable index out of range");
  }
  Eigen::VectorXd a = Eigen::VectorXd::Zero(dict.size());
  a(observable) = 1.0;
  return generator_curvature(sys, dict, a, x);
}

ConditionReport curvature_conditions(const ControlAffineSystem& sys, const Dictionary& dict,
                                     const Box& box, int count, std::uint64_t seed) {
  box.validate();
  if (count < 1) throw InvalidArgumentError("curvature_conditions requires count >= 1");
  const int n = sys.state_dim();
  if (box.dim() != n || dict.state_dim() != n) {
    throw InvalidArgumentError("curvature_conditions: dimension mismatch");
  }
  const int nobs = dict.size();
  const Eigen::MatrixXd& g = sys.input_matrix();

  ConditionReport report;
  report.labels = dict.labels();
  report.observable_curvature = Eigen::VectorXd::Zero(nobs);
  report.drift_curvature = Eigen::VectorXd::Zero(n);
  report.coupling_curvature = Eigen::VectorXd::Zero(nobs);
  report.total_curvature = Eigen::VectorXd::Zero(nobs);
  report.sample_count = count;
  report.box = box;
  report.seed = seed;

  const CounterRng rng(seed);
  std::vector<Eigen::MatrixXd> drift_hess_g(n);
  for (int s = 0; s < count; ++s) {
    const Eigen::VectorXd x = box.sample(rng, static_cast<std::uint64_t>(s) * n);
    const Eigen::MatrixXd jg = sys.jacobian(x) * g;
    for (int j = 0; j < n; ++j) {
      drift_hess_g[j] = sys.drift_hessian(j, x) * g;
      report.drift_curvature(j) =
          std::max(report.drift_curvature(j), spectral_norm(drift_hess_g[j]));
    }
    for (int i = 0; i < nobs; ++i) {
      const Eigen::MatrixXd hess = dict.hessian(i, x);
      report.observable_curvature(i) =
          std::max(report.observable_curvature(i), spectral_norm(hess * g));
      report.coupling_curvature(i) =
          std::max(report.coupling_curvature(i), spectral_norm(hess * jg));
      const Eigen::VectorXd grad = dict.gradient(i, x);
      Eigen::MatrixXd total = hess * jg;
      for (int k = 0; k < n; ++k) {
        if (grad(k) != 0.0) total += grad(k) * drift_hess_g[k];
      }
      report.total_curvature(i) = std::max(report.total_curvature(i), spectral_norm(total));
    }
  }
  return report;
}

GeneratorModel generator_fit(const ControlAffineSystem& sys, const Dictionary& dict,
                             const Eigen::MatrixXd& states, const Eigen::VectorXd& anchor,
                             double ridge) {
  const int n = sys.state_dim();
  const int nobs = dict.size();
  const int count = static_cast<int>(states.rows());
  if (states.cols() != n || dict.state_dim() != n) {
    throw InvalidArgumentError("generator_fit: dimension mismatch");
  }
  if (count < 1) throw InvalidArgumentError("generator_fit: empty sample set");
  if (count < nobs) {
    throw InvalidArgumentError("generator_fit: need at least as many samples as observables");
  }
  if (anchor.size() != n || !anchor.allFinite()) {
    throw InvalidArgumentError("generator_fit: bad anchor point");
  }
  if (ridge < 0.0) throw InvalidArgumentError("generator_fit: ridge must be >= 0");

  Eigen::MatrixXd lifted(nobs, count);       // z(x) per column
  Eigen::MatrixXd lifted_rate(nobs, count);  // d/dt z(x) = lift_jacobian(x) f(x)
  const Eigen::MatrixXd& g = sys.input_matrix();
  const int m = sys.input_dim();
  Eigen::MatrixXd coupling_rows(count, nobs * m);  // grad psi_i(x)^T G per sample
  for (int s = 0; s < count; ++s) {
    const Eigen::VectorXd x = states.row(s).transpose();
    const Eigen::MatrixXd jpsi = dict.lift_jacobian(x);
    lifted.col(s) = dict.lift(x);
    lifted_rate.col(s) = jpsi * sys.drift(x);
    const Eigen::MatrixXd coup = jpsi * g;  // N x m
    for (int i = 0; i < nobs; ++i) coupling_rows.block(s, i * m, 1, m) = coup.row(i);
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(lifted.transpose(),
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv(0) < kDegenerateSigma) {
    throw IllConditionedError("generator_fit: degenerate lifted data matrix");
  }
  Eigen::VectorXd filter(sv.size());
  const double rank_cut =
      std::numeric_limits<double>::epsilon() * std::max(count, nobs) * sv(0);
  for (int i = 0; i < sv.size(); ++i) {
    if (ridge > 0.0) {
      filter(i) = sv(i) / (sv(i) * sv(i) + ridge);
    } else {
      filter(i) = sv(i) > rank_cut ? 1.0 / sv(i) : 0.0;
    }
  }

  GeneratorModel model;
  model.anchor = anchor;
  model.drift_matrix = lifted_rate * svd.matrixU() * filter.asDiagonal() *
                       svd.matrixV().transpose();
  model.input_matrix = dict.lift_jacobian(anchor) * g;

  const Eigen::MatrixXd residual = lifted_rate - model.drift_matrix * lifted;
  model.max_residual = residual.cwiseAbs().maxCoeff();
  model.mean_residual = residual.cwiseAbs().mean();
  model.residual_per_observable = residual.cwiseAbs().rowwise().maxCoeff();
  model.input_residual_per_observable = Eigen::VectorXd::Zero(nobs);
  for (int s = 0; s < count; ++s) {
    for (int i = 0; i < nobs; ++i) {
      const double dev =
          (coupling_rows.block(s, i * m, 1, m) - model.input_matrix.row(i)).norm();
      model.input_residual_per_observable(i) =
          std::max(model.input_residual_per_observable(i), dev);
    }
  }
  return model;
}

BiasBound anchored_bias_bound(const ControlAffineSystem& sys, const Dictionary& dict,
                              const Eigen::VectorXd& a, const GeneratorModel& model,
                              const Box& box, const Eigen::VectorXd& u,
                              const Eigen::MatrixXd& states,
                              const Eigen::MatrixXd* alt_input_matrix) {
  box.validate();
  const int n = sys.state_dim();
  if (a.size() != dict.size()) {
    throw InvalidArgumentError("anchored_bias_bound: combination vector has wrong length");
  }
  if (u.size() != sys.input_dim()) {
    throw InvalidArgumentError("anchored_bias_bound: input has wrong dimension");
  }
  if (states.cols() != n || states.rows() < 1) {
    throw InvalidArgumentError("anchored_bias_bound: bad sample matrix");
  }
  if (!box.contains(model.anchor)) {
    throw InvalidArgumentError("anchored_bias_bound: model anchor lies outside the box");
  }

  const Eigen::MatrixXd& g = sys.input_matrix();
  const Eigen::VectorXd gu = g * u;
  const Eigen::VectorXd a_drift = model.drift_matrix.transpose() * a;  // A^T a
  const double a_input = a.dot(model.input_matrix * u);

  BiasBound bound;
  for (int s = 0; s < states.rows(); ++s) {
    const Eigen::VectorXd x = states.row(s).transpose();
    const Eigen::VectorXd z = dict.lift(x);
    const Eigen::MatrixXd jpsi = dict.lift_jacobian(x);
    const Eigen::VectorXd grad = jpsi.transpose() * a;

    const double generator_value = grad.dot(sys.drift(x) + gu);
    const double model_value = a_drift.dot(z) + a_input;
    bound.lhs_max = std::max(bound.lhs_max, std::abs(generator_value - model_value));

    const double autonomous = std::abs(grad.dot(sys.drift(x)) - a_drift.dot(z));
    bound.autonomous_max = std::max(bound.autonomous_max, autonomous);

    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < dict.size(); ++i) {
      if (a(i) != 0.0) hess += a(i) * dict.hessian(i, x);
    }
    bound.hessian_sup = std::max(bound.hessian_sup, spectral_norm(hess * g));
  }
  bound.input_term = box.diameter() * bound.hessian_sup * u.norm();
  bound.rhs = bound.autonomous_max + bound.input_term;
  if (alt_input_matrix != nullptr) {
    if (alt_input_matrix->rows() != model.input_matrix.rows() ||
        alt_input_matrix->cols() != model.input_matrix.cols()) {
      throw InvalidArgumentError("anchored_bias_bound: alternative input matrix shape mismatch");
    }
    bound.input_matrix_gap = spectral_norm(*alt_input_matrix - model.input_matrix);
  }
  return bound;
}

double restricted_bias_bound(const ControlAffineSystem& sys, const Dictionary& dict,
                             int observable, const Box& box, const Eigen::MatrixXd& states,
                             double restriction_tol) {
  box.validate();
  if (observable < 0 || observable >= dict.size()) {
    throw InvalidArgumentError("restricted_bias_bound: observable index out of range");
  }
  if (states.cols() != sys.state_dim() || states.rows() < 1) {
    throw InvalidArgumentError("restricted_bias_bound: bad sample matrix");
  }
  const Eigen::MatrixXd& g = sys.input_matrix();
  double sup = 0.0;
  for (int s = 0; s < states.rows(); ++s) {
    const Eigen::VectorXd x = states.row(s).transpose();
    const double along_input = spectral_norm(dict.hessian(observable, x) * g);
    if (along_input > restriction_tol) {
      throw AssumptionViolatedError(
          "restricted_bias_bound: observable '" + dict.label(observable) +
          "' has curvature " + std::to_string(along_input) + " along an input direction");
    }
    sup = std::max(sup, spectral_norm(generator_curvature(sys, dict, observable, x)));
  }
  const double gdag_norm = spectral_norm(pseudo_projector(g).first);
  return box.diameter_squared() * gdag_norm * sup;
}

}  // namespace koopcheck
