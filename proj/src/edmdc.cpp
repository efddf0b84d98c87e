#include "koopcheck/edmdc.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "koopcheck/error.hpp"

namespace koopcheck {

namespace {
constexpr double kAutoRidgeFactor = 1e-10;  // lambda = factor * sigma_max^2
}

SampleSet sample_uniform(const Box& state_box, const Box& input_box, int count,
                         std::uint64_t seed) {
  state_box.validate();
  input_box.validate();
  if (count < 1) throw InvalidArgumentError("sample_uniform requires count >= 1");
  const int n = state_box.dim();
  const int m = input_box.dim();

  SampleSet set;
  set.seed = seed;
  set.state_box = state_box;
  set.input_box = input_box;
  set.states.resize(count, n);
  set.inputs.resize(count, m);
  const CounterRng rng(seed);
  for (int s = 0; s < count; ++s) {
    const std::uint64_t base = static_cast<std::uint64_t>(s) * (n + m);
    set.states.row(s) = state_box.sample(rng, base).transpose();
    set.inputs.row(s) = input_box.sample(rng, base + n).transpose();
  }
  return set;
}

TransitionTriples generate_triples(const ControlAffineSystem& sys, const SampleSet& samples,
                                   double dt) {
  if (!(dt > 0.0)) throw InvalidArgumentError("generate_triples requires dt > 0");
  if (samples.states.cols() != sys.state_dim() || samples.inputs.cols() != sys.input_dim()) {
    throw InvalidArgumentError("generate_triples: sample dimensions do not match the system");
  }
  const int count = static_cast<int>(samples.states.rows());
  TransitionTriples triples;
  triples.states = samples.states;
  triples.inputs = samples.inputs;
  triples.next_controlled.resize(count, sys.state_dim());
  triples.next_autonomous.resize(count, sys.state_dim());
  triples.dt = dt;
  const Eigen::VectorXd zero_input = Eigen::VectorXd::Zero(sys.input_dim());
  for (int s = 0; s < count; ++s) {
    const Eigen::VectorXd x = samples.states.row(s).transpose();
    triples.next_controlled.row(s) =
        sys.rk4_step(x, samples.inputs.row(s).transpose(), dt).transpose();
    triples.next_autonomous.row(s) = sys.rk4_step(x, zero_input, dt).transpose();
  }
  return triples;
}

EdmdcModel fit_edmdc(const Dictionary& dict, const TransitionTriples& triples, double ridge) {
  const int count = static_cast<int>(triples.states.rows());
  const int n = static_cast<int>(triples.states.cols());
  const int m = static_cast<int>(triples.inputs.cols());
  const int nobs = dict.size();
  if (dict.state_dim() != n) throw InvalidArgumentError("fit_edmdc: dictionary dimension mismatch");
  if (count < nobs + m) {
    throw InvalidArgumentError("fit_edmdc: need at least N + m samples");
  }

  Eigen::MatrixXd lifted(nobs, count);
  Eigen::MatrixXd lifted_next(nobs, count);
  for (int s = 0; s < count; ++s) {
    lifted.col(s) = dict.lift(triples.states.row(s).transpose());
    lifted_next.col(s) = dict.lift(triples.next_controlled.row(s).transpose());
  }
  Eigen::MatrixXd regressor(nobs + m, count);
  regressor.topRows(nobs) = lifted;
  regressor.bottomRows(m) = triples.inputs.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(regressor.transpose(),
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sigma_max = sv(0);
  if (sigma_max <= 0.0) throw IllConditionedError("fit_edmdc: zero data matrix");
  const double lambda = ridge < 0.0 ? kAutoRidgeFactor * sigma_max * sigma_max : ridge;

  const double rank_cut =
      std::numeric_limits<double>::epsilon() * std::max(count, nobs + m) * sigma_max;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_cut) ++rank;
  }
  if (lambda == 0.0 && rank < nobs + m) {
    throw IllConditionedError("fit_edmdc: regressor is rank deficient and ridge is zero");
  }

  Eigen::VectorXd filter(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    filter(i) = lambda > 0.0 ? sv(i) / (sv(i) * sv(i) + lambda) : 1.0 / sv(i);
  }
  const Eigen::MatrixXd stacked =
      lifted_next * svd.matrixU() * filter.asDiagonal() * svd.matrixV().transpose();

  EdmdcModel model;
  model.A = stacked.leftCols(nobs);
  model.B = stacked.rightCols(m);
  model.dt = triples.dt;
  model.dictionary = dict;
  model.ridge_used = lambda;
  model.condition_number = sigma_max / sv(sv.size() - 1);
  model.scaling = lifted.cwiseAbs().rowwise().mean();
  if ((model.scaling.array() <= 0.0).any()) {
    throw IllConditionedError(
        "fit_edmdc: an observable has zero mean absolute value over the training data");
  }
  const Eigen::MatrixXd residual =
      lifted_next - model.A * lifted - model.B * triples.inputs.transpose();
  model.training_residual =
      (model.scaling.cwiseInverse().asDiagonal() * residual).cwiseAbs().maxCoeff();
  return model;
}

nlohmann::json EdmdcModel::to_json() const {
  auto matrix_rows = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  return {{"A", matrix_rows(A)},
          {"B", matrix_rows(B)},
          {"dt", dt},
          {"dictionary", dictionary.to_json()},
          {"scaling", std::vector<double>(scaling.data(), scaling.data() + scaling.size())},
          {"condition_number", condition_number},
          {"ridge", ridge_used},
          {"training_residual", training_residual}};
}

ErrorTriple error_decomposition(const EdmdcModel& model, const Dictionary& dict,
                                const TransitionTriples& triples) {
  if (!model.dictionary.same_layout(dict)) {
    throw InvalidArgumentError("error_decomposition: dictionary does not match the model");
  }
  const int count = static_cast<int>(triples.states.rows());
  const int nobs = dict.size();
  Eigen::MatrixXd lifted(nobs, count);
  Eigen::MatrixXd lifted_ctrl(nobs, count);
  Eigen::MatrixXd lifted_auto(nobs, count);
  for (int s = 0; s < count; ++s) {
    lifted.col(s) = dict.lift(triples.states.row(s).transpose());
    lifted_ctrl.col(s) = dict.lift(triples.next_controlled.row(s).transpose());
    lifted_auto.col(s) = dict.lift(triples.next_autonomous.row(s).transpose());
  }
  const Eigen::MatrixXd predicted_drift = model.A * lifted;
  const Eigen::MatrixXd predicted_input = model.B * triples.inputs.transpose();

  const auto inv_scale = model.scaling.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd combined =
      inv_scale * (lifted_ctrl - predicted_drift - predicted_input);
  const Eigen::MatrixXd autonomous = inv_scale * (lifted_auto - predicted_drift);
  const Eigen::MatrixXd input_dep =
      inv_scale * ((lifted_ctrl - lifted_auto) - predicted_input);

  ErrorTriple errors;
  errors.combined = combined.cwiseAbs().colwise().maxCoeff().mean();
  errors.autonomous = autonomous.cwiseAbs().colwise().maxCoeff().mean();
  errors.input_dependent = input_dep.cwiseAbs().colwise().maxCoeff().mean();
  return errors;
}

std::vector<SweepRow> degree_sweep(const ControlAffineSystem& sys,
                                   const std::vector<int>& degrees, int count,
                                   std::uint64_t seed, double dt, const Box& state_box,
                                   const Box& input_box, double ridge) {
  if (degrees.empty()) throw InvalidArgumentError("degree_sweep: empty degree list");
  for (int d : degrees) {
    if (d < 1) throw InvalidArgumentError("degree_sweep: degrees must be >= 1");
  }
  const SampleSet samples = sample_uniform(state_box, input_box, count, seed);
  const TransitionTriples triples = generate_triples(sys, samples, dt);
  std::vector<SweepRow> rows;
  rows.reserve(degrees.size());
  for (int d : degrees) {
    const Dictionary dict = Dictionary::monomials(sys.state_dim(), d);
    const EdmdcModel model = fit_edmdc(dict, triples, ridge);
    rows.push_back({d, error_decomposition(model, dict, triples)});
  }
  return rows;
}

}  // namespace koopcheck
