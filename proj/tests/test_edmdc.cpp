#include <doctest.h>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "koopcheck/edmdc.hpp"
#include "koopcheck/error.hpp"

using namespace koopcheck;
using testing::TestRng;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

Box state_box2() { return Box::cube(2, -1.0, 1.0); }
Box input_box1() { return Box::cube(1, -0.1, 0.1); }

const auto kSlowManifoldDict =
    Dictionary::from_exponents(2, {{0, 0}, {1, 0}, {0, 1}, {0, 2}});

}  // namespace

TEST_CASE("uniform sampling: bounds, determinism, prefix property") {
  const auto set = sample_uniform(state_box2(), input_box1(), 2000, 42);
  CHECK(set.states.rows() == 2000);
  CHECK((set.states.array() >= -1.0).all());
  CHECK((set.states.array() <= 1.0).all());
  CHECK((set.inputs.array().abs() <= 0.1).all());

  const auto again = sample_uniform(state_box2(), input_box1(), 2000, 42);
  CHECK(set.states == again.states);
  CHECK(set.inputs == again.inputs);

  const auto other_seed = sample_uniform(state_box2(), input_box1(), 2000, 43);
  CHECK(set.states != other_seed.states);

  // Shorter runs are exact prefixes of longer ones.
  const auto prefix = sample_uniform(state_box2(), input_box1(), 500, 42);
  CHECK(prefix.states == set.states.topRows(500));
  CHECK(prefix.inputs == set.inputs.topRows(500));

  const auto degenerate = sample_uniform(Box::cube(2, 0.0, 0.0), input_box1(), 10, 1);
  CHECK(degenerate.states.isZero(0.0));

  CHECK_THROWS_AS(sample_uniform(Box::cube(2, 1.0, -1.0), input_box1(), 10, 1),
                  InvalidArgumentError);
  CHECK_THROWS_AS(sample_uniform(state_box2(), input_box1(), 0, 1), InvalidArgumentError);
}

TEST_CASE("transition triples: autonomous pairing") {
  const auto sm1 = make_builtin("slow-manifold-x1");
  auto set = sample_uniform(state_box2(), input_box1(), 50, 7);
  set.inputs.setZero();
  const auto triples = generate_triples(sm1, set, 0.01);
  CHECK(triples.next_controlled == triples.next_autonomous);

  // Equilibrium stays put.
  SampleSet still;
  still.states = MatrixXd::Zero(1, 2);
  still.inputs = MatrixXd::Zero(1, 1);
  const auto fixed = generate_triples(sm1, still, 0.5);
  CHECK(fixed.next_controlled.isZero(0.0));

  // The stored autonomous successor is reproducible bit for bit.
  const auto mixed = generate_triples(sm1, sample_uniform(state_box2(), input_box1(), 20, 3),
                                      0.01);
  for (int s = 0; s < 20; ++s) {
    const Eigen::VectorXd replay =
        sm1.rk4_step(mixed.states.row(s).transpose(), VectorXd::Zero(1), 0.01);
    CHECK(replay == mixed.next_autonomous.row(s).transpose());
  }

  CHECK_THROWS_AS(generate_triples(sm1, set, 0.0), InvalidArgumentError);
}

TEST_CASE("affine flow: the input response is state independent") {
  TestRng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 2;
    const MatrixXd f = rng.matrix(n, n);
    const MatrixXd g = testing::random_full_rank(rng, n, 1);
    const auto sys = make_affine_system(f, g, rng.vector(n));
    auto set = sample_uniform(Box::cube(n, -1.0, 1.0), Box::cube(1, -0.1, 0.1), 40, trial);
    set.inputs.rowwise() = Eigen::RowVectorXd::Constant(1, 0.08);  // one shared input
    const double dt = 0.01;
    const auto triples = generate_triples(sys, set, dt);

    const MatrixXd response = triples.next_controlled - triples.next_autonomous;
    for (int s = 1; s < response.rows(); ++s) {
      CHECK((response.row(s) - response.row(0)).cwiseAbs().maxCoeff() < 1e-12);
    }
    // And it matches the variation-of-constants value through the matrix
    // exponential to the integrator order.
    const auto flow = testing::exact_affine_flow(f, dt);
    const VectorXd expected = flow.forced_response * g * set.inputs.row(0).transpose();
    CHECK((response.row(0).transpose() - expected).norm() < 1e-10);
  }
}

TEST_CASE("edmdc fit recovers the exact affine lifted transition") {
  TestRng rng(83);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 2;
    const MatrixXd f = rng.matrix(n, n);
    const MatrixXd g = testing::random_full_rank(rng, n, 1);
    const VectorXd d = rng.vector(n);
    const auto sys = make_affine_system(f, g, d);
    const double dt = 0.01;
    const auto set = sample_uniform(Box::cube(n, -1.0, 1.0), Box::cube(1, -0.1, 0.1),
                                    600, 100 + trial);
    const auto triples = generate_triples(sys, set, dt);
    const auto model = fit_edmdc(Dictionary::monomials(n, 1), triples);

    CHECK(model.training_residual < 1e-9);

    // Exact discrete transition of the lifted state (1, x).
    const auto flow = testing::exact_affine_flow(f, dt);
    MatrixXd expected_a = MatrixXd::Zero(n + 1, n + 1);
    expected_a(0, 0) = 1.0;
    expected_a.block(1, 0, n, 1) = flow.forced_response * d;
    expected_a.block(1, 1, n, n) = flow.state_transition;
    const MatrixXd expected_b =
        (MatrixXd(n + 1, 1) << 0.0, flow.forced_response * g).finished();
    CHECK((model.A - expected_a).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((model.B - expected_b).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("edmdc fit on the invariant dictionary is integrator limited") {
  const auto sm1 = make_builtin("slow-manifold-x1");
  const auto set = sample_uniform(state_box2(), input_box1(), 2000, 42);
  const auto triples = generate_triples(sm1, set, 0.01);
  const auto model = fit_edmdc(kSlowManifoldDict, triples);
  CHECK(model.training_residual < 1e-6);
  CHECK(model.scaling(0) == 1.0);  // constant observable
  CHECK(model.scaling.minCoeff() > 0.0);
}

TEST_CASE("edmdc fit is invariant under sample duplication") {
  const auto sm2 = make_builtin("slow-manifold-x2");
  const auto set = sample_uniform(state_box2(), input_box1(), 400, 5);
  const auto triples = generate_triples(sm2, set, 0.01);
  const auto model = fit_edmdc(kSlowManifoldDict, triples);

  TransitionTriples doubled;
  doubled.dt = triples.dt;
  auto stack2 = [](const MatrixXd& m) {
    MatrixXd out(2 * m.rows(), m.cols());
    out << m, m;
    return out;
  };
  doubled.states = stack2(triples.states);
  doubled.inputs = stack2(triples.inputs);
  doubled.next_controlled = stack2(triples.next_controlled);
  doubled.next_autonomous = stack2(triples.next_autonomous);
  const auto model2 = fit_edmdc(kSlowManifoldDict, doubled);

  CHECK((model.A - model2.A).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((model.B - model2.B).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((model.scaling - model2.scaling).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("edmdc fit error cases") {
  const auto sm1 = make_builtin("slow-manifold-x1");
  const auto tiny = sample_uniform(state_box2(), input_box1(), 4, 1);
  CHECK_THROWS_AS(fit_edmdc(kSlowManifoldDict, generate_triples(sm1, tiny, 0.01)),
                  InvalidArgumentError);  // fewer than N + m samples

  // All states identical: regressor rank < N + m, no ridge -> rejected.
  const auto degenerate =
      sample_uniform(Box::cube(2, 0.3, 0.3), input_box1(), 100, 1);
  const auto triples = generate_triples(sm1, degenerate, 0.01);
  CHECK_THROWS_AS(fit_edmdc(kSlowManifoldDict, triples, 0.0), IllConditionedError);
  // With the default ridge the same data is accepted.
  CHECK_NOTHROW(fit_edmdc(kSlowManifoldDict, triples));

  // An observable that vanishes on all training data has no scale.
  Box slab;
  slab.lo = Eigen::Vector2d(0.0, -1.0);
  slab.hi = Eigen::Vector2d(0.0, 1.0);  // x1 is identically zero
  const auto flat = generate_triples(sm1, sample_uniform(slab, input_box1(), 100, 2), 0.01);
  CHECK_THROWS_AS(fit_edmdc(kSlowManifoldDict, flat, 1e-8), IllConditionedError);
}

TEST_CASE("error decomposition: identity, reductions, and edge cases") {
  const auto sm2 = make_builtin("slow-manifold-x2");
  const auto set = sample_uniform(state_box2(), input_box1(), 800, 9);
  const auto triples = generate_triples(sm2, set, 0.01);
  const auto dict = Dictionary::monomials(2, 3);
  const auto model = fit_edmdc(dict, triples);
  const auto errors = error_decomposition(model, dict, triples);

  // Independent recomputation of the decomposition and its reductions.
  const int count = static_cast<int>(triples.states.rows());
  double mean_c = 0.0, mean_a = 0.0, mean_i = 0.0;
  for (int s = 0; s < count; ++s) {
    const VectorXd z = dict.lift(triples.states.row(s).transpose());
    const VectorXd zc = dict.lift(triples.next_controlled.row(s).transpose());
    const VectorXd za = dict.lift(triples.next_autonomous.row(s).transpose());
    const VectorXd bu = model.B * triples.inputs.row(s).transpose();
    const VectorXd rc = zc - model.A * z - bu;
    const VectorXd ra = za - model.A * z;
    const VectorXd ri = (zc - za) - bu;
    CHECK((rc - (ra + ri)).cwiseAbs().maxCoeff() <= 1e-14);
    mean_c += (rc.cwiseQuotient(model.scaling)).cwiseAbs().maxCoeff();
    mean_a += (ra.cwiseQuotient(model.scaling)).cwiseAbs().maxCoeff();
    mean_i += (ri.cwiseQuotient(model.scaling)).cwiseAbs().maxCoeff();
  }
  CHECK(errors.combined == doctest::Approx(mean_c / count).epsilon(1e-12));
  CHECK(errors.autonomous == doctest::Approx(mean_a / count).epsilon(1e-12));
  CHECK(errors.input_dependent == doctest::Approx(mean_i / count).epsilon(1e-12));
  CHECK(errors.combined <= errors.autonomous + errors.input_dependent + 1e-15);

  // Zero inputs: no input error, combined equals autonomous.
  auto quiet = set;
  quiet.inputs.setZero();
  const auto quiet_triples = generate_triples(sm2, quiet, 0.01);
  const auto quiet_model = fit_edmdc(dict, quiet_triples, 1e-12);
  const auto quiet_errors = error_decomposition(quiet_model, dict, quiet_triples);
  CHECK(quiet_errors.input_dependent == 0.0);
  CHECK(quiet_errors.combined == quiet_errors.autonomous);

  // Mismatched dictionary is rejected.
  CHECK_THROWS_AS(error_decomposition(model, Dictionary::monomials(2, 2), triples),
                  InvalidArgumentError);
}

TEST_CASE("error decomposition is exact for the affine system") {
  TestRng rng(91);
  const auto sys = make_affine_system(rng.matrix(2, 2), testing::random_full_rank(rng, 2, 1),
                                      rng.vector(2));
  const auto set = sample_uniform(state_box2(), input_box1(), 500, 3);
  const auto triples = generate_triples(sys, set, 0.01);
  const auto dict = Dictionary::monomials(2, 1);
  const auto errors = error_decomposition(fit_edmdc(dict, triples), dict, triples);
  CHECK(errors.combined < 1e-8);
  CHECK(errors.autonomous < 1e-8);
  CHECK(errors.input_dependent < 1e-8);
}

TEST_CASE("reported errors are invariant under observable rescaling") {
  const auto sm2 = make_builtin("slow-manifold-x2");
  const auto set = sample_uniform(state_box2(), input_box1(), 600, 11);
  const auto triples = generate_triples(sm2, set, 0.01);

  // Plain least squares: the fitted values are a projection onto the row
  // space of the regressor, which row rescaling leaves unchanged. (A ridge
  // penalty is not equivariant under rescaling, so the invariance is exact
  // only without it.)
  const auto dict = Dictionary::monomials(2, 2);
  const auto base = error_decomposition(fit_edmdc(dict, triples, 0.0), dict, triples);
  const auto dict_scaled = dict.scaled(5, 37.5);
  const auto scaled =
      error_decomposition(fit_edmdc(dict_scaled, triples, 0.0), dict_scaled, triples);

  CHECK(scaled.combined == doctest::Approx(base.combined).epsilon(1e-12));
  CHECK(scaled.autonomous == doctest::Approx(base.autonomous).epsilon(1e-12));
  CHECK(scaled.input_dependent == doctest::Approx(base.input_dependent).epsilon(1e-12));
}

TEST_CASE("fit is a local optimum of the ridge-augmented objective") {
  const auto sm2 = make_builtin("slow-manifold-x2");
  const auto set = sample_uniform(state_box2(), input_box1(), 300, 13);
  const auto triples = generate_triples(sm2, set, 0.01);
  const auto model = fit_edmdc(kSlowManifoldDict, triples);

  const int count = static_cast<int>(triples.states.rows());
  const int nobs = kSlowManifoldDict.size();
  MatrixXd lifted(nobs, count), lifted_next(nobs, count);
  for (int s = 0; s < count; ++s) {
    lifted.col(s) = kSlowManifoldDict.lift(triples.states.row(s).transpose());
    lifted_next.col(s) = kSlowManifoldDict.lift(triples.next_controlled.row(s).transpose());
  }
  auto objective = [&](const MatrixXd& a, const MatrixXd& b) {
    const double fit = (lifted_next - a * lifted - b * triples.inputs.transpose())
                           .squaredNorm();
    return fit + model.ridge_used * (a.squaredNorm() + b.squaredNorm());
  };
  const double at_optimum = objective(model.A, model.B);
  TestRng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    MatrixXd a = model.A;
    MatrixXd b = model.B;
    const double delta = trial % 2 == 0 ? 1e-4 : -1e-4;
    if (trial % 3 == 0) {
      b(rng.integer(0, nobs - 1), 0) += delta;
    } else {
      a(rng.integer(0, nobs - 1), rng.integer(0, nobs - 1)) += delta;
    }
    CHECK(objective(a, b) >= at_optimum);
  }
}

TEST_CASE("degree sweep: shared samples, determinism, affine exactness") {
  TestRng rng(99);
  const auto affine = make_affine_system(rng.matrix(2, 2),
                                         testing::random_full_rank(rng, 2, 1), rng.vector(2));
  const auto rows = degree_sweep(affine, {1}, 400, 42, 0.01, state_box2(), input_box1());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].errors.combined < 1e-8);
  CHECK(rows[0].errors.autonomous < 1e-8);
  CHECK(rows[0].errors.input_dependent < 1e-8);

  const auto sm2 = make_builtin("slow-manifold-x2");
  const std::vector<int> degrees{1, 2, 3};
  const auto a = degree_sweep(sm2, degrees, 500, 7, 0.01, state_box2(), input_box1());
  const auto b = degree_sweep(sm2, degrees, 500, 7, 0.01, state_box2(), input_box1());
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].errors.combined == b[i].errors.combined);
    CHECK(a[i].errors.autonomous == b[i].errors.autonomous);
    CHECK(a[i].errors.input_dependent == b[i].errors.input_dependent);
  }

  CHECK_THROWS_AS(degree_sweep(sm2, {}, 100, 1, 0.01, state_box2(), input_box1()),
                  InvalidArgumentError);
  CHECK_THROWS_AS(degree_sweep(sm2, {0}, 100, 1, 0.01, state_box2(), input_box1()),
                  InvalidArgumentError);
}
