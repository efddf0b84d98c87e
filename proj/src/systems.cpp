#include "koopcheck/systems.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <utility>

#include "koopcheck/error.hpp"
#include "koopcheck/numdiff.hpp"

namespace koopcheck {

namespace {
constexpr double kInputRankTol = 1e-10;  // sigma_min > tol * sigma_max
}

ControlAffineSystem::ControlAffineSystem(std::string name, DriftFn drift,
                                         Eigen::MatrixXd input_matrix,
                                         std::optional<JacobianFn> jacobian)
    : name_(std::move(name)),
      drift_(std::move(drift)),
      input_matrix_(std::move(input_matrix)),
      jacobian_(std::move(jacobian)) {
  n_ = static_cast<int>(input_matrix_.rows());
  m_ = static_cast<int>(input_matrix_.cols());
  if (n_ < 1 || m_ < 1 || m_ > n_) {
    throw InvalidSystemError("system '" + name_ + "': input matrix must be n x m with 1 <= m <= n");
  }
  if (!drift_) {
    throw InvalidSystemError("system '" + name_ + "': drift callable is empty");
  }
  if (!input_matrix_.allFinite()) {
    throw InvalidSystemError("system '" + name_ + "': input matrix has non-finite entries");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(input_matrix_);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= kInputRankTol * sv(0)) {
    throw InvalidSystemError("system '" + name_ + "': input matrix is rank deficient");
  }
}

Eigen::VectorXd ControlAffineSystem::drift(const Eigen::VectorXd& x) const {
  if (x.size() != n_) {
    throw InvalidArgumentError("system '" + name_ + "': state has wrong dimension");
  }
  Eigen::VectorXd f = drift_(x);
  if (f.size() != n_) {
    throw EvaluationError("system '" + name_ + "': drift returned wrong dimension");
  }
  if (!f.allFinite()) {
    throw EvaluationError("system '" + name_ + "': drift is non-finite at a query point");
  }
  return f;
}

Eigen::MatrixXd ControlAffineSystem::jacobian(const Eigen::VectorXd& x) const {
  if (jacobian_) {
    Eigen::MatrixXd j = (*jacobian_)(x);
    if (j.rows() != n_ || j.cols() != n_) {
      throw EvaluationError("system '" + name_ + "': jacobian returned wrong dimensions");
    }
    if (!j.allFinite()) {
      throw EvaluationError("system '" + name_ + "': jacobian is non-finite at a query point");
    }
    return j;
  }
  return fd_jacobian([this](const Eigen::VectorXd& y) { return drift(y); }, x,
                     kFirstOrderStep);
}

Eigen::MatrixXd ControlAffineSystem::drift_hessian(int component,
                                                   const Eigen::VectorXd& x) const {
  if (component < 0 || component >= n_) {
    throw InvalidArgumentError("system '" + name_ + "': drift component index out of range");
  }
  Eigen::MatrixXd hess(n_, n_);
  for (int l = 0; l < n_; ++l) {
    const double h = kSecondOrderStep * std::max(1.0, std::abs(x(l)));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(l) += h;
    xm(l) -= h;
    hess.col(l) =
        (jacobian(xp).row(component) - jacobian(xm).row(component)).transpose() / (xp(l) - xm(l));
  }
  return 0.5 * (hess + hess.transpose());
}

Eigen::VectorXd ControlAffineSystem::rhs(const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& u) const {
  if (u.size() != m_) {
    throw InvalidArgumentError("system '" + name_ + "': input has wrong dimension");
  }
  return drift(x) + input_matrix_ * u;
}

Eigen::VectorXd ControlAffineSystem::rk4_step(const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& u, double dt) const {
  if (!(dt > 0.0)) {
    throw InvalidArgumentError("rk4_step requires dt > 0");
  }
  if (u.size() != m_) {
    throw InvalidArgumentError("system '" + name_ + "': input has wrong dimension");
  }
  const Eigen::VectorXd gu = input_matrix_ * u;
  const Eigen::VectorXd k1 = drift(x) + gu;
  const Eigen::VectorXd k2 = drift(x + 0.5 * dt * k1) + gu;
  const Eigen::VectorXd k3 = drift(x + 0.5 * dt * k2) + gu;
  const Eigen::VectorXd k4 = drift(x + dt * k3) + gu;
  Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) {
    throw EvaluationError("system '" + name_ + "': non-finite state after integration step");
  }
  return next;
}

ControlAffineSystem make_builtin(const std::string& name) {
  if (name == "slow-manifold-x1" || name == "slow-manifold-x2") {
    auto drift = [](const Eigen::VectorXd& x) {
      return Eigen::Vector2d(x(0) - x(1) * x(1), x(1));
    };
    auto jac = [](const Eigen::VectorXd& x) {
      Eigen::Matrix2d j;
      j << 1.0, -2.0 * x(1), 0.0, 1.0;
      return j;
    };
    Eigen::MatrixXd g(2, 1);
    if (name == "slow-manifold-x1") {
      g << 1.0, 0.0;
    } else {
      g << 0.0, 1.0;
    }
    return ControlAffineSystem(name, drift, g, jac);
  }
  if (name == "triple-chain") {
    auto drift = [](const Eigen::VectorXd& x) {
      return Eigen::Vector3d(x(1) * x(1), x(2), 0.0);
    };
    auto jac = [](const Eigen::VectorXd& x) {
      Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
      j(0, 1) = 2.0 * x(1);
      j(1, 2) = 1.0;
      return j;
    };
    Eigen::MatrixXd g(3, 1);
    g << 0.0, 0.0, 1.0;
    return ControlAffineSystem(name, drift, g, jac);
  }
  throw NotFoundError("unknown built-in system '" + name +
                      "' (expected slow-manifold-x1, slow-manifold-x2, or triple-chain)");
}

ControlAffineSystem make_affine_system(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                                       const Eigen::VectorXd& d) {
  const auto n = F.rows();
  if (F.cols() != n || G.rows() != n || d.size() != n) {
    throw InvalidSystemError("affine system: dimension mismatch between F, G, and d");
  }
  if (!F.allFinite() || !d.allFinite()) {
    throw InvalidSystemError("affine system: non-finite entries");
  }
  auto drift = [F, d](const Eigen::VectorXd& x) -> Eigen::VectorXd { return F * x + d; };
  auto jac = [F](const Eigen::VectorXd&) -> Eigen::MatrixXd { return F; };
  return ControlAffineSystem("affine", drift, G, jac);
}

double jacobian_deviation(const ControlAffineSystem& sys, const Box& box, int count,
                          std::uint64_t seed) {
  box.validate();
  if (box.dim() != sys.state_dim()) {
    throw InvalidArgumentError("jacobian_deviation: box dimension mismatch");
  }
  CounterRng rng(seed);
  auto field = [&sys](const Eigen::VectorXd& y) { return sys.drift(y); };
  double worst = 0.0;
  for (int s = 0; s < count; ++s) {
    const Eigen::VectorXd x = box.sample(rng, static_cast<std::uint64_t>(s) * box.dim());
    const Eigen::MatrixXd ja = sys.jacobian(x);
    const Eigen::MatrixXd jf = fd_jacobian(field, x, kFirstOrderStep);
    worst = std::max(worst, (ja - jf).norm() / std::max(1.0, ja.norm()));
  }
  return worst;
}

}  // namespace koopcheck
