#include "koopcheck/numdiff.hpp"

#include <cmath>

#include "koopcheck/error.hpp"

namespace koopcheck {

Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x,
                            double step_scale) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd jac;
  for (int k = 0; k < n; ++k) {
    const double h = step_scale * std::max(1.0, std::abs(x(k)));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(k) += h;
    xm(k) -= h;
    const Eigen::VectorXd fp = f(xp);
    const Eigen::VectorXd fm = f(xm);
    if (!fp.allFinite() || !fm.allFinite()) {
      throw EvaluationError("non-finite field value in finite-difference stencil");
    }
    if (jac.size() == 0) jac.resize(fp.size(), n);
    // Realized step: cancels the representation error of x +- h.
    jac.col(k) = (fp - fm) / (xp(k) - xm(k));
  }
  return jac;
}

}  // namespace koopcheck
