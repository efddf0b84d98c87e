#include "koopcheck/box.hpp"

#include "koopcheck/error.hpp"

namespace koopcheck {

Box Box::cube(int dim, double low, double high) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(dim, low);
  b.hi = Eigen::VectorXd::Constant(dim, high);
  b.validate();
  return b;
}

bool Box::contains(const Eigen::VectorXd& x, double slack) const {
  if (x.size() != lo.size()) return false;
  return (x.array() >= lo.array() - slack).all() && (x.array() <= hi.array() + slack).all();
}

Eigen::VectorXd Box::sample(const CounterRng& rng, std::uint64_t counter_base) const {
  Eigen::VectorXd x(dim());
  for (int k = 0; k < dim(); ++k) {
    x(k) = lo(k) + rng.uniform01(counter_base + static_cast<std::uint64_t>(k)) * (hi(k) - lo(k));
  }
  return x;
}

void Box::validate() const {
  if (lo.size() == 0 || lo.size() != hi.size()) {
    throw InvalidArgumentError("box bounds must be nonempty and of equal dimension");
  }
  if (!lo.allFinite() || !hi.allFinite()) {
    throw InvalidArgumentError("box bounds must be finite");
  }
  if ((hi.array() < lo.array()).any()) {
    throw InvalidArgumentError("box is empty: hi < lo in some coordinate");
  }
}

}  // namespace koopcheck
