#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "koopcheck/rng.hpp"

namespace koopcheck {

// Axis-aligned box [lo_1, hi_1] x ... x [lo_d, hi_d].
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box cube(int dim, double low, double high);

  int dim() const { return static_cast<int>(lo.size()); }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  // Euclidean norm of the side-length vector; this is the diameter of the
  // box as a point set.
  double diameter() const { return (hi - lo).norm(); }
  double diameter_squared() const { return (hi - lo).squaredNorm(); }

  bool contains(const Eigen::VectorXd& x, double slack = 0.0) const;

  // Uniform point consuming counters [counter_base, counter_base + dim).
  Eigen::VectorXd sample(const CounterRng& rng, std::uint64_t counter_base) const;

  // Throws InvalidArgumentError unless lo <= hi componentwise and finite.
  void validate() const;
};

}  // namespace koopcheck
