#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "dspg/errors.hpp"

namespace dspg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// A d-agent family of scalar objectives on R^d. Function i is private to
// agent i; gradients, when attached, are test/diagnostic oracles and never
// feed the descent path. Evaluation is pure, so a set may be shared across
// any number of concurrent readers.
class ObjectiveSet {
 public:
  using Fn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;

  ObjectiveSet() = default;
  explicit ObjectiveSet(std::vector<Fn> functions,
                        std::vector<GradFn> gradients = {},
                        std::optional<double> lipschitz_hint = std::nullopt);

  int dimension() const noexcept { return static_cast<int>(functions_.size()); }

  double evaluate(int agent, const Vector& x) const;

  bool has_gradient(int agent) const;
  Vector analytic_gradient(int agent, const Vector& x) const;

  std::optional<double> lipschitz_hint() const noexcept { return lipschitz_hint_; }

 private:
  void check_agent(int agent) const;

  std::vector<Fn> functions_;
  std::vector<GradFn> gradients_;  // empty, or one per agent (individual entries may be null)
  std::optional<double> lipschitz_hint_;
};

// Quadratic test family: F_i(x) = (x - s_i)' A_i (x - s_i) with A_i symmetric
// positive definite. The shared minimizer is s_i (all equal unless a caller
// builds a deliberately shifted family, as the consensus tests do).
struct QuadraticSpec {
  std::vector<Matrix> matrices;
  std::vector<Vector> shifts;
  std::uint64_t generation_seed = 0;

  int dimension() const noexcept { return static_cast<int>(matrices.size()); }
  ObjectiveSet to_objective_set() const;
};

// Draws A_i = M'M + 0.1 I with M a d-by-d matrix of i.i.d. standard normals
// from a stream seeded by `seed`. Symmetric PD by construction; the zero
// vector (or `shift`) minimizes every member. Gradient oracles are attached:
// grad F_i(x) = 2 A_i (x - s_i).
QuadraticSpec make_quadratic_set(int d, std::uint64_t seed);
QuadraticSpec make_quadratic_set(int d, std::uint64_t seed, const Vector& common_shift);
QuadraticSpec make_quadratic_set(int d, std::uint64_t seed, std::vector<Vector> shifts);

// f(x) = x^4 on R^1 with gradient 4x^3. Its central-difference bias is
// exactly 4 x c^2, which makes it the bias-order probe: quadratics have zero
// bias, so a quartic is the smallest family that exposes the c^2 d term.
ObjectiveSet make_quartic_1d();

}  // namespace dspg
