#include "dspg/objective.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "dspg/random.hpp"

namespace dspg {

ObjectiveSet::ObjectiveSet(std::vector<Fn> functions, std::vector<GradFn> gradients,
                           std::optional<double> lipschitz_hint)
    : functions_(std::move(functions)),
      gradients_(std::move(gradients)),
      lipschitz_hint_(lipschitz_hint) {
  if (functions_.empty()) {
    throw InvalidDimensionError("an objective set needs at least one function");
  }
  if (!gradients_.empty() && gradients_.size() != functions_.size()) {
    throw InvalidDimensionError("gradient oracle list must match function count");
  }
}

void ObjectiveSet::check_agent(int agent) const {
  if (agent < 0 || agent >= dimension()) {
    throw InvalidAgentError("agent index " + std::to_string(agent) +
                            " out of range [0, " + std::to_string(dimension()) + ")");
  }
}

double ObjectiveSet::evaluate(int agent, const Vector& x) const {
  check_agent(agent);
  return functions_[static_cast<std::size_t>(agent)](x);
}

bool ObjectiveSet::has_gradient(int agent) const {
  check_agent(agent);
  return !gradients_.empty() &&
         static_cast<bool>(gradients_[static_cast<std::size_t>(agent)]);
}

Vector ObjectiveSet::analytic_gradient(int agent, const Vector& x) const {
  check_agent(agent);
  if (!has_gradient(agent)) {
    throw UnsupportedOperationError("agent " + std::to_string(agent) +
                                    " has no gradient oracle");
  }
  return gradients_[static_cast<std::size_t>(agent)](x);
}

namespace {

// x'Ax around the shift, written as explicit loops so evaluation makes no
// heap allocations on the simulation hot path.
double shifted_quadratic(const Matrix& a, const Vector& shift, const Vector& x) {
  const Eigen::Index d = a.rows();
  double total = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double yj = x[j] - shift[j];
    double dot = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      dot += (x[i] - shift[i]) * a(i, j);
    }
    total += yj * dot;
  }
  return total;
}

}  // namespace

ObjectiveSet QuadraticSpec::to_objective_set() const {
  const int d = dimension();
  std::vector<ObjectiveSet::Fn> fns;
  std::vector<ObjectiveSet::GradFn> grads;
  fns.reserve(static_cast<std::size_t>(d));
  grads.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    auto a = std::make_shared<Matrix>(matrices[static_cast<std::size_t>(i)]);
    auto s = std::make_shared<Vector>(shifts[static_cast<std::size_t>(i)]);
    fns.push_back([a, s](const Vector& x) { return shifted_quadratic(*a, *s, x); });
    grads.push_back([a, s](const Vector& x) -> Vector { return 2.0 * (*a) * (x - *s); });
  }
  return ObjectiveSet(std::move(fns), std::move(grads));
}

QuadraticSpec make_quadratic_set(int d, std::uint64_t seed, std::vector<Vector> shifts) {
  if (d < 1) {
    throw InvalidDimensionError("agent count must be at least 1, got " + std::to_string(d));
  }
  if (shifts.size() != static_cast<std::size_t>(d)) {
    throw InvalidDimensionError("need one shift vector per agent");
  }
  for (const auto& s : shifts) {
    if (s.size() != d) {
      throw InvalidDimensionError("shift vectors must have length d");
    }
  }
  QuadraticSpec spec;
  spec.generation_seed = seed;
  spec.shifts = std::move(shifts);
  spec.matrices.reserve(static_cast<std::size_t>(d));
  Rng rng(seed);
  for (int i = 0; i < d; ++i) {
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
      for (int col = 0; col < d; ++col) {
        m(r, col) = normal(rng);
      }
    }
    Matrix a = m.transpose() * m;
    a += 0.1 * Matrix::Identity(d, d);
    spec.matrices.push_back(std::move(a));
  }
  return spec;
}

QuadraticSpec make_quadratic_set(int d, std::uint64_t seed, const Vector& common_shift) {
  std::vector<Vector> shifts(static_cast<std::size_t>(d), common_shift);
  return make_quadratic_set(d, seed, std::move(shifts));
}

QuadraticSpec make_quadratic_set(int d, std::uint64_t seed) {
  if (d < 1) {
    throw InvalidDimensionError("agent count must be at least 1, got " + std::to_string(d));
  }
  return make_quadratic_set(d, seed, Vector::Zero(d));
}

ObjectiveSet make_quartic_1d() {
  std::vector<ObjectiveSet::Fn> fns{[](const Vector& x) {
    const double v = x[0];
    return v * v * v * v;
  }};
  std::vector<ObjectiveSet::GradFn> grads{[](const Vector& x) -> Vector {
    Vector g(1);
    g[0] = 4.0 * x[0] * x[0] * x[0];
    return g;
  }};
  return ObjectiveSet(std::move(fns), std::move(grads));
}

}  // namespace dspg
