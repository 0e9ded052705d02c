#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "dspg/objective.hpp"

namespace dspg::testing {

// Independent oracle: central finite differences of f at x.
inline Vector central_difference(const ObjectiveSet::Fn& f, const Vector& x,
                                 double h = 1e-5) {
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

// Wraps an objective set so tests can count evaluations.
class CountingObjective {
 public:
  explicit CountingObjective(ObjectiveSet inner)
      : counter_(std::make_shared<long>(0)), inner_(std::move(inner)) {
    std::vector<ObjectiveSet::Fn> fns;
    const ObjectiveSet inner_copy = inner_;
    auto counter = counter_;
    for (int i = 0; i < inner_.dimension(); ++i) {
      fns.push_back([inner_copy, counter, i](const Vector& x) {
        ++(*counter);
        return inner_copy.evaluate(i, x);
      });
    }
    counted_ = ObjectiveSet(std::move(fns));
  }

  const ObjectiveSet& set() const { return counted_; }
  long count() const { return *counter_; }
  void reset() { *counter_ = 0; }

 private:
  std::shared_ptr<long> counter_;
  ObjectiveSet inner_;
  ObjectiveSet counted_;
};

inline ObjectiveSet constant_objective(int d, double value) {
  std::vector<ObjectiveSet::Fn> fns;
  std::vector<ObjectiveSet::GradFn> grads;
  for (int i = 0; i < d; ++i) {
    fns.push_back([value](const Vector&) { return value; });
    grads.push_back([d](const Vector&) { return Vector::Zero(d); });
  }
  return ObjectiveSet(std::move(fns), std::move(grads));
}

}  // namespace dspg::testing
