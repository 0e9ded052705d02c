#include "dspg/estimator.hpp"

#include <cmath>
#include <string>

namespace dspg {

PerturbationVector sample_perturbation(Rng& rng, int d) {
  if (d < 1) {
    throw InvalidDimensionError("perturbation dimension must be at least 1");
  }
  PerturbationVector delta;
  delta.signs.resize(d);
  sample_signs(rng, delta.signs);
  return delta;
}

void sample_signs(Rng& rng, Vector& signs) {
  for (Eigen::Index k = 0; k < signs.size(); ++k) {
    signs[k] = sign_draw(rng);
  }
}

double perturbed_difference(const ObjectiveSet& obj, int agent, const Vector& view,
                            const Vector& signs, double c, Vector& scratch_plus,
                            Vector& scratch_minus) {
  const Eigen::Index d = view.size();
  scratch_plus.resize(d);
  scratch_minus.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double step = c * signs[k];
    scratch_plus[k] = view[k] + step;
    scratch_minus[k] = view[k] - step;
  }
  const double f_plus = obj.evaluate(agent, scratch_plus);
  if (!std::isfinite(f_plus)) {
    throw NumericalOverflowError("objective returned non-finite value", scratch_plus);
  }
  const double f_minus = obj.evaluate(agent, scratch_minus);
  if (!std::isfinite(f_minus)) {
    throw NumericalOverflowError("objective returned non-finite value", scratch_minus);
  }
  return f_plus - f_minus;
}

double dspg_estimate(const ObjectiveSet& obj, int agent, const Vector& view,
                     const PerturbationVector& delta, double c) {
  if (c <= 0.0) {
    throw Error("sensitivity parameter must be positive");
  }
  Vector plus, minus;
  const double num = perturbed_difference(obj, agent, view, delta.signs, c, plus, minus);
  // delta(agent) is exactly +-1, so dividing equals multiplying by the sign.
  return num * delta.signs[agent] / (2.0 * c);
}

Vector spsa_classic_step(const Vector& x, const ObjectiveSet::Fn& f, double gamma_n,
                         double c_n, Rng& rng) {
  if (gamma_n < 0.0) {
    throw Error("step size must be nonnegative");
  }
  if (c_n <= 0.0) {
    throw Error("sensitivity parameter must be positive");
  }
  const Eigen::Index d = x.size();
  Vector signs(d);
  sample_signs(rng, signs);
  const Vector plus = x + c_n * signs;
  const Vector minus = x - c_n * signs;
  const double f_plus = f(plus);
  const double f_minus = f(minus);
  if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
    throw NumericalOverflowError("objective returned non-finite value",
                                 std::isfinite(f_plus) ? minus : plus);
  }
  const double num = f_plus - f_minus;
  Vector next(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    next[i] = x[i] - gamma_n * num * signs[i] / (2.0 * c_n);
  }
  return next;
}

EstimatorDiagnostics enumerate_diagnostics(const ObjectiveSet& obj, int agent,
                                           const Vector& x, double c) {
  const int d = static_cast<int>(x.size());
  if (d > kEnumerationLimit) {
    throw EnumerationLimitError("enumeration over 2^" + std::to_string(d) +
                                " sign patterns exceeds the d <= " +
                                std::to_string(kEnumerationLimit) + " limit");
  }
  if (!obj.has_gradient(agent)) {
    throw UnsupportedOperationError("enumeration diagnostics need a gradient oracle");
  }
  const std::uint64_t patterns = 1ULL << d;
  const double inv_patterns = 1.0 / static_cast<double>(patterns);

  // One evaluation pair per pattern; every coordinate quotient reuses it.
  std::vector<double> numerators(patterns);
  Vector signs(d), plus(d), minus(d);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    for (int k = 0; k < d; ++k) {
      signs[k] = (mask >> k) & 1ULL ? 1.0 : -1.0;
    }
    numerators[mask] = perturbed_difference(obj, agent, x, signs, c, plus, minus);
  }

  EstimatorDiagnostics diag;
  diag.mean = Vector::Zero(d);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    const double base = numerators[mask] / (2.0 * c);
    for (int k = 0; k < d; ++k) {
      diag.mean[k] += ((mask >> k) & 1ULL ? base : -base);
    }
  }
  diag.mean *= inv_patterns;

  diag.variance = Vector::Zero(d);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    const double base = numerators[mask] / (2.0 * c);
    for (int k = 0; k < d; ++k) {
      const double q = ((mask >> k) & 1ULL ? base : -base) - diag.mean[k];
      diag.variance[k] += q * q;
    }
  }
  diag.variance *= inv_patterns;

  diag.true_gradient = obj.analytic_gradient(agent, x);
  diag.bias = diag.mean - diag.true_gradient;
  return diag;
}

SampledDiagnostics sample_diagnostics(const ObjectiveSet& obj, int agent, const Vector& x,
                                      double c, std::int64_t samples, Rng& rng) {
  if (samples < 2) {
    throw Error("need at least 2 samples for a variance estimate");
  }
  const int d = static_cast<int>(x.size());
  Vector signs(d), plus(d), minus(d);
  Vector sum = Vector::Zero(d);
  Vector sum_sq = Vector::Zero(d);
  for (std::int64_t s = 0; s < samples; ++s) {
    sample_signs(rng, signs);
    const double base = perturbed_difference(obj, agent, x, signs, c, plus, minus) / (2.0 * c);
    for (int k = 0; k < d; ++k) {
      const double q = base * signs[k];
      sum[k] += q;
      sum_sq[k] += q * q;
    }
  }
  SampledDiagnostics out;
  out.samples = samples;
  const double n = static_cast<double>(samples);
  out.mean = sum / n;
  out.variance = (sum_sq - n * out.mean.cwiseProduct(out.mean)) / (n - 1.0);
  out.variance = out.variance.cwiseMax(0.0);
  out.std_error = (out.variance / n).cwiseSqrt();
  return out;
}

double variance_bound(const ObjectiveSet& obj, int agent, const Vector& x) {
  const Vector grad = obj.analytic_gradient(agent, x);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    if (j == agent) continue;
    sum += grad[j] * grad[j];
  }
  return 4.0 * sum;
}

double estimator_lipschitz_check(const ObjectiveSet& obj, double c, int probes,
                                 double box_radius, Rng& rng) {
  const int d = obj.dimension();
  // One fixed perturbation per agent; the same directions are used at both
  // probe points so the ratio isolates the view dependence.
  std::vector<Vector> deltas;
  deltas.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Vector signs(d);
    sample_signs(rng, signs);
    deltas.push_back(std::move(signs));
  }

  Vector x(d), y(d), gx(d), gy(d), plus(d), minus(d);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    for (int k = 0; k < d; ++k) {
      x[k] = uniform(rng, -box_radius, box_radius);
      y[k] = uniform(rng, -box_radius, box_radius);
    }
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    for (int i = 0; i < d; ++i) {
      const Vector& signs = deltas[static_cast<std::size_t>(i)];
      gx[i] = perturbed_difference(obj, i, x, signs, c, plus, minus) * signs[i] / (2.0 * c);
      gy[i] = perturbed_difference(obj, i, y, signs, c, plus, minus) * signs[i] / (2.0 * c);
    }
    worst = std::max(worst, (gx - gy).norm() / dist);
  }
  return worst;
}

}  // namespace dspg
