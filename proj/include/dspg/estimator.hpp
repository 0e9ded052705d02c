#pragma once

#include <cstdint>

#include "dspg/objective.hpp"
#include "dspg/random.hpp"

namespace dspg {

// Simultaneous-perturbation direction: d independent symmetric Bernoulli
// signs, entries exactly -1 or +1.
struct PerturbationVector {
  Vector signs;

  int dimension() const noexcept { return static_cast<int>(signs.size()); }
};

// Consumes exactly d engine calls from `rng`.
PerturbationVector sample_perturbation(Rng& rng, int d);

// In-place variant for callers that reuse a buffer across iterations.
void sample_signs(Rng& rng, Vector& signs);

// F(view + c*delta) - F(view - c*delta) for agent's own function, formed in
// the caller-provided scratch vectors. Exactly two objective evaluations;
// throws NumericalOverflowError (carrying the offending point) if either
// comes back non-finite. Every per-coordinate quotient divides this one
// numerator by 2*c*delta(k).
double perturbed_difference(const ObjectiveSet& obj, int agent, const Vector& view,
                            const Vector& signs, double c, Vector& scratch_plus,
                            Vector& scratch_minus);

// Two-measurement estimate of dF_agent/dx(agent) at a possibly stale view:
// [F(view + c*delta) - F(view - c*delta)] / (2 c delta(agent)).
double dspg_estimate(const ObjectiveSet& obj, int agent, const Vector& view,
                     const PerturbationVector& delta, double c);

// Centralized baseline: one shared perturbation updates every coordinate of x
// against a single objective f. c_n and gamma_n are per-call so the caller
// owns the decay schedule.
Vector spsa_classic_step(const Vector& x, const ObjectiveSet::Fn& f, double gamma_n,
                         double c_n, Rng& rng);

struct EstimatorDiagnostics {
  Vector mean;           // E over sign patterns of the per-coordinate quotient
  Vector variance;       // corresponding exact variance
  Vector true_gradient;  // analytic oracle at x
  Vector bias;           // mean - true_gradient
};

// Enumeration is 2^d evaluation pairs; beyond this, use sample_diagnostics.
inline constexpr int kEnumerationLimit = 20;

// Exact mean/variance of the quotient over all 2^d equiprobable sign
// patterns. Requires the gradient oracle for agent (to fill true_gradient)
// and d <= kEnumerationLimit.
EstimatorDiagnostics enumerate_diagnostics(const ObjectiveSet& obj, int agent,
                                           const Vector& x, double c);

struct SampledDiagnostics {
  Vector mean;
  Vector variance;   // sample variance, n-1 normalization
  Vector std_error;  // of the mean
  std::int64_t samples = 0;
};

// Monte-Carlo fallback for dimensions past the enumeration limit.
SampledDiagnostics sample_diagnostics(const ObjectiveSet& obj, int agent, const Vector& x,
                                      double c, std::int64_t samples, Rng& rng);

// 4 * sum_{j != agent} (dF_agent/dx(j))^2: the quotient-variance upper bound
// (its remainder term vanishes for quadratics). Needs the gradient oracle.
double variance_bound(const ObjectiveSet& obj, int agent, const Vector& x);

// Max observed ratio ||ghat(x) - ghat(y)|| / ||x - y|| over random probe
// pairs in [-box_radius, box_radius]^d with per-agent perturbations held
// fixed. The stacked estimator inherits sqrt(d) L / c from an L-Lipschitz
// objective family.
double estimator_lipschitz_check(const ObjectiveSet& obj, double c, int probes,
                                 double box_radius, Rng& rng);

}  // namespace dspg
