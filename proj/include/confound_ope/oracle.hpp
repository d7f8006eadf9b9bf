#pragma once

// Exact quantities by enumeration over a tabular environment. The oracle reads
// the confounder distribution directly; it is ground truth for the simulation,
// not an estimator.

#include <functional>
#include <optional>

#include "confound_ope/core.hpp"
#include "confound_ope/estimators.hpp"

namespace confound_ope::oracle {

// sum_x P(x) sum_a pi(a|x) E[R|x,a]. Accepts contextual targets.
double true_policy_value(const EnvironmentSpec& env, const Policy& target);

// E[R | do(A=a)] = sum_x P(x) E[R|x,a].
double do_value(const EnvironmentSpec& env, ActionId action);

// E[R | A=a] = sum_x P(x|a) E[R|x,a] with P(x|a) proportional to P(x) pi0(a|x).
double observational_value(const EnvironmentSpec& env, ActionId action);

// P(A=a) = sum_x P(x) pi0(a|x).
MarginalPropensities asymptotic_propensities(const EnvironmentSpec& env);

// Large-N limit of estimated IPS: sum_a pi(a) E[R|A=a].
double asymptotic_estimated_ips(const EnvironmentSpec& env, const Policy& target);

// E[R pi(A) (1/pi0_hat(A) - 1/pi0(A|X))] enumerated over (x, a), with pi0_hat the
// asymptotic marginal. Terms with pi(a) = 0 or P(x) = 0 are skipped.
double estimated_ips_bias(const EnvironmentSpec& env, const Policy& target);

// First sign change of f on [lo, hi]: scans `scan_points` equally spaced points,
// then bisects the first bracketing interval to `tolerance`.
std::optional<double> find_sign_change(const std::function<double(double)>& f, double lo,
                                       double hi, double tolerance = 1e-10,
                                       int scan_points = 1000);

// Value gap under estimated IPS, asymptotic_estimated_ips(pi_a1) - asymptotic_estimated_ips(pi_a0),
// for the two-context guiding example.
double asymptotic_estimated_difference(double alpha, double epsilon);

// Epsilon in (0, 0.5) at which the estimated-IPS gap changes sign, if any.
std::optional<double> crossover_epsilon(double alpha);

} // namespace confound_ope::oracle
