#include "confound_ope/oracle.hpp"

#include <cmath>

namespace confound_ope::oracle {

namespace {

void check_action(const EnvironmentSpec& env, ActionId a) {
    if (a >= env.num_actions()) {
        throw RangeError("action " + std::to_string(a) + " out of range for " +
                         std::to_string(env.num_actions()) + " actions");
    }
}

void check_target(const EnvironmentSpec& env, const Policy& target) {
    if (target.num_actions() != env.num_actions()) {
        throw ValidationError("target has " + std::to_string(target.num_actions()) +
                              " actions, environment has " + std::to_string(env.num_actions()));
    }
    if (target.is_contextual() && target.num_contexts() != env.num_contexts()) {
        throw ValidationError("target has " + std::to_string(target.num_contexts()) +
                              " contexts, environment has " + std::to_string(env.num_contexts()));
    }
}

double action_marginal(const EnvironmentSpec& env, ActionId a) {
    CompensatedSum s;
    for (std::size_t x = 0; x < env.num_contexts(); ++x) {
        s.add(env.context_probs[x] * env.logging_policy(x, a));
    }
    return s.value();
}

} // namespace

double true_policy_value(const EnvironmentSpec& env, const Policy& target) {
    require_valid(env);
    check_target(env, target);
    CompensatedSum s;
    for (ContextId x = 0; x < env.num_contexts(); ++x) {
        for (ActionId a = 0; a < env.num_actions(); ++a) {
            s.add(env.context_probs[x] * action_prob(target, a, x) * env.reward_means(x, a));
        }
    }
    return s.value();
}

double do_value(const EnvironmentSpec& env, ActionId action) {
    require_valid(env);
    check_action(env, action);
    CompensatedSum s;
    for (std::size_t x = 0; x < env.num_contexts(); ++x) {
        s.add(env.context_probs[x] * env.reward_means(x, action));
    }
    return s.value();
}

double observational_value(const EnvironmentSpec& env, ActionId action) {
    require_valid(env);
    check_action(env, action);
    const double marginal = action_marginal(env, action);
    if (!(marginal > 0.0)) {
        throw SupportError("action " + std::to_string(action) +
                           " has zero probability under the logging policy");
    }
    CompensatedSum s;
    for (std::size_t x = 0; x < env.num_contexts(); ++x) {
        s.add(env.context_probs[x] * env.logging_policy(x, action) * env.reward_means(x, action));
    }
    return s.value() / marginal;
}

MarginalPropensities asymptotic_propensities(const EnvironmentSpec& env) {
    require_valid(env);
    std::vector<double> probs(env.num_actions());
    for (ActionId a = 0; a < env.num_actions(); ++a) probs[a] = action_marginal(env, a);
    return {std::move(probs), MarginalPropensities::Source::Asymptotic};
}

double asymptotic_estimated_ips(const EnvironmentSpec& env, const Policy& target) {
    require_valid(env);
    check_target(env, target);
    const auto pi = target.marginal();
    CompensatedSum s;
    for (ActionId a = 0; a < env.num_actions(); ++a) {
        if (pi[a] == 0.0) continue;
        s.add(pi[a] * observational_value(env, a));
    }
    return s.value();
}

double estimated_ips_bias(const EnvironmentSpec& env, const Policy& target) {
    require_valid(env);
    check_target(env, target);
    const auto pi = target.marginal();
    const auto marginal = asymptotic_propensities(env);
    CompensatedSum s;
    for (std::size_t x = 0; x < env.num_contexts(); ++x) {
        const double px = env.context_probs[x];
        if (px == 0.0) continue;
        for (ActionId a = 0; a < env.num_actions(); ++a) {
            if (pi[a] == 0.0) continue;
            const double p0 = env.logging_policy(x, a);
            if (!(p0 > 0.0)) {
                throw SupportError("logging propensity pi0(" + std::to_string(a) + "|" +
                                   std::to_string(x) + ") is zero on a contributing term");
            }
            const double weight_gap = 1.0 / marginal.probs[a] - 1.0 / p0;
            s.add(px * p0 * env.reward_means(x, a) * pi[a] * weight_gap);
        }
    }
    return s.value();
}

std::optional<double> find_sign_change(const std::function<double(double)>& f, double lo,
                                       double hi, double tolerance, int scan_points) {
    if (!(hi > lo) || scan_points < 1) throw ValidationError("empty search interval");
    double left = lo;
    double f_left = f(left);
    for (int i = 1; i <= scan_points; ++i) {
        const double right = lo + (hi - lo) * static_cast<double>(i) / scan_points;
        const double f_right = f(right);
        if (f_left == 0.0) return left;
        if ((f_left < 0.0) != (f_right < 0.0) || f_right == 0.0) {
            double a = left;
            double b = right;
            double fa = f_left;
            while (b - a > tolerance) {
                const double mid = 0.5 * (a + b);
                const double fm = f(mid);
                if (fm == 0.0) return mid;
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return 0.5 * (a + b);
        }
        left = right;
        f_left = f_right;
    }
    return std::nullopt;
}

double asymptotic_estimated_difference(double alpha, double epsilon) {
    const auto env = paper_env(alpha, epsilon);
    return asymptotic_estimated_ips(env, deterministic_policy(1, 2)) -
           asymptotic_estimated_ips(env, deterministic_policy(0, 2));
}

std::optional<double> crossover_epsilon(double alpha) {
    // Open interval: the endpoints themselves are excluded from the scan.
    constexpr double kEdge = 1e-9;
    return find_sign_change(
        [alpha](double eps) { return asymptotic_estimated_difference(alpha, eps); }, kEdge,
        0.5 - kEdge);
}

} // namespace confound_ope::oracle
