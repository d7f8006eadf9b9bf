#include "confound_ope/estimators.hpp"

#include <cmath>
#include <ostream>

#include "confound_ope/simulator.hpp"
#include "confound_ope/text.hpp"

namespace confound_ope {

namespace {

// Compensated mean plus Welford variance of a stream of per-record terms.
class TermAccumulator {
public:
    void add(double t) {
        sum_.add(t);
        ++n_;
        const double delta = t - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (t - mean_);
    }
    double mean() const { return sum_.value() / static_cast<double>(n_); }
    double std_error() const {
        if (n_ < 2) return 0.0;
        const double var = m2_ / static_cast<double>(n_ - 1);
        return std::sqrt(var / static_cast<double>(n_));
    }
    std::size_t count() const { return n_; }

private:
    CompensatedSum sum_;
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

void check_target_width(const Policy& target, std::size_t num_actions) {
    if (target.num_actions() != num_actions) {
        throw ValidationError("target has " + std::to_string(target.num_actions()) +
                              " actions, propensities have " + std::to_string(num_actions));
    }
}

void check_action(ActionId a, std::size_t num_actions) {
    if (a >= num_actions) {
        throw RangeError("logged action " + std::to_string(a) + " out of range for " +
                         std::to_string(num_actions) + " actions");
    }
}

} // namespace

MarginalPropensities MarginalPropensities::make(std::vector<double> probs, Source source) {
    if (probs.empty()) throw ValidationError("propensities are empty");
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("propensity " + format_double(p) + " not in [0,1]");
        }
    }
    const double s = compensated_sum(probs);
    if (std::fabs(s - 1.0) > kProbabilityTolerance) {
        throw ValidationError("propensities sum to " + format_double(s));
    }
    return {std::move(probs), source};
}

MarginalPropensities estimate_propensities(std::span<const CensoredLogRecord> log,
                                           std::size_t num_actions) {
    return {empirical_frequencies(log, num_actions), MarginalPropensities::Source::Empirical};
}

std::vector<std::optional<double>> dm_action_rewards(std::span<const CensoredLogRecord> log,
                                                     std::size_t num_actions) {
    if (log.empty()) throw EmptyInputError("direct method on an empty log");
    std::vector<std::size_t> counts(num_actions, 0);
    std::vector<std::size_t> successes(num_actions, 0);
    for (const auto& r : log) {
        check_action(r.action, num_actions);
        ++counts[r.action];
        successes[r.action] += r.reward;
    }
    std::vector<std::optional<double>> out(num_actions);
    for (std::size_t a = 0; a < num_actions; ++a) {
        if (counts[a] > 0) {
            out[a] = static_cast<double>(successes[a]) / static_cast<double>(counts[a]);
        }
    }
    return out;
}

// The standard error combines per-action binomial errors,
// sqrt(sum_a pi(a)^2 s_a^2 / n_a), with s_a^2 the sample variance of rewards.
EstimateReport dm_value(std::span<const CensoredLogRecord> log, const Policy& target) {
    const auto pi = target.marginal();
    const std::size_t m = pi.size();
    const auto rewards = dm_action_rewards(log, m);
    const auto counts = action_counts(log, m);

    CompensatedSum value;
    double variance = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        if (pi[a] == 0.0) continue;
        if (!rewards[a]) {
            throw UndefinedEstimateError("direct method undefined: target puts mass on action " +
                                         std::to_string(a) + ", which never appears in the log");
        }
        const double mean = *rewards[a];
        value.add(pi[a] * mean);
        const double n = static_cast<double>(counts[a]);
        if (counts[a] > 1) {
            const double s2 = mean * (1.0 - mean) * n / (n - 1.0);
            variance += pi[a] * pi[a] * s2 / n;
        }
    }
    return {"dm", "", value.value(), std::sqrt(variance), log.size()};
}

EstimateReport ips_ideal_value(std::span<const FullLogRecord> log, const Policy& target) {
    if (log.empty()) throw EmptyInputError("ideal IPS on an empty log");
    const auto pi = target.marginal();
    TermAccumulator acc;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& r = log[i];
        check_action(r.action, pi.size());
        if (!(r.logged_propensity > 0.0)) {
            throw SupportError("record " + std::to_string(i) + " has zero logged propensity");
        }
        const double w = pi[r.action] / r.logged_propensity;
        acc.add(r.reward ? w : 0.0);
    }
    return {"ips_ideal", "", acc.mean(), acc.std_error(), log.size()};
}

EstimateReport ips_estimated_value(std::span<const CensoredLogRecord> log, const Policy& target,
                                   const MarginalPropensities& props) {
    if (log.empty()) throw EmptyInputError("estimated IPS on an empty log");
    const auto pi = target.marginal();
    check_target_width(target, props.probs.size());
    TermAccumulator acc;
    for (const auto& r : log) {
        check_action(r.action, pi.size());
        const double p = pi[r.action];
        if (p == 0.0) {
            acc.add(0.0);
            continue;
        }
        const double q = props.probs[r.action];
        if (!(q > 0.0)) {
            throw SupportError("estimated propensity of action " + std::to_string(r.action) +
                               " is zero but the target needs it");
        }
        acc.add(r.reward ? p / q : 0.0);
    }
    return {"ips_estimated", "", acc.mean(), acc.std_error(), log.size()};
}

EstimateReport snips_value(std::span<const CensoredLogRecord> log, const Policy& target,
                           const MarginalPropensities& props) {
    if (log.empty()) throw EmptyInputError("SNIPS on an empty log");
    const auto pi = target.marginal();
    check_target_width(target, props.probs.size());
    CompensatedSum weighted_rewards;
    CompensatedSum weights;
    for (const auto& r : log) {
        check_action(r.action, pi.size());
        const double p = pi[r.action];
        if (p == 0.0) continue;
        const double q = props.probs[r.action];
        if (!(q > 0.0)) {
            throw SupportError("estimated propensity of action " + std::to_string(r.action) +
                               " is zero but the target needs it");
        }
        const double w = p / q;
        weights.add(w);
        if (r.reward) weighted_rewards.add(w);
    }
    if (!(weights.value() > 0.0)) {
        throw UndefinedEstimateError("SNIPS undefined: importance weights sum to zero");
    }
    return {"snips", "", weighted_rewards.value() / weights.value(), std::nullopt, log.size()};
}

void write_report_csv_header(std::ostream& os) {
    os << "estimator,target,value,std_error,n\n";
}

void write_report_csv_row(std::ostream& os, const EstimateReport& report) {
    os << report.estimator << ',' << report.target << ',' << format_double(report.value) << ',';
    if (report.std_error) os << format_double(*report.std_error);
    os << ',' << report.n << '\n';
}

} // namespace confound_ope
