#include "confound_ope/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "confound_ope/simulator.hpp"
#include "confound_ope/text.hpp"

namespace confound_ope::diagnostics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string action_label(std::size_t a) { return "a" + std::to_string(a); }

double z_score(double deviation, double std_error) {
    if (std_error > 0.0) return deviation / std_error;
    if (deviation == 0.0) return 0.0;
    return deviation > 0.0 ? kInf : -kInf;
}

DiagnosticEntry z_entry(std::string label, double statistic, double expected, double std_error,
                        double tolerance) {
    const double z = z_score(statistic - expected, std_error);
    return {std::move(label), statistic, expected, z,
            std::fabs(z) <= tolerance ? Verdict::Pass : Verdict::Fail};
}

DiagnosticResult finish(std::string name, std::vector<DiagnosticEntry> entries, double tolerance) {
    DiagnosticResult r{std::move(name), std::move(entries), tolerance, Verdict::Pass};
    for (const auto& e : r.entries) {
        if (e.verdict == Verdict::Fail) r.verdict = Verdict::Fail;
    }
    return r;
}

void require_nonempty(std::size_t n, const char* test) {
    if (n == 0) throw EmptyInputError(std::string(test) + " on an empty log");
}

// Per-record terms: compensated mean and sample standard error.
struct Moments {
    CompensatedSum sum;
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double t) {
        sum.add(t);
        ++n;
        const double d = t - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (t - mean);
    }
    double value() const { return sum.value() / static_cast<double>(n); }
    double std_error() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

// Standard error of the mean of a discrete variable taking value v_a with
// empirical frequency f_a (the remaining mass sits at zero).
double grouped_std_error(std::span<const double> freq, std::span<const double> values,
                         double mean, std::size_t n) {
    if (n < 2) return 0.0;
    double zero_mass = 1.0;
    double ss = 0.0;
    for (std::size_t a = 0; a < freq.size(); ++a) {
        if (freq[a] == 0.0) continue;
        ss += freq[a] * (values[a] - mean) * (values[a] - mean);
        zero_mass -= freq[a];
    }
    if (zero_mass > 0.0) ss += zero_mass * mean * mean;
    const double var = ss * static_cast<double>(n) / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
}

} // namespace

const char* to_string(Verdict v) { return v == Verdict::Pass ? "pass" : "fail"; }

double critical_z(double significance) {
    if (!(significance > 0.0 && significance < 1.0)) {
        throw RangeError("significance must lie in (0,1)");
    }
    // Bisection on the two-sided tail erfc(z / sqrt 2), which decreases in z.
    double lo = 0.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > significance) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

DiagnosticResult arithmetic_mean_test(std::span<const CensoredLogRecord> log,
                                      const MarginalPropensities& props,
                                      const DiagnosticOptions& options) {
    require_nonempty(log.size(), "arithmetic mean test");
    const double tol = critical_z(options.significance);
    const auto freq = empirical_frequencies(log, props.probs.size());
    const double n = static_cast<double>(log.size());
    std::vector<DiagnosticEntry> entries;
    for (std::size_t a = 0; a < freq.size(); ++a) {
        const double q = props.probs[a];
        entries.push_back(z_entry(action_label(a), freq[a], q, std::sqrt(q * (1.0 - q) / n), tol));
    }
    return finish("arithmetic_mean", std::move(entries), tol);
}

DiagnosticResult arithmetic_mean_test(std::span<const FullLogRecord> log,
                                      const Table& logging_policy,
                                      const DiagnosticOptions& options) {
    require_nonempty(log.size(), "arithmetic mean test");
    const double tol = critical_z(options.significance);
    const std::size_t m = logging_policy.cols();
    const auto freq = empirical_frequencies(log, m);
    std::vector<CompensatedSum> mean_prop(m);
    std::vector<double> variance(m, 0.0);
    for (const auto& r : log) {
        if (r.context >= logging_policy.rows()) {
            throw RangeError("logged context " + std::to_string(r.context) + " out of range");
        }
        for (std::size_t a = 0; a < m; ++a) {
            const double p = logging_policy(r.context, a);
            mean_prop[a].add(p);
            variance[a] += p * (1.0 - p);
        }
    }
    const double n = static_cast<double>(log.size());
    std::vector<DiagnosticEntry> entries;
    for (std::size_t a = 0; a < m; ++a) {
        entries.push_back(z_entry(action_label(a), freq[a], mean_prop[a].value() / n,
                                  std::sqrt(variance[a]) / n, tol));
    }
    return finish("arithmetic_mean", std::move(entries), tol);
}

DiagnosticResult harmonic_mean_test(std::span<const CensoredLogRecord> log,
                                    const MarginalPropensities& props,
                                    const DiagnosticOptions& options) {
    require_nonempty(log.size(), "harmonic mean test");
    const double tol = critical_z(options.significance);
    const std::size_t m = props.probs.size();
    const auto freq = empirical_frequencies(log, m);
    std::vector<DiagnosticEntry> entries;
    for (std::size_t a = 0; a < m; ++a) {
        const double q = props.probs[a];
        if (q == 0.0) {
            if (freq[a] > 0.0) {
                throw SupportError("harmonic mean test: action " + std::to_string(a) +
                                   " is logged with zero propensity");
            }
            continue;
        }
        // Grouped form of (1/N) sum_i 1{a_i=a}/q: exactly 1 when q is the counted frequency.
        const double h = freq[a] / q;
        const double value = 1.0 / q;
        const double se = grouped_std_error(std::span(&freq[a], 1), std::span(&value, 1), h,
                                            log.size());
        entries.push_back(z_entry(action_label(a), h, 1.0, se, tol));
    }
    return finish("harmonic_mean", std::move(entries), tol);
}

DiagnosticResult harmonic_mean_test(std::span<const FullLogRecord> log,
                                    const DiagnosticOptions& options) {
    require_nonempty(log.size(), "harmonic mean test");
    const double tol = critical_z(options.significance);
    const std::size_t m = infer_num_actions(log);
    std::vector<Moments> moments(m);
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& r = log[i];
        if (!(r.logged_propensity > 0.0)) {
            throw SupportError("harmonic mean test: record " + std::to_string(i) +
                               " has zero propensity");
        }
        for (std::size_t a = 0; a < m; ++a) {
            moments[a].add(r.action == a ? 1.0 / r.logged_propensity : 0.0);
        }
    }
    std::vector<DiagnosticEntry> entries;
    for (std::size_t a = 0; a < m; ++a) {
        entries.push_back(
            z_entry(action_label(a), moments[a].value(), 1.0, moments[a].std_error(), tol));
    }
    return finish("harmonic_mean", std::move(entries), tol);
}

DiagnosticResult control_variate_test(std::span<const CensoredLogRecord> log,
                                      const MarginalPropensities& props, const NamedPolicy& target,
                                      const DiagnosticOptions& options) {
    require_nonempty(log.size(), "control variate test");
    const double tol = critical_z(options.significance);
    const auto pi = target.policy.marginal();
    const std::size_t m = props.probs.size();
    if (pi.size() != m) throw ValidationError("target and propensities disagree on action count");
    const auto freq = empirical_frequencies(log, m);

    // Grouped form sum_a pi(a) (n_a/N) / q_a of the mean importance weight.
    std::vector<double> weight(m, 0.0);
    CompensatedSum stat;
    for (std::size_t a = 0; a < m; ++a) {
        if (pi[a] == 0.0 || freq[a] == 0.0) continue;
        const double q = props.probs[a];
        if (!(q > 0.0)) {
            throw SupportError("control variate test: action " + std::to_string(a) +
                               " is logged with zero propensity");
        }
        weight[a] = pi[a] / q;
        stat.add(pi[a] * (freq[a] / q));
    }
    const double s = stat.value();
    const double se = grouped_std_error(freq, weight, s, log.size());
    return finish("control_variate", {z_entry(target.name, s, 1.0, se, tol)}, tol);
}

DiagnosticResult control_variate_test(std::span<const FullLogRecord> log,
                                      const NamedPolicy& target,
                                      const DiagnosticOptions& options) {
    require_nonempty(log.size(), "control variate test");
    const double tol = critical_z(options.significance);
    const auto pi = target.policy.marginal();
    Moments w;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& r = log[i];
        if (r.action >= pi.size()) throw RangeError("logged action out of range for target");
        if (pi[r.action] == 0.0) {
            w.add(0.0);
            continue;
        }
        if (!(r.logged_propensity > 0.0)) {
            throw SupportError("control variate test: record " + std::to_string(i) +
                               " has zero propensity");
        }
        w.add(pi[r.action] / r.logged_propensity);
    }
    return finish("control_variate", {z_entry(target.name, w.value(), 1.0, w.std_error(), tol)},
                  tol);
}

DiagnosticResult support_check(const MarginalPropensities& props, const NamedPolicy& target) {
    const auto pi = target.policy.marginal();
    if (pi.size() != props.probs.size()) {
        throw ValidationError("target and propensities disagree on action count");
    }
    std::vector<DiagnosticEntry> entries;
    for (std::size_t a = 0; a < pi.size(); ++a) {
        if (pi[a] == 0.0) continue;
        const double q = props.probs[a];
        entries.push_back({target.name + ":" + action_label(a), q, 0.0, std::nullopt,
                           q > 0.0 ? Verdict::Pass : Verdict::Fail});
    }
    return finish("support", std::move(entries), 0.0);
}

DiagnosticResult support_check(const MarginalPropensities& props, const NamedPolicy& target,
                               std::span<const FullLogRecord> full_log) {
    auto result = support_check(props, target);
    const auto pi = target.policy.marginal();
    const std::size_t m = pi.size();
    std::size_t k = 0;
    for (const auto& r : full_log) k = std::max<std::size_t>(k, r.context + 1);
    std::vector<std::size_t> context_count(k, 0);
    std::vector<std::size_t> pair_count(k * m, 0);
    for (const auto& r : full_log) {
        if (r.action >= m) throw RangeError("logged action out of range for target");
        ++context_count[r.context];
        ++pair_count[r.context * m + r.action];
    }
    for (std::size_t x = 0; x < k; ++x) {
        if (context_count[x] == 0) continue;
        for (std::size_t a = 0; a < m; ++a) {
            if (pi[a] == 0.0) continue;
            const double share = static_cast<double>(pair_count[x * m + a]) /
                                 static_cast<double>(context_count[x]);
            result.entries.push_back({target.name + ":" + action_label(a) + "@x" +
                                          std::to_string(x),
                                      share, 0.0, std::nullopt,
                                      share > 0.0 ? Verdict::Pass : Verdict::Fail});
        }
    }
    return finish(std::move(result.test_name), std::move(result.entries), 0.0);
}

DiagnosticsReport make_report(std::vector<DiagnosticResult> results) {
    DiagnosticsReport report{std::move(results), Verdict::Pass};
    for (const auto& r : report.results) {
        if (r.verdict == Verdict::Fail) report.verdict = Verdict::Fail;
    }
    return report;
}

DiagnosticsReport run_all(std::span<const CensoredLogRecord> log,
                          const MarginalPropensities& props,
                          const std::vector<NamedPolicy>& targets,
                          const DiagnosticOptions& options) {
    std::vector<DiagnosticResult> results;
    results.push_back(arithmetic_mean_test(log, props, options));
    results.push_back(harmonic_mean_test(log, props, options));
    for (const auto& t : targets) {
        results.push_back(control_variate_test(log, props, t, options));
        results.push_back(support_check(props, t));
    }
    return make_report(std::move(results));
}

DiagnosticsReport run_all(std::span<const FullLogRecord> log,
                          const std::vector<NamedPolicy>& targets, const Table* logging_policy,
                          const DiagnosticOptions& options) {
    require_nonempty(log.size(), "diagnostics");
    std::vector<DiagnosticResult> results;
    if (logging_policy) results.push_back(arithmetic_mean_test(log, *logging_policy, options));
    results.push_back(harmonic_mean_test(log, options));
    const auto counted = estimate_propensities(censor(log), infer_num_actions(log));
    for (const auto& t : targets) {
        if (t.policy.num_actions() != counted.probs.size()) {
            throw ValidationError("target " + t.name + " disagrees with the log on action count");
        }
        results.push_back(control_variate_test(log, t, options));
        results.push_back(support_check(counted, t, log));
    }
    return make_report(std::move(results));
}

void write_report_csv(std::ostream& os, const DiagnosticsReport& report) {
    os << "test,action_or_target,statistic,expected,z,verdict\n";
    for (const auto& r : report.results) {
        for (const auto& e : r.entries) {
            os << r.test_name << ',' << e.label << ',' << format_double(e.statistic) << ','
               << format_double(e.expected) << ',';
            if (e.z) os << format_double(*e.z);
            os << ',' << to_string(e.verdict) << '\n';
        }
    }
}

void write_report_text(std::ostream& os, const DiagnosticsReport& report) {
    os << "diagnostics: " << (report.verdict == Verdict::Pass ? "PASS" : "FAIL") << '\n';
    for (const auto& r : report.results) {
        os << "  " << std::left << std::setw(16) << r.test_name << ' '
           << (r.verdict == Verdict::Pass ? "PASS" : "FAIL");
        if (r.tolerance > 0.0) os << "  (|z| <= " << std::setprecision(4) << r.tolerance << ')';
        os << '\n';
        for (const auto& e : r.entries) {
            os << "    " << std::left << std::setw(14) << e.label << " statistic "
               << std::setprecision(6) << e.statistic << "  expected " << e.expected;
            if (e.z) os << "  z " << std::setprecision(4) << *e.z;
            os << "  " << to_string(e.verdict) << '\n';
        }
    }
}

} // namespace confound_ope::diagnostics
