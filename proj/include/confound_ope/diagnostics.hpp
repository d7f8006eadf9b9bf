#pragma once

// Propensity-validation battery for logged bandit feedback: arithmetic and
// harmonic mean tests, the average-importance-weight control variate, and
// support checks.
//
// With counted marginal propensities every moment test holds exactly, whatever
// the confounding, so these checks cannot flag confounding bias. They do flag
// propensities that are simply wrong.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confound_ope/core.hpp"
#include "confound_ope/estimators.hpp"

namespace confound_ope::diagnostics {

enum class Verdict { Pass, Fail };

const char* to_string(Verdict v);

struct DiagnosticOptions {
    double significance = 0.001; // two-sided
};

// |z| threshold of a two-sided normal test at `significance`.
double critical_z(double significance);

struct DiagnosticEntry {
    std::string label; // "a0", "pi_a1", "a0@x1"
    double statistic = 0.0;
    double expected = 0.0;
    std::optional<double> z; // empty for support checks
    Verdict verdict = Verdict::Pass;
};

struct DiagnosticResult {
    std::string test_name;
    std::vector<DiagnosticEntry> entries;
    double tolerance = 0.0; // critical |z|; 0 for support checks
    Verdict verdict = Verdict::Pass;
};

struct DiagnosticsReport {
    std::vector<DiagnosticResult> results;
    Verdict verdict = Verdict::Pass;
};

struct NamedPolicy {
    std::string name;
    Policy policy;
};

// Empirical frequency n_a/N against the mean propensity (1/N) sum_i p_i(a).
DiagnosticResult arithmetic_mean_test(std::span<const CensoredLogRecord> log,
                                      const MarginalPropensities& props,
                                      const DiagnosticOptions& options = {});
// p_i(a) = logging_policy(x_i, a).
DiagnosticResult arithmetic_mean_test(std::span<const FullLogRecord> log,
                                      const Table& logging_policy,
                                      const DiagnosticOptions& options = {});

// H(a) = (1/N) sum_i 1{a_i = a} / p_i, expected 1.
DiagnosticResult harmonic_mean_test(std::span<const CensoredLogRecord> log,
                                    const MarginalPropensities& props,
                                    const DiagnosticOptions& options = {});
// Uses each record's logged propensity.
DiagnosticResult harmonic_mean_test(std::span<const FullLogRecord> log,
                                    const DiagnosticOptions& options = {});

// (1/N) sum_i pi(a_i) / p_i, expected 1.
DiagnosticResult control_variate_test(std::span<const CensoredLogRecord> log,
                                      const MarginalPropensities& props, const NamedPolicy& target,
                                      const DiagnosticOptions& options = {});
DiagnosticResult control_variate_test(std::span<const FullLogRecord> log,
                                      const NamedPolicy& target,
                                      const DiagnosticOptions& options = {});

// Fails on any action with pi(a) > 0 and propensity 0.
DiagnosticResult support_check(const MarginalPropensities& props, const NamedPolicy& target);
// Also audits contextual support from a full log: an observed context in which a
// target action never appears is reported as a violation.
DiagnosticResult support_check(const MarginalPropensities& props, const NamedPolicy& target,
                               std::span<const FullLogRecord> full_log);

// Arithmetic and harmonic tests, then a control-variate test and support check per target.
DiagnosticsReport run_all(std::span<const CensoredLogRecord> log,
                          const MarginalPropensities& props,
                          const std::vector<NamedPolicy>& targets,
                          const DiagnosticOptions& options = {});

// Audit with the logged per-record propensities. The arithmetic test runs only
// when the contextual logging table is supplied.
DiagnosticsReport run_all(std::span<const FullLogRecord> log,
                          const std::vector<NamedPolicy>& targets,
                          const Table* logging_policy = nullptr,
                          const DiagnosticOptions& options = {});

DiagnosticsReport make_report(std::vector<DiagnosticResult> results);

// `test,action_or_target,statistic,expected,z,verdict`
void write_report_csv(std::ostream& os, const DiagnosticsReport& report);
void write_report_text(std::ostream& os, const DiagnosticsReport& report);

} // namespace confound_ope::diagnostics
