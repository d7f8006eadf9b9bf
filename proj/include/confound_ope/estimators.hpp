#pragma once

// Off-policy value estimators over logged bandit feedback.
//
// Every estimator here takes a context-free target policy. Estimators that see
// only the censored log (action, reward) are what a practitioner can compute when
// the logging policy and its covariates are unobservable; ideal IPS additionally
// needs the per-record true propensity and exists for comparison.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confound_ope/core.hpp"

namespace confound_ope {

struct MarginalPropensities {
    enum class Source { Empirical, Asymptotic, Supplied };

    std::vector<double> probs;
    Source source = Source::Supplied;

    // Throws ValidationError unless entries are >= 0 and sum to 1 within 1e-12.
    static MarginalPropensities make(std::vector<double> probs, Source source);
};

struct EstimateReport {
    std::string estimator;
    std::string target; // label, filled by callers that know it
    double value = 0.0;
    std::optional<double> std_error;
    std::size_t n = 0;
};

// pi0_hat(a) = count(a)/N.
MarginalPropensities estimate_propensities(std::span<const CensoredLogRecord> log,
                                           std::size_t num_actions);

// Per-action mean reward; nullopt where the action never appears.
std::vector<std::optional<double>> dm_action_rewards(std::span<const CensoredLogRecord> log,
                                                     std::size_t num_actions);

EstimateReport dm_value(std::span<const CensoredLogRecord> log, const Policy& target);

EstimateReport ips_ideal_value(std::span<const FullLogRecord> log, const Policy& target);

EstimateReport ips_estimated_value(std::span<const CensoredLogRecord> log, const Policy& target,
                                   const MarginalPropensities& props);

// Self-normalised IPS. std_error is always empty.
EstimateReport snips_value(std::span<const CensoredLogRecord> log, const Policy& target,
                           const MarginalPropensities& props);

// `estimator,target,value,std_error,n`; std_error is an empty field when absent.
void write_report_csv_header(std::ostream& os);
void write_report_csv_row(std::ostream& os, const EstimateReport& report);

} // namespace confound_ope
