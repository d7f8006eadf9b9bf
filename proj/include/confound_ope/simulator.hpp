#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "confound_ope/core.hpp"

namespace confound_ope {

// SplitMix64 (Steele, Lea & Flood 2014): a Weyl-sequence counter passed through a
// 64-bit finalizer. Output i is mix(seed + (i+1) * 0x9E3779B97F4A7C15), so streams
// are reproducible in any language from the seed alone.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()() { return next(); }

private:
    std::uint64_t state_;
};

// Independent stream seed for task `index` under `master_seed`.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

struct SimulationConfig {
    std::size_t num_samples = 1;
    std::uint64_t seed = 0;
};

// Draws x ~ P(X), a ~ pi0(.|x), r ~ Bernoulli(E[R|x,a]), consuming exactly three
// uniforms per record in that order.
FullLog sample_full_log(const EnvironmentSpec& env, const SimulationConfig& config);

CensoredLog censor(std::span<const FullLogRecord> log);

// Entry a is count(a)/N. Actions must be < num_actions.
std::vector<double> empirical_frequencies(std::span<const CensoredLogRecord> log,
                                          std::size_t num_actions);
std::vector<double> empirical_frequencies(std::span<const FullLogRecord> log,
                                          std::size_t num_actions);

std::vector<std::size_t> action_counts(std::span<const CensoredLogRecord> log,
                                       std::size_t num_actions);

// Smallest M covering every action id in the log.
std::size_t infer_num_actions(std::span<const CensoredLogRecord> log);
std::size_t infer_num_actions(std::span<const FullLogRecord> log);

// CSV: `context,action,reward,propensity` (propensity at 17 significant digits)
// or `action,reward`.
void write_log_csv(std::ostream& os, std::span<const FullLogRecord> log);
void write_log_csv(std::ostream& os, std::span<const CensoredLogRecord> log);

struct ParsedLog {
    bool has_context = false; // true when the file carried the full schema
    FullLog full;             // populated when has_context
    CensoredLog censored;     // always populated
};

ParsedLog read_log_csv(std::istream& is);

} // namespace confound_ope
