#include "confound_ope/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "confound_ope/text.hpp"

namespace confound_ope {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Inverse-CDF draw. Falls back to the last positive-mass index if rounding
// leaves u above the final cumulative sum.
std::uint32_t draw_categorical(std::span<const double> probs, double u) {
    double cumulative = 0.0;
    std::uint32_t last_positive = 0;
    for (std::uint32_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cumulative += probs[i];
        last_positive = i;
        if (u < cumulative) return i;
    }
    return last_positive;
}

template <typename Record>
std::vector<double> frequencies_impl(std::span<const Record> log, std::size_t num_actions) {
    if (log.empty()) throw EmptyInputError("empirical frequencies of an empty log");
    std::vector<std::size_t> counts(num_actions, 0);
    for (const auto& r : log) {
        if (r.action >= num_actions) {
            throw RangeError("logged action " + std::to_string(r.action) + " out of range for " +
                             std::to_string(num_actions) + " actions");
        }
        ++counts[r.action];
    }
    std::vector<double> freq(num_actions);
    const double n = static_cast<double>(log.size());
    for (std::size_t a = 0; a < num_actions; ++a) {
        freq[a] = static_cast<double>(counts[a]) / n;
    }
    return freq;
}

} // namespace

std::uint64_t SplitMix64::next() {
    state_ += kGolden;
    return mix64(state_);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(mix64(master_seed) ^ mix64(index + kGolden));
}

FullLog sample_full_log(const EnvironmentSpec& env, const SimulationConfig& config) {
    require_valid(env);
    if (config.num_samples < 1) throw ValidationError("num_samples must be at least 1");

    SplitMix64 rng(config.seed);
    FullLog log;
    log.reserve(config.num_samples);
    for (std::size_t i = 0; i < config.num_samples; ++i) {
        const double u_context = rng.uniform();
        const double u_action = rng.uniform();
        const double u_reward = rng.uniform();
        const ContextId x = draw_categorical(env.context_probs, u_context);
        const ActionId a = draw_categorical(env.logging_policy.row(x), u_action);
        const std::uint8_t r = u_reward < env.reward_means(x, a) ? 1 : 0;
        log.push_back({x, a, r, env.logging_policy(x, a)});
    }
    return log;
}

CensoredLog censor(std::span<const FullLogRecord> log) {
    CensoredLog out;
    out.reserve(log.size());
    for (const auto& r : log) out.push_back({r.action, r.reward});
    return out;
}

std::vector<double> empirical_frequencies(std::span<const CensoredLogRecord> log,
                                          std::size_t num_actions) {
    return frequencies_impl(log, num_actions);
}

std::vector<double> empirical_frequencies(std::span<const FullLogRecord> log,
                                          std::size_t num_actions) {
    return frequencies_impl(log, num_actions);
}

std::vector<std::size_t> action_counts(std::span<const CensoredLogRecord> log,
                                       std::size_t num_actions) {
    std::vector<std::size_t> counts(num_actions, 0);
    for (const auto& r : log) {
        if (r.action >= num_actions) {
            throw RangeError("logged action " + std::to_string(r.action) + " out of range");
        }
        ++counts[r.action];
    }
    return counts;
}

std::size_t infer_num_actions(std::span<const CensoredLogRecord> log) {
    std::size_t m = 0;
    for (const auto& r : log) m = std::max<std::size_t>(m, r.action + 1);
    return m;
}

std::size_t infer_num_actions(std::span<const FullLogRecord> log) {
    std::size_t m = 0;
    for (const auto& r : log) m = std::max<std::size_t>(m, r.action + 1);
    return m;
}

void write_log_csv(std::ostream& os, std::span<const FullLogRecord> log) {
    os << "context,action,reward,propensity\n";
    for (const auto& r : log) {
        os << r.context << ',' << r.action << ',' << static_cast<int>(r.reward) << ','
           << format_double(r.logged_propensity) << '\n';
    }
}

void write_log_csv(std::ostream& os, std::span<const CensoredLogRecord> log) {
    os << "action,reward\n";
    for (const auto& r : log) {
        os << r.action << ',' << static_cast<int>(r.reward) << '\n';
    }
}

ParsedLog read_log_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("log CSV is empty (no header)");
    line = trim(line);
    ParsedLog out;
    if (line == "context,action,reward,propensity") {
        out.has_context = true;
    } else if (line != "action,reward") {
        throw ValidationError("unrecognised log CSV header: '" + line + "'");
    }

    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        const std::size_t expected = out.has_context ? 4 : 2;
        if (fields.size() != expected) {
            throw ValidationError("log CSV line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected) + " fields");
        }
        const std::size_t off = out.has_context ? 1 : 0;
        const auto action = parse_uint(fields[off], "action");
        const auto reward = parse_uint(fields[off + 1], "reward");
        if (reward > 1) {
            throw ValidationError("log CSV line " + std::to_string(line_no) +
                                  ": reward must be 0 or 1");
        }
        const CensoredLogRecord c{static_cast<ActionId>(action),
                                  static_cast<std::uint8_t>(reward)};
        out.censored.push_back(c);
        if (out.has_context) {
            const auto context = parse_uint(fields[0], "context");
            const double p = parse_double(fields[3], "propensity");
            if (!(p > 0.0 && p <= 1.0)) {
                throw ValidationError("log CSV line " + std::to_string(line_no) +
                                      ": propensity must lie in (0,1]");
            }
            out.full.push_back({static_cast<ContextId>(context), c.action, c.reward, p});
        }
    }
    return out;
}

} // namespace confound_ope
