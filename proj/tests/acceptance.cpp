// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only
// Exit status is non-zero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "confound_ope/cli.hpp"
#include "confound_ope/diagnostics.hpp"
#include "confound_ope/estimators.hpp"
#include "confound_ope/harness.hpp"
#include "confound_ope/oracle.hpp"
#include "confound_ope/simulator.hpp"
#include "test_support.hpp"

using namespace confound_ope;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kLargeN = 2'000'000;
constexpr std::uint64_t kSeed = 20230917;
constexpr double kExact = 1e-12;
constexpr double kMcSigmas = 5.0;

const Policy kA0 = deterministic_policy(0, 2);
const Policy kA1 = deterministic_policy(1, 2);

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void note(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::note(bool ok, const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + buf);
    pass = pass && ok;
}

struct Estimate {
    double value;
    double std_error;
};

// value(pi_a1) - value(pi_a0) under estimated IPS, with the per-record standard error.
Estimate estimated_difference(const CensoredLog& log) {
    const auto q = estimate_propensities(log, 2).probs;
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (const auto& r : log) {
        const double w = r.action == 1 ? 1.0 / q[1] : -1.0 / q[0];
        const double x = w * r.reward;
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    return {mean, std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n))};
}

harness::SweepConfig column(double alpha, harness::Estimator e) {
    harness::SweepConfig c;
    c.alpha_values = {alpha};
    c.num_samples = kLargeN;
    c.replications = 1;
    c.master_seed = kSeed;
    c.estimators = {e};
    return c;
}

Outcome criterion_1() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    auto config = column(0.9, harness::Estimator::IpsEstimated);
    config.workers = 1;
    const auto cells = harness::run_sweep(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool signs = true;
    double last_negative = -1.0, first_positive = -1.0, d_neg = 0.0, d_pos = 0.0;
    for (const auto& c : cells) {
        const double eps = c.epsilon;
        if (eps < 0.045 && !(c.difference < 0.0)) {
            signs = false;
            o.note(false, "epsilon=%.2f difference %.6f not negative", eps, c.difference);
        }
        if (eps > 0.055 && !(c.difference > 0.0)) {
            signs = false;
            o.note(false, "epsilon=%.2f difference %.6f not positive", eps, c.difference);
        }
        if (c.difference < 0.0) {
            last_negative = eps;
            d_neg = c.difference;
        } else if (first_positive < 0.0 && last_negative >= 0.0) {
            first_positive = eps;
            d_pos = c.difference;
        }
    }
    o.note(signs, "difference negative for epsilon 0.01..0.04, positive for 0.06..0.5");

    const auto oracle_root = oracle::crossover_epsilon(0.9);
    if (!oracle_root || last_negative < 0.0 || first_positive < 0.0) {
        o.note(false, "no zero crossing found");
    } else {
        const double crossing = last_negative + (first_positive - last_negative) * (-d_neg) / (d_pos - d_neg);
        o.note(std::fabs(crossing - *oracle_root) <= 0.01,
               "empirical crossing %.5f vs oracle %.5f (1/22 = %.5f), tolerance 0.01", crossing,
               *oracle_root, 1.0 / 22.0);
    }
    o.note(seconds < 120.0, "alpha=0.9 column (50 cells, N=2e6) took %.1f s single-threaded, limit 120 s",
           seconds);
    return o;
}

Outcome criterion_2() {
    Outcome o;
    const auto env = paper_env(0.9, 0.05);
    const std::size_t reps = 200;
    std::vector<double> values;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto log = sample_full_log(env, {10'000, derive_seed(kSeed, r)});
        values.push_back(ips_ideal_value(log, kA0).value);
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= reps;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (reps - 1)) / std::sqrt(static_cast<double>(reps));
    const double truth = oracle::true_policy_value(env, kA0);
    o.note(std::fabs(mean - truth) < 3.0 * se, "ideal IPS mean %.6f vs true %.6f, |gap| %.6f < 3 SE = %.6f",
           mean, truth, std::fabs(mean - truth), 3.0 * se);

    double worst = 0.0, worst_eps = 0.0;
    for (const auto& c : harness::run_sweep(column(0.9, harness::Estimator::IpsIdeal))) {
        const double gap = std::fabs(c.difference - 0.6);
        if (gap > worst) {
            worst = gap;
            worst_eps = c.epsilon;
        }
    }
    o.note(worst <= 0.03, "ideal IPS difference curve: max |difference - 0.6| = %.5f at epsilon %.2f, limit 0.03",
           worst, worst_eps);
    return o;
}

Outcome criterion_3() {
    Outcome o;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> alpha(0.5, 1.0), eps(0.01, 0.99);
    double worst_identity = 0.0, worst_sigmas = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const double a = alpha(gen), e = eps(gen);
        const auto env = paper_env(a, e);
        for (const auto& t : {kA0, kA1, Policy::uniform(2)}) {
            const double gap = oracle::asymptotic_estimated_ips(env, t) - oracle::true_policy_value(env, t);
            worst_identity = std::max(worst_identity, std::fabs(oracle::estimated_ips_bias(env, t) - gap));
        }
        const auto log = censor(sample_full_log(env, {kLargeN, derive_seed(kSeed, i)}));
        const auto q = estimate_propensities(log, 2);
        for (const auto& t : {kA0, kA1}) {
            const auto r = ips_estimated_value(log, t, q);
            const double expected = oracle::true_policy_value(env, t) + oracle::estimated_ips_bias(env, t);
            const double sigmas = std::fabs(r.value - expected) / *r.std_error;
            if (sigmas > kMcSigmas) {
                o.note(false, "alpha=%.4f epsilon=%.4f: estimate %.6f vs %.6f (%.2f SE)", a, e, r.value,
                       expected, sigmas);
            }
            worst_sigmas = std::max(worst_sigmas, sigmas);
        }
    }
    o.note(worst_identity <= kExact, "bias enumeration vs value gap: max deviation %.3g, limit 1e-12",
           worst_identity);
    o.note(worst_sigmas <= kMcSigmas, "Monte-Carlo estimated IPS vs true + bias: max %.2f SE, limit 5",
           worst_sigmas);
    return o;
}

Outcome criterion_4() {
    Outcome o;
    std::mt19937_64 gen(4);
    double worst_identity = 0.0, worst_cv = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t m = 1 + gen() % 4;
        const std::size_t n = m + gen() % (201 - m);
        const auto log = testing::random_log_all_actions(gen, n, m);
        const auto target = testing::random_target(gen, m);
        const auto q = estimate_propensities(log, m);
        const double ips = ips_estimated_value(log, target, q).value;
        const double dm = dm_value(log, target).value;
        const double snips = snips_value(log, target, q).value;
        worst_identity = std::max({worst_identity, std::fabs(ips - dm), std::fabs(ips - snips)});
        const auto cv = diagnostics::control_variate_test(log, q, {"t", target});
        worst_cv = std::max(worst_cv, std::fabs(cv.entries[0].statistic - 1.0));
    }
    o.note(worst_identity <= kExact, "ips_estimated = dm = snips: max deviation %.3g, limit 1e-12",
           worst_identity);
    o.note(worst_cv <= kExact, "control variate = 1: max deviation %.3g, limit 1e-12", worst_cv);
    return o;
}

Outcome criterion_5() {
    Outcome o;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> alpha(0.55, 0.99), eps(0.01, 0.49);
    int failures = 0;
    double max_bias = 0.0, at_alpha = 0.0, at_eps = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double a = alpha(gen), e = eps(gen);
        const auto log = censor(sample_full_log(paper_env(a, e), {10'000, gen()}));
        const auto q = estimate_propensities(log, 2);
        const auto report = diagnostics::run_all(
            log, q, {{"pi_a0", kA0}, {"pi_a1", kA1}, {"random", testing::random_target(gen, 2)}});
        bool exact = report.verdict == diagnostics::Verdict::Pass;
        for (const auto& r : report.results) {
            for (const auto& entry : r.entries) {
                if (r.test_name == "arithmetic_mean") exact = exact && std::fabs(*entry.z) <= kExact;
                if (r.test_name == "harmonic_mean" || r.test_name == "control_variate") {
                    exact = exact && std::fabs(entry.statistic - 1.0) <= kExact;
                }
            }
        }
        if (!exact) ++failures;
        const double bias = std::fabs(oracle::estimated_ips_bias(paper_env(a, e), kA0));
        if (bias > max_bias) {
            max_bias = bias;
            at_alpha = a;
            at_eps = e;
        }
    }
    o.note(failures == 0, "500 confounded settings: %d with a failing or inexact diagnostic", failures);
    o.note(max_bias > 0.05, "max |oracle bias| for pi_a0 = %.4f (alpha=%.3f, epsilon=%.3f), must exceed 0.05",
           max_bias, at_alpha, at_eps);
    return o;
}

Outcome criterion_6() {
    Outcome o;
    const auto log = censor(sample_full_log(paper_env(0.9, 0.1), {100'000, kSeed}));
    const auto bad = MarginalPropensities::make({0.5, 0.5}, MarginalPropensities::Source::Supplied);
    const auto counted = estimate_propensities(log, 2);
    o.note(true, "counted marginal [%.4f, %.4f], supplied [0.5, 0.5]", counted.probs[0], counted.probs[1]);
    for (const auto& e : diagnostics::harmonic_mean_test(log, bad).entries) {
        o.note(e.verdict == diagnostics::Verdict::Fail && std::fabs(*e.z) > 10.0,
               "harmonic %s: statistic %.4f, z %.2f", e.label.c_str(), e.statistic, *e.z);
    }
    for (const auto& t : {diagnostics::NamedPolicy{"pi_a0", kA0}, diagnostics::NamedPolicy{"pi_a1", kA1}}) {
        const auto e = diagnostics::control_variate_test(log, bad, t).entries[0];
        o.note(e.verdict == diagnostics::Verdict::Fail && std::fabs(*e.z) > 10.0,
               "control variate %s: statistic %.4f, z %.2f", e.label.c_str(), e.statistic, *e.z);
    }
    return o;
}

void zero_confounding_control(Outcome& o, double a, double e, std::uint64_t seed) {
    const auto env = paper_env(a, e);
    std::mt19937_64 gen(seed);
    double worst = 0.0;
    std::vector<Policy> targets{kA0, kA1, Policy::uniform(2)};
    for (int i = 0; i < 5; ++i) targets.push_back(testing::random_target(gen, 2));
    for (const auto& t : targets) worst = std::max(worst, std::fabs(oracle::estimated_ips_bias(env, t)));
    o.note(worst <= kExact, "alpha=%.2f epsilon=%.2f: max |oracle bias| over 8 targets = %.3g", a, e, worst);

    const auto est = estimated_difference(censor(sample_full_log(env, {kLargeN, seed})));
    const double truth = oracle::true_policy_value(env, kA1) - oracle::true_policy_value(env, kA0);
    const double sigmas = std::fabs(est.value - truth) / est.std_error;
    o.note(sigmas <= kMcSigmas, "alpha=%.2f epsilon=%.2f: estimated difference %.5f vs true %.5f (%.1f SE, limit 5)",
           a, e, est.value, truth, sigmas);
}

Outcome criterion_7() {
    Outcome o;
    std::uint64_t k = 0;
    for (double a : {0.5, 0.6, 0.75, 0.9, 0.99}) zero_confounding_control(o, a, 0.5, derive_seed(kSeed, k++));
    for (double e : {0.05, 0.1, 0.2, 0.3, 0.4}) zero_confounding_control(o, 0.5, e, derive_seed(kSeed, k++));
    return o;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion_8() {
    Outcome o;
    const std::string config = std::string(CONFOUND_OPE_SOURCE_DIR) + "/configs/sweep.cfg";
    const auto dir = fs::temp_directory_path() / "confound_ope_acceptance";
    fs::create_directories(dir);
    auto sweep = [&](const std::string& name, const std::string& workers) {
        const auto out = dir / name;
        const auto svg = dir / (name + ".svg");
        std::ostringstream sink;
        const int code = cli::run({"sweep", "--config", config, "--out", out.string(), "--plot", svg.string(),
                                   "--workers", workers},
                                  sink, sink);
        o.note(code == 0, "sweep --workers %s exit code %d", workers.c_str(), code);
        return read_file(out);
    };
    const std::string first = sweep("serial_1.csv", "1");
    const std::string second = sweep("serial_2.csv", "1");
    const std::string parallel = sweep("parallel.csv", "4");
    const std::size_t rows = static_cast<std::size_t>(std::count(first.begin(), first.end(), '\n'));
    o.note(rows > 1, "bundled sweep wrote %zu lines", rows);
    o.note(first == second, "two serial runs byte-identical");
    o.note(first == parallel, "serial and 4-worker runs byte-identical");
    return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"sign-flip reproduction", criterion_1},
    {"ideal IPS unbiasedness", criterion_2},
    {"bias-oracle agreement", criterion_3},
    {"degeneracy identities", criterion_4},
    {"diagnostic blindness", criterion_5},
    {"diagnostic soundness", criterion_6},
    {"zero-confounding controls", criterion_7},
    {"determinism and reproducibility", criterion_8},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    bool all_pass = true;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i) + 1 != only) continue;
        Outcome outcome;
        try {
            outcome = kCriteria[i].second();
        } catch (const std::exception& e) {
            outcome.note(false, "threw: %s", e.what());
        }
        for (const auto& d : outcome.details) std::printf("    %s\n", d.c_str());
        std::printf("%s criterion %zu: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, kCriteria[i].first.c_str());
        std::fflush(stdout);
        all_pass = all_pass && outcome.pass;
    }
    return all_pass ? 0 : 1;
}
