#include "confound_ope/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "confound_ope/diagnostics.hpp"
#include "confound_ope/estimators.hpp"
#include "confound_ope/oracle.hpp"
#include "confound_ope/simulator.hpp"
#include "confound_ope/text.hpp"

namespace confound_ope::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* const kCellsHeader =
    "alpha,epsilon,replicate,estimator,value_a1,value_a0,difference,true_difference,"
    "diagnostics_pass";

struct TargetValues {
    double a1 = 0.0;
    double a0 = 0.0;
    std::optional<double> se_a1;
    std::optional<double> se_a0;
};

// Everything one cell needs, built once per (alpha, epsilon, replicate).
struct CellData {
    EnvironmentSpec env;
    FullLog full;
    CensoredLog censored;
    MarginalPropensities counted;
};

TargetValues evaluate(Estimator estimator, const CellData& d, const Policy& pi_a1,
                      const Policy& pi_a0) {
    auto both = [&](auto&& f) {
        const EstimateReport r1 = f(pi_a1);
        const EstimateReport r0 = f(pi_a0);
        return TargetValues{r1.value, r0.value, r1.std_error, r0.std_error};
    };
    switch (estimator) {
    case Estimator::DirectMethod:
        return both([&](const Policy& p) { return dm_value(d.censored, p); });
    case Estimator::IpsIdeal:
        return both([&](const Policy& p) { return ips_ideal_value(d.full, p); });
    case Estimator::IpsEstimated:
        return both([&](const Policy& p) { return ips_estimated_value(d.censored, p, d.counted); });
    case Estimator::Snips:
        return both([&](const Policy& p) { return snips_value(d.censored, p, d.counted); });
    case Estimator::OracleAsymptotic:
        return {oracle::asymptotic_estimated_ips(d.env, pi_a1),
                oracle::asymptotic_estimated_ips(d.env, pi_a0), std::nullopt, std::nullopt};
    }
    throw ValidationError("unknown estimator");
}

std::vector<SweepCell> run_task(const SweepConfig& config, double alpha, double epsilon,
                                std::size_t replicate, std::uint64_t seed) {
    const Policy pi_a1 = deterministic_policy(1, 2);
    const Policy pi_a0 = deterministic_policy(0, 2);

    CellData d;
    d.env = paper_env(alpha, epsilon);
    d.full = sample_full_log(d.env, {config.num_samples, seed});
    d.censored = censor(d.full);
    d.counted = estimate_propensities(d.censored, 2);

    const double true_difference = oracle::true_policy_value(d.env, pi_a1) -
                                   oracle::true_policy_value(d.env, pi_a0);

    bool diagnostics_pass = false;
    try {
        const auto report = diagnostics::run_all(
            d.censored, d.counted, {{"pi_a1", pi_a1}, {"pi_a0", pi_a0}},
            {config.significance});
        diagnostics_pass = report.verdict == diagnostics::Verdict::Pass;
    } catch (const ValidationError&) {
        diagnostics_pass = false;
    }

    std::vector<SweepCell> cells;
    for (const Estimator e : config.estimators) {
        SweepCell cell;
        cell.alpha = alpha;
        cell.epsilon = epsilon;
        cell.replicate = replicate;
        cell.estimator = e;
        cell.true_difference = true_difference;
        cell.diagnostics_pass = diagnostics_pass;
        try {
            const auto v = evaluate(e, d, pi_a1, pi_a0);
            cell.value_a1 = v.a1;
            cell.value_a0 = v.a0;
            cell.difference = v.a1 - v.a0;
            cell.std_error_a1 = v.se_a1;
            cell.std_error_a0 = v.se_a0;
        } catch (const ValidationError& err) {
            cell.value_a1 = cell.value_a0 = cell.difference = kNaN;
            cell.error = err.what();
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

auto sort_key(const SweepCell& c) {
    return std::make_tuple(c.alpha, c.epsilon, to_string(c.estimator), c.replicate);
}

} // namespace

std::string to_string(Estimator e) {
    switch (e) {
    case Estimator::DirectMethod: return "dm";
    case Estimator::IpsIdeal: return "ips_ideal";
    case Estimator::IpsEstimated: return "ips_estimated";
    case Estimator::Snips: return "snips";
    case Estimator::OracleAsymptotic: return "oracle_asymptotic";
    }
    return "unknown";
}

Estimator estimator_from_string(const std::string& name) {
    for (const Estimator e : all_estimators()) {
        if (to_string(e) == name) return e;
    }
    throw ValidationError("unknown estimator '" + name +
                          "' (expected dm, ips_ideal, ips_estimated, snips or oracle_asymptotic)");
}

const std::vector<Estimator>& all_estimators() {
    static const std::vector<Estimator> all{Estimator::DirectMethod, Estimator::IpsIdeal,
                                            Estimator::IpsEstimated, Estimator::Snips,
                                            Estimator::OracleAsymptotic};
    return all;
}

void SweepConfig::validate() const {
    if (alpha_values.empty()) throw ValidationError("alpha_values is empty");
    for (double a : alpha_values) {
        if (!(a >= 0.5 && a <= 1.0)) {
            throw RangeError("alpha value " + format_double(a) + " not in [0.5, 1]");
        }
    }
    if (!(epsilon_min > 0.0 && epsilon_min < 1.0)) {
        throw RangeError("epsilon_min must lie in (0, 1)");
    }
    if (!(epsilon_max > 0.0 && epsilon_max < 1.0)) {
        throw RangeError("epsilon_max must lie in (0, 1)");
    }
    if (epsilon_max < epsilon_min) throw RangeError("epsilon_max is below epsilon_min");
    if (!(epsilon_step > 0.0)) throw RangeError("epsilon_step must be positive");
    if (num_samples < 1) throw ValidationError("num_samples must be at least 1");
    if (replications < 1) throw ValidationError("replications must be at least 1");
    if (estimators.empty()) throw ValidationError("no estimators configured");
    if (!(significance > 0.0 && significance < 1.0)) {
        throw RangeError("significance must lie in (0, 1)");
    }
}

std::vector<double> SweepConfig::epsilon_grid() const {
    const auto count =
        static_cast<std::size_t>(std::floor((epsilon_max - epsilon_min) / epsilon_step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Snap to 12 decimals so that 0.01 + 5 * 0.01 prints as 0.06's nearest double.
        const double eps = epsilon_min + static_cast<double>(i) * epsilon_step;
        grid.push_back(std::round(eps * 1e12) / 1e12);
    }
    return grid;
}

SweepConfig sweep_config_from(const KeyValueConfig& kv) {
    kv.require_known_keys({"alpha_values", "epsilon_min", "epsilon_max", "epsilon_step",
                           "num_samples", "replications", "master_seed", "estimators", "workers",
                           "significance", "cells_csv", "plot_svg"});
    SweepConfig c;
    if (kv.has("alpha_values")) c.alpha_values = kv.get_double_list("alpha_values");
    if (kv.has("epsilon_min")) c.epsilon_min = kv.get_double("epsilon_min");
    if (kv.has("epsilon_max")) c.epsilon_max = kv.get_double("epsilon_max");
    if (kv.has("epsilon_step")) c.epsilon_step = kv.get_double("epsilon_step");
    if (kv.has("num_samples")) c.num_samples = kv.get_uint("num_samples");
    if (kv.has("replications")) c.replications = kv.get_uint("replications");
    if (kv.has("master_seed")) c.master_seed = kv.get_uint("master_seed");
    if (kv.has("workers")) c.workers = kv.get_uint("workers");
    if (kv.has("significance")) c.significance = kv.get_double("significance");
    if (kv.has("cells_csv")) c.cells_csv = kv.raw("cells_csv");
    if (kv.has("plot_svg")) c.plot_svg = kv.raw("plot_svg");
    if (kv.has("estimators")) {
        c.estimators.clear();
        for (const auto& name : kv.get_string_list("estimators")) {
            const Estimator e = estimator_from_string(name);
            if (std::find(c.estimators.begin(), c.estimators.end(), e) == c.estimators.end()) {
                c.estimators.push_back(e);
            }
        }
    }
    c.validate();
    return c;
}

SweepConfig load_sweep_config(const std::string& path) {
    return sweep_config_from(KeyValueConfig::load(path));
}

std::optional<std::uint64_t> seed_from_environment() {
    const char* v = std::getenv("CONFOUND_OPE_SEED");
    if (!v || !*v) return std::nullopt;
    return parse_uint(v, "CONFOUND_OPE_SEED");
}

std::vector<SweepCell> run_sweep(const SweepConfig& config) {
    config.validate();
    const auto grid = config.epsilon_grid();
    const std::size_t reps = config.replications;
    const std::size_t num_tasks = config.alpha_values.size() * grid.size() * reps;

    std::vector<std::vector<SweepCell>> per_task(num_tasks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= num_tasks) return;
            const std::size_t r = t % reps;
            const std::size_t j = (t / reps) % grid.size();
            const std::size_t i = t / reps / grid.size();
            try {
                per_task[t] = run_task(config, config.alpha_values[i], grid[j], r,
                                       derive_seed(config.master_seed, t));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(num_tasks);
                return;
            }
        }
    };

    std::size_t workers = config.workers ? config.workers : std::thread::hardware_concurrency();
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(num_tasks, 1));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<SweepCell> cells;
    for (auto& task : per_task) {
        for (auto& c : task) cells.push_back(std::move(c));
    }
    return cells;
}

void write_cells_csv(std::ostream& os, std::vector<SweepCell> cells) {
    std::stable_sort(cells.begin(), cells.end(),
                     [](const SweepCell& a, const SweepCell& b) { return sort_key(a) < sort_key(b); });
    os << kCellsHeader << '\n';
    for (const auto& c : cells) {
        os << format_double(c.alpha) << ',' << format_double(c.epsilon) << ',' << c.replicate
           << ',' << to_string(c.estimator) << ',' << format_double(c.value_a1) << ','
           << format_double(c.value_a0) << ',' << format_double(c.difference) << ','
           << format_double(c.true_difference) << ',' << (c.diagnostics_pass ? "true" : "false")
           << '\n';
    }
}

void write_cells_csv(const std::string& path, std::vector<SweepCell> cells) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_cells_csv(out, std::move(cells));
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<SweepCell> read_cells_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("cells CSV is empty (no header)");
    if (trim(line) != kCellsHeader) {
        throw ValidationError("unrecognised cells CSV header: '" + trim(line) + "'");
    }
    std::vector<SweepCell> cells;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 9) {
            throw ValidationError("cells CSV line " + std::to_string(line_no) +
                                  ": expected 9 fields");
        }
        auto number = [&](const std::string& s, const char* what) {
            return s == "nan" || s == "-nan" ? kNaN : parse_double(s, what);
        };
        SweepCell c;
        c.alpha = parse_double(f[0], "alpha");
        c.epsilon = parse_double(f[1], "epsilon");
        c.replicate = parse_uint(f[2], "replicate");
        c.estimator = estimator_from_string(f[3]);
        c.value_a1 = number(f[4], "value_a1");
        c.value_a0 = number(f[5], "value_a0");
        c.difference = number(f[6], "difference");
        c.true_difference = number(f[7], "true_difference");
        if (f[8] != "true" && f[8] != "false") {
            throw ValidationError("cells CSV line " + std::to_string(line_no) +
                                  ": diagnostics_pass must be true or false");
        }
        c.diagnostics_pass = f[8] == "true";
        cells.push_back(std::move(c));
    }
    return cells;
}

std::vector<SweepCell> read_cells_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return read_cells_csv(in);
}

} // namespace confound_ope::harness
