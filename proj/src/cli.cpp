#include "confound_ope/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "confound_ope/config.hpp"
#include "confound_ope/estimators.hpp"
#include "confound_ope/harness.hpp"
#include "confound_ope/plot.hpp"
#include "confound_ope/simulator.hpp"
#include "confound_ope/text.hpp"

namespace confound_ope::cli {

namespace {

// Flag > CONFOUND_OPE_SEED > fallback.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
    if (flag) return *flag;
    if (const auto env = harness::seed_from_environment()) return *env;
    return fallback;
}

ParsedLog load_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open log '" + path + "'");
    return read_log_csv(in);
}

// Writes to `path`, or to `fallback` when path is empty or "-".
template <typename F>
void with_output(const std::string& path, std::ostream& fallback, F&& write) {
    if (path.empty() || path == "-") {
        write(fallback);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write(out);
    if (!out) throw IoError("failed writing '" + path + "'");
}

struct SimulateArgs {
    double alpha = 0.9;
    double epsilon = 0.1;
    std::string env_file;
    std::size_t n = 1000;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool censored = false;
};

struct EstimateArgs {
    std::string log;
    std::string target = "a1";
    std::string estimator = "ips_estimated";
    std::string propensities;
    std::size_t num_actions = 0;
    std::string out;
};

struct DiagnoseArgs {
    std::string log;
    std::vector<std::string> targets;
    bool logged_propensities = false;
    std::size_t num_actions = 0;
    double significance = 0.001;
    std::string csv;
};

struct SweepArgs {
    std::string config;
    std::string out;
    std::string plot;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

struct PlotArgs {
    std::string in;
    std::string out;
};

void do_simulate(const SimulateArgs& a, std::ostream& out) {
    const EnvironmentSpec env = a.env_file.empty()
                                    ? paper_env(a.alpha, a.epsilon)
                                    : environment_from_config(KeyValueConfig::load(a.env_file));
    const auto log = sample_full_log(env, {a.n, resolve_seed(a.seed, 0)});
    with_output(a.out, out, [&](std::ostream& os) {
        if (a.censored) {
            write_log_csv(os, censor(log));
        } else {
            write_log_csv(os, log);
        }
    });
}

void do_estimate(const EstimateArgs& a, std::ostream& out) {
    const auto parsed = load_log(a.log);
    if (parsed.censored.empty()) throw EmptyInputError("log '" + a.log + "' has no records");
    const std::size_t m = std::max(a.num_actions, infer_num_actions(parsed.censored));
    const auto target = parse_target(a.target, m);
    const auto props = a.propensities.empty()
                           ? estimate_propensities(parsed.censored, m)
                           : MarginalPropensities::make(parse_double_list(a.propensities, "propensities"),
                                                        MarginalPropensities::Source::Supplied);

    EstimateReport report;
    if (a.estimator == "dm") {
        report = dm_value(parsed.censored, target.policy);
    } else if (a.estimator == "ips_ideal") {
        if (!parsed.has_context) {
            throw ValidationError("ips_ideal needs a full log with context and propensity columns");
        }
        report = ips_ideal_value(parsed.full, target.policy);
    } else if (a.estimator == "ips_estimated") {
        report = ips_estimated_value(parsed.censored, target.policy, props);
    } else if (a.estimator == "snips") {
        report = snips_value(parsed.censored, target.policy, props);
    } else {
        throw ValidationError("unknown estimator '" + a.estimator +
                              "' (expected dm, ips_ideal, ips_estimated or snips)");
    }
    report.target = target.name;
    with_output(a.out, out, [&](std::ostream& os) {
        write_report_csv_header(os);
        write_report_csv_row(os, report);
    });
}

int do_diagnose(const DiagnoseArgs& a, std::ostream& out) {
    const auto parsed = load_log(a.log);
    if (parsed.censored.empty()) throw EmptyInputError("log '" + a.log + "' has no records");
    const std::size_t m = std::max(a.num_actions, infer_num_actions(parsed.censored));

    std::vector<diagnostics::NamedPolicy> targets;
    if (a.targets.empty()) {
        for (std::size_t i = 0; i < m; ++i) targets.push_back(parse_target("a" + std::to_string(i), m));
        targets.push_back(parse_target("uniform", m));
    } else {
        for (const auto& t : a.targets) targets.push_back(parse_target(t, m));
    }

    const diagnostics::DiagnosticOptions options{a.significance};
    diagnostics::DiagnosticsReport report;
    if (a.logged_propensities) {
        if (!parsed.has_context) {
            throw ValidationError("--logged-propensities needs a log with a propensity column");
        }
        report = diagnostics::run_all(parsed.full, targets, nullptr, options);
    } else {
        report = diagnostics::run_all(parsed.censored, estimate_propensities(parsed.censored, m),
                                      targets, options);
    }
    diagnostics::write_report_text(out, report);
    if (!a.csv.empty()) {
        with_output(a.csv, out, [&](std::ostream& os) { diagnostics::write_report_csv(os, report); });
    }
    return kOk;
}

void do_sweep(const SweepArgs& a) {
    auto config = harness::load_sweep_config(a.config);
    config.master_seed = resolve_seed(a.seed, config.master_seed);
    if (a.workers) config.workers = *a.workers;
    if (!a.out.empty()) config.cells_csv = a.out;
    if (!a.plot.empty()) config.plot_svg = a.plot;
    const auto cells = harness::run_sweep(config);
    harness::write_cells_csv(config.cells_csv, cells);
    if (!config.plot_svg.empty()) plot::render_plot(config.plot_svg, cells);
}

void do_plot(const PlotArgs& a) {
    plot::render_plot(a.out, harness::read_cells_csv(a.in));
}

} // namespace

diagnostics::NamedPolicy parse_target(const std::string& spec, std::size_t num_actions) {
    if (spec == "uniform") return {"uniform", Policy::uniform(num_actions)};
    if (spec.size() > 1 && spec[0] == 'a' && spec.find(',') == std::string::npos) {
        const auto action = parse_uint(spec.substr(1), "target action");
        return {"pi_" + spec, deterministic_policy(static_cast<ActionId>(action), num_actions)};
    }
    auto probs = parse_double_list(spec, "target probabilities");
    if (probs.size() != num_actions) {
        throw ValidationError("target '" + spec + "' has " + std::to_string(probs.size()) +
                              " probabilities, expected " + std::to_string(num_actions));
    }
    return {spec, Policy::context_free(std::move(probs))};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Off-policy evaluation under unobserved confounding: simulate, estimate, "
                 "diagnose, sweep, plot",
                 "confound-ope"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Sample a logged dataset to CSV");
    simulate->add_option("--alpha", sim.alpha, "Share of context x1 in the guiding example")
        ->capture_default_str();
    simulate->add_option("--epsilon", sim.epsilon, "Logging policy's suboptimal-action rate")
        ->capture_default_str();
    simulate->add_option("--env", sim.env_file, "Environment config file (overrides alpha/epsilon)");
    simulate->add_option("--n", sim.n, "Number of records")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "RNG seed (default: $CONFOUND_OPE_SEED or 0)");
    simulate->add_option("--out", sim.out, "Output CSV (default stdout)");
    simulate->add_flag("--censored", sim.censored, "Write only action,reward columns");

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate a target policy's value from a log");
    estimate->add_option("--log", est.log, "Log CSV")->required();
    estimate->add_option("--target", est.target, "a0, a1, ..., uniform, or p0,p1,...")
        ->capture_default_str();
    estimate->add_option("--estimator", est.estimator, "dm | ips_ideal | ips_estimated | snips")
        ->capture_default_str();
    estimate->add_option("--propensities", est.propensities,
                         "Marginal propensities p0,p1,... (default: counted from the log)");
    estimate->add_option("--num-actions", est.num_actions, "Action count (default: inferred)");
    estimate->add_option("--out", est.out, "Output CSV (default stdout)");

    DiagnoseArgs diag;
    auto* diagnose = app.add_subcommand("diagnose", "Run the propensity diagnostics on a log");
    diagnose->add_option("--log", diag.log, "Log CSV")->required();
    diagnose->add_option("--target", diag.targets, "Target policy (repeatable)");
    diagnose->add_flag("--logged-propensities", diag.logged_propensities,
                       "Use the log's propensity column instead of counted marginals");
    diagnose->add_option("--num-actions", diag.num_actions, "Action count (default: inferred)");
    diagnose->add_option("--significance", diag.significance, "Two-sided test level")
        ->capture_default_str();
    diagnose->add_option("--csv", diag.csv, "Also write the report as CSV");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Run a configured (alpha, epsilon) sweep");
    sweep->add_option("--config", sw.config, "Sweep config file")->required();
    sweep->add_option("--out", sw.out, "Cells CSV (overrides cells_csv)");
    sweep->add_option("--plot", sw.plot, "SVG plot path (overrides plot_svg; empty in config disables)");
    sweep->add_option("--seed", sw.seed, "Master seed (overrides env and config)");
    sweep->add_option("--workers", sw.workers, "Worker threads (0 = all cores)");

    PlotArgs pl;
    auto* plot_cmd = app.add_subcommand("plot", "Render a cells CSV as an SVG figure");
    plot_cmd->add_option("--in", pl.in, "Cells CSV")->required();
    plot_cmd->add_option("--out", pl.out, "Output SVG")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kValidationError;
    }

    try {
        if (*simulate) do_simulate(sim, out);
        if (*estimate) do_estimate(est, out);
        if (*diagnose) return do_diagnose(diag, out);
        if (*sweep) do_sweep(sw);
        if (*plot_cmd) do_plot(pl);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    }
    return kOk;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace confound_ope::cli
