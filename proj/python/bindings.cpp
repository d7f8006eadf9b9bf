#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "confound_ope/config.hpp"
#include "confound_ope/diagnostics.hpp"
#include "confound_ope/estimators.hpp"
#include "confound_ope/harness.hpp"
#include "confound_ope/oracle.hpp"
#include "confound_ope/plot.hpp"
#include "confound_ope/simulator.hpp"

namespace py = pybind11;
namespace co = confound_ope;

PYBIND11_MAKE_OPAQUE(co::FullLog)
PYBIND11_MAKE_OPAQUE(co::CensoredLog)

namespace {

std::vector<std::vector<double>> to_rows(const co::Table& t) {
    std::vector<std::vector<double>> rows(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) rows[r].assign(t.row(r).begin(), t.row(r).end());
    return rows;
}

co::MarginalPropensities as_props(const std::vector<double>& probs) {
    return co::MarginalPropensities::make(probs, co::MarginalPropensities::Source::Supplied);
}

std::vector<co::diagnostics::NamedPolicy> as_targets(const std::map<std::string, co::Policy>& m) {
    std::vector<co::diagnostics::NamedPolicy> out;
    for (const auto& [name, policy] : m) out.push_back({name, policy});
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Off-policy evaluation under unobserved confounding (C++ core)";

    auto validation = py::register_exception<co::ValidationError>(m, "ValidationError",
                                                                  PyExc_ValueError);
    py::register_exception<co::SupportError>(m, "SupportError", validation.ptr());
    py::register_exception<co::EmptyInputError>(m, "EmptyInputError", validation.ptr());
    py::register_exception<co::UndefinedEstimateError>(m, "UndefinedEstimateError",
                                                       validation.ptr());
    py::register_exception<co::IoError>(m, "IoError", PyExc_OSError);

    // --- core -----------------------------------------------------------------
    py::class_<co::EnvironmentSpec>(m, "EnvironmentSpec")
        .def(py::init([](std::vector<double> context_probs,
                         const std::vector<std::vector<double>>& reward_means,
                         const std::vector<std::vector<double>>& logging_policy) {
                 return co::EnvironmentSpec{std::move(context_probs),
                                            co::Table::from_rows(reward_means),
                                            co::Table::from_rows(logging_policy)};
             }),
             py::arg("context_probs"), py::arg("reward_means"), py::arg("logging_policy"))
        .def_readonly("context_probs", &co::EnvironmentSpec::context_probs)
        .def_property_readonly("reward_means",
                               [](const co::EnvironmentSpec& e) { return to_rows(e.reward_means); })
        .def_property_readonly("logging_policy",
                               [](const co::EnvironmentSpec& e) { return to_rows(e.logging_policy); })
        .def_property_readonly("num_contexts", &co::EnvironmentSpec::num_contexts)
        .def_property_readonly("num_actions", &co::EnvironmentSpec::num_actions)
        .def("to_config", [](const co::EnvironmentSpec& e) {
            std::ostringstream os;
            co::write_environment_config(os, e);
            return os.str();
        });

    m.def("paper_env", &co::paper_env, py::arg("alpha"), py::arg("epsilon"),
          "Two-context guiding example with context share alpha and logging error rate epsilon.");
    m.def(
        "validate",
        [](const co::EnvironmentSpec& env) {
            std::vector<std::string> out;
            for (const auto& v : co::validate(env)) out.push_back(co::describe({v}));
            return out;
        },
        py::arg("env"), "List of invariant violations; empty when valid.");

    py::class_<co::Policy>(m, "Policy")
        .def_static("context_free", &co::Policy::context_free, py::arg("probs"))
        .def_static("uniform", &co::Policy::uniform, py::arg("num_actions"))
        .def_static(
            "contextual",
            [](const std::vector<std::vector<double>>& rows) {
                return co::Policy::contextual(co::Table::from_rows(rows));
            },
            py::arg("rows"))
        .def_property_readonly("is_contextual", &co::Policy::is_contextual)
        .def_property_readonly("num_actions", &co::Policy::num_actions)
        .def_property_readonly("probs",
                               [](const co::Policy& p) { return to_rows(p.table()); });

    m.def("deterministic_policy", &co::deterministic_policy, py::arg("action"),
          py::arg("num_actions"));
    m.def("action_prob", &co::action_prob, py::arg("policy"), py::arg("action"),
          py::arg("context") = py::none());

    // --- logs -----------------------------------------------------------------
    py::class_<co::FullLog>(m, "FullLog")
        .def("__len__", [](const co::FullLog& l) { return l.size(); })
        .def("censor", [](const co::FullLog& l) { return co::censor(l); })
        .def("to_numpy", [](const co::FullLog& l) {
            py::array_t<std::uint32_t> contexts(l.size()), actions(l.size());
            py::array_t<std::uint8_t> rewards(l.size());
            py::array_t<double> props(l.size());
            auto c = contexts.mutable_unchecked<1>();
            auto a = actions.mutable_unchecked<1>();
            auto r = rewards.mutable_unchecked<1>();
            auto p = props.mutable_unchecked<1>();
            for (std::size_t i = 0; i < l.size(); ++i) {
                c(i) = l[i].context;
                a(i) = l[i].action;
                r(i) = l[i].reward;
                p(i) = l[i].logged_propensity;
            }
            py::dict d;
            d["context"] = contexts;
            d["action"] = actions;
            d["reward"] = rewards;
            d["propensity"] = props;
            return d;
        });

    py::class_<co::CensoredLog>(m, "CensoredLog")
        .def("__len__", [](const co::CensoredLog& l) { return l.size(); })
        .def_static(
            "from_lists",
            [](const std::vector<std::uint32_t>& actions, const std::vector<int>& rewards) {
                if (actions.size() != rewards.size()) {
                    throw co::ValidationError("actions and rewards differ in length");
                }
                co::CensoredLog log;
                for (std::size_t i = 0; i < actions.size(); ++i) {
                    if (rewards[i] != 0 && rewards[i] != 1) {
                        throw co::ValidationError("rewards must be 0 or 1");
                    }
                    log.push_back({actions[i], static_cast<std::uint8_t>(rewards[i])});
                }
                return log;
            },
            py::arg("actions"), py::arg("rewards"))
        .def("actions", [](const co::CensoredLog& l) {
            std::vector<std::uint32_t> out;
            for (const auto& r : l) out.push_back(r.action);
            return out;
        })
        .def("rewards", [](const co::CensoredLog& l) {
            std::vector<int> out;
            for (const auto& r : l) out.push_back(r.reward);
            return out;
        });

    m.def(
        "sample_full_log",
        [](const co::EnvironmentSpec& env, std::size_t n, std::uint64_t seed) {
            py::gil_scoped_release release;
            return co::sample_full_log(env, {n, seed});
        },
        py::arg("env"), py::arg("num_samples"), py::arg("seed"));
    m.def(
        "empirical_frequencies",
        [](const co::CensoredLog& l, std::size_t m) { return co::empirical_frequencies(l, m); },
        py::arg("log"), py::arg("num_actions"));

    // --- estimators -----------------------------------------------------------
    py::class_<co::EstimateReport>(m, "EstimateReport")
        .def_readonly("estimator", &co::EstimateReport::estimator)
        .def_readonly("value", &co::EstimateReport::value)
        .def_readonly("std_error", &co::EstimateReport::std_error)
        .def_readonly("n", &co::EstimateReport::n)
        .def("__repr__", [](const co::EstimateReport& r) {
            return "EstimateReport(" + r.estimator + ", value=" + std::to_string(r.value) + ")";
        });

    m.def(
        "estimate_propensities",
        [](const co::CensoredLog& l, std::size_t m) { return co::estimate_propensities(l, m).probs; },
        py::arg("log"), py::arg("num_actions"));
    m.def(
        "dm_action_rewards",
        [](const co::CensoredLog& l, std::size_t m) { return co::dm_action_rewards(l, m); },
        py::arg("log"), py::arg("num_actions"));
    m.def(
        "dm_value", [](const co::CensoredLog& l, const co::Policy& t) { return co::dm_value(l, t); },
        py::arg("log"), py::arg("target"));
    m.def(
        "ips_ideal_value",
        [](const co::FullLog& l, const co::Policy& t) { return co::ips_ideal_value(l, t); },
        py::arg("log"), py::arg("target"));
    m.def(
        "ips_estimated_value",
        [](const co::CensoredLog& l, const co::Policy& t, const std::vector<double>& p) {
            return co::ips_estimated_value(l, t, as_props(p));
        },
        py::arg("log"), py::arg("target"), py::arg("propensities"));
    m.def(
        "snips_value",
        [](const co::CensoredLog& l, const co::Policy& t, const std::vector<double>& p) {
            return co::snips_value(l, t, as_props(p));
        },
        py::arg("log"), py::arg("target"), py::arg("propensities"));

    // --- oracle ---------------------------------------------------------------
    auto oracle = m.def_submodule("oracle", "Exact quantities by enumeration");
    oracle.def("true_policy_value", &co::oracle::true_policy_value, py::arg("env"), py::arg("target"));
    oracle.def("do_value", &co::oracle::do_value, py::arg("env"), py::arg("action"));
    oracle.def("observational_value", &co::oracle::observational_value, py::arg("env"),
               py::arg("action"));
    oracle.def(
        "asymptotic_propensities",
        [](const co::EnvironmentSpec& env) { return co::oracle::asymptotic_propensities(env).probs; },
        py::arg("env"));
    oracle.def("asymptotic_estimated_ips", &co::oracle::asymptotic_estimated_ips, py::arg("env"),
               py::arg("target"));
    oracle.def("estimated_ips_bias", &co::oracle::estimated_ips_bias, py::arg("env"),
               py::arg("target"));
    oracle.def("crossover_epsilon", &co::oracle::crossover_epsilon, py::arg("alpha"));

    // --- diagnostics ----------------------------------------------------------
    auto diag = m.def_submodule("diagnostics", "Propensity diagnostics");
    py::class_<co::diagnostics::DiagnosticEntry>(diag, "DiagnosticEntry")
        .def_readonly("label", &co::diagnostics::DiagnosticEntry::label)
        .def_readonly("statistic", &co::diagnostics::DiagnosticEntry::statistic)
        .def_readonly("expected", &co::diagnostics::DiagnosticEntry::expected)
        .def_readonly("z", &co::diagnostics::DiagnosticEntry::z)
        .def_property_readonly("passed", [](const co::diagnostics::DiagnosticEntry& e) {
            return e.verdict == co::diagnostics::Verdict::Pass;
        });
    py::class_<co::diagnostics::DiagnosticResult>(diag, "DiagnosticResult")
        .def_readonly("test_name", &co::diagnostics::DiagnosticResult::test_name)
        .def_readonly("entries", &co::diagnostics::DiagnosticResult::entries)
        .def_readonly("tolerance", &co::diagnostics::DiagnosticResult::tolerance)
        .def_property_readonly("passed", [](const co::diagnostics::DiagnosticResult& r) {
            return r.verdict == co::diagnostics::Verdict::Pass;
        });
    py::class_<co::diagnostics::DiagnosticsReport>(diag, "DiagnosticsReport")
        .def_readonly("results", &co::diagnostics::DiagnosticsReport::results)
        .def_property_readonly("passed", [](const co::diagnostics::DiagnosticsReport& r) {
            return r.verdict == co::diagnostics::Verdict::Pass;
        })
        .def("to_csv", [](const co::diagnostics::DiagnosticsReport& r) {
            std::ostringstream os;
            co::diagnostics::write_report_csv(os, r);
            return os.str();
        })
        .def("__str__", [](const co::diagnostics::DiagnosticsReport& r) {
            std::ostringstream os;
            co::diagnostics::write_report_text(os, r);
            return os.str();
        });
    diag.def(
        "run_all",
        [](const co::CensoredLog& l, const std::vector<double>& props,
           const std::map<std::string, co::Policy>& targets, double significance) {
            return co::diagnostics::run_all(l, as_props(props), as_targets(targets),
                                            {significance});
        },
        py::arg("log"), py::arg("propensities"), py::arg("targets"),
        py::arg("significance") = 0.001);

    // --- harness --------------------------------------------------------------
    auto harness = m.def_submodule("harness", "Parameter sweeps");
    py::class_<co::harness::SweepConfig>(harness, "SweepConfig")
        .def(py::init<>())
        .def_readwrite("alpha_values", &co::harness::SweepConfig::alpha_values)
        .def_readwrite("epsilon_min", &co::harness::SweepConfig::epsilon_min)
        .def_readwrite("epsilon_max", &co::harness::SweepConfig::epsilon_max)
        .def_readwrite("epsilon_step", &co::harness::SweepConfig::epsilon_step)
        .def_readwrite("num_samples", &co::harness::SweepConfig::num_samples)
        .def_readwrite("replications", &co::harness::SweepConfig::replications)
        .def_readwrite("master_seed", &co::harness::SweepConfig::master_seed)
        .def_readwrite("workers", &co::harness::SweepConfig::workers)
        .def_property(
            "estimators",
            [](const co::harness::SweepConfig& c) {
                std::vector<std::string> out;
                for (auto e : c.estimators) out.push_back(co::harness::to_string(e));
                return out;
            },
            [](co::harness::SweepConfig& c, const std::vector<std::string>& names) {
                c.estimators.clear();
                for (const auto& n : names) c.estimators.push_back(co::harness::estimator_from_string(n));
            })
        .def("epsilon_grid", &co::harness::SweepConfig::epsilon_grid);
    harness.def("load_sweep_config", &co::harness::load_sweep_config, py::arg("path"));

    py::class_<co::harness::SweepCell>(harness, "SweepCell")
        .def_readonly("alpha", &co::harness::SweepCell::alpha)
        .def_readonly("epsilon", &co::harness::SweepCell::epsilon)
        .def_readonly("replicate", &co::harness::SweepCell::replicate)
        .def_property_readonly("estimator", [](const co::harness::SweepCell& c) {
            return co::harness::to_string(c.estimator);
        })
        .def_readonly("value_a1", &co::harness::SweepCell::value_a1)
        .def_readonly("value_a0", &co::harness::SweepCell::value_a0)
        .def_readonly("difference", &co::harness::SweepCell::difference)
        .def_readonly("true_difference", &co::harness::SweepCell::true_difference)
        .def_readonly("diagnostics_pass", &co::harness::SweepCell::diagnostics_pass)
        .def_readonly("error", &co::harness::SweepCell::error);

    harness.def(
        "run_sweep",
        [](const co::harness::SweepConfig& c) {
            py::gil_scoped_release release;
            return co::harness::run_sweep(c);
        },
        py::arg("config"));
    harness.def(
        "write_cells_csv",
        [](const std::vector<co::harness::SweepCell>& cells, const std::string& path) {
            co::harness::write_cells_csv(path, cells);
        },
        py::arg("cells"), py::arg("path"));
    harness.def(
        "read_cells_csv",
        [](const std::string& path) { return co::harness::read_cells_csv(path); }, py::arg("path"));
    harness.def(
        "render_plot",
        [](const std::vector<co::harness::SweepCell>& cells, const std::string& path) {
            co::plot::render_plot(path, cells);
        },
        py::arg("cells"), py::arg("path"));
}
