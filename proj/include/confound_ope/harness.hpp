#pragma once

// Parameter sweep over the guiding example: for each (alpha, epsilon, replicate)
// cell, sample a log, estimate the values of the deterministic policies pi_a1 and
// pi_a0 with each configured estimator, and record their difference next to the
// true difference.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "confound_ope/config.hpp"

namespace confound_ope::harness {

enum class Estimator { DirectMethod, IpsIdeal, IpsEstimated, Snips, OracleAsymptotic };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);
const std::vector<Estimator>& all_estimators();

struct SweepConfig {
    std::vector<double> alpha_values{0.6, 0.75, 0.9};
    double epsilon_min = 0.01;
    double epsilon_max = 0.5;
    double epsilon_step = 0.01;
    std::size_t num_samples = 2'000'000;
    std::size_t replications = 1;
    std::uint64_t master_seed = 20230917;
    std::vector<Estimator> estimators = all_estimators();
    std::size_t workers = 1; // 0 = hardware concurrency
    double significance = 0.001;
    std::string cells_csv = "cells.csv";
    std::string plot_svg = "sweep.svg";

    // Throws ValidationError on the first violated invariant.
    void validate() const;
    std::vector<double> epsilon_grid() const;
};

SweepConfig sweep_config_from(const KeyValueConfig& config);
SweepConfig load_sweep_config(const std::string& path);

// Reads CONFOUND_OPE_SEED; throws ValidationError when set but malformed.
std::optional<std::uint64_t> seed_from_environment();

struct SweepCell {
    double alpha = 0.0;
    double epsilon = 0.0;
    std::size_t replicate = 0;
    Estimator estimator = Estimator::IpsEstimated;
    double value_a1 = 0.0;
    double value_a0 = 0.0;
    double difference = 0.0; // value_a1 - value_a0
    double true_difference = 0.0;
    bool diagnostics_pass = false;
    std::optional<double> std_error_a1;
    std::optional<double> std_error_a0;
    std::optional<std::string> error; // estimator failure; values are NaN
};

// Deterministic in the config. The seed of cell (alpha i, epsilon j, replicate r)
// derives from master_seed and its index (i * grid + j) * R + r, so results do
// not depend on `workers`.
std::vector<SweepCell> run_sweep(const SweepConfig& config);

// Rows sorted by (alpha, epsilon, estimator name, replicate).
void write_cells_csv(std::ostream& os, std::vector<SweepCell> cells);
void write_cells_csv(const std::string& path, std::vector<SweepCell> cells);
std::vector<SweepCell> read_cells_csv(std::istream& is);
std::vector<SweepCell> read_cells_csv(const std::string& path);

} // namespace confound_ope::harness
