#pragma once

// Domain types for discrete contextual-bandit environments, policies and logs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace confound_ope {

using ContextId = std::uint32_t;
using ActionId = std::uint32_t;

inline constexpr double kProbabilityTolerance = 1e-12;

// Error hierarchy. The CLI maps ValidationError (and subclasses) to exit 1 and
// IoError to exit 2.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct RangeError : ValidationError {
    using ValidationError::ValidationError;
};
struct EmptyInputError : ValidationError {
    using ValidationError::ValidationError;
};
// An estimator or oracle needs a propensity that is zero.
struct SupportError : ValidationError {
    using ValidationError::ValidationError;
};
// Ratio estimator with a zero denominator, or a DM entry that does not exist.
struct UndefinedEstimateError : ValidationError {
    using ValidationError::ValidationError;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Row-major K x M table of doubles.
class Table {
public:
    Table() = default;
    Table(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Table(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Table from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Table&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Full joint specification of a tabular environment: P(X), E[R|X,A], pi0(A|X).
struct EnvironmentSpec {
    std::vector<double> context_probs;
    Table reward_means;
    Table logging_policy;

    std::size_t num_contexts() const { return context_probs.size(); }
    std::size_t num_actions() const { return reward_means.cols(); }

    bool operator==(const EnvironmentSpec&) const = default;
};

struct Violation {
    std::string field;    // "context_probs", "reward_means", "logging_policy", ...
    std::string location; // "row 1", "cell (0,1)", "" for whole-field issues
    std::string message;
};

// Every invariant violation of env, empty when the environment is valid.
std::vector<Violation> validate(const EnvironmentSpec& env);

// Throws ValidationError listing all violations.
void require_valid(const EnvironmentSpec& env);

std::string describe(const std::vector<Violation>& violations);

// Two-context, two-action guiding example parameterised by the share alpha of
// the majority context x1 and the logging policy's suboptimal-action rate epsilon.
EnvironmentSpec paper_env(double alpha, double epsilon);

class Policy {
public:
    enum class Kind { ContextFree, Contextual };

    static Policy context_free(std::vector<double> probs);
    static Policy contextual(Table probs);
    static Policy uniform(std::size_t num_actions);

    Kind kind() const { return kind_; }
    bool is_contextual() const { return kind_ == Kind::Contextual; }
    std::size_t num_actions() const { return probs_.cols(); }
    std::size_t num_contexts() const { return is_contextual() ? probs_.rows() : 0; }

    // pi(a) for context-free policies; throws ValidationError when contextual.
    std::span<const double> marginal() const;
    const Table& table() const { return probs_; }

    bool operator==(const Policy&) const = default;

private:
    Policy(Kind kind, Table probs) : kind_(kind), probs_(std::move(probs)) {}

    Kind kind_ = Kind::ContextFree;
    Table probs_; // 1 x M for context-free
};

// Unit mass on `action`.
Policy deterministic_policy(ActionId action, std::size_t num_actions);

// pi(a|x); context is required iff the policy is contextual and ignored otherwise.
double action_prob(const Policy& policy, ActionId action,
                   std::optional<ContextId> context = std::nullopt);

struct FullLogRecord {
    ContextId context = 0;
    ActionId action = 0;
    std::uint8_t reward = 0;
    double logged_propensity = 1.0;

    bool operator==(const FullLogRecord&) const = default;
};

struct CensoredLogRecord {
    ActionId action = 0;
    std::uint8_t reward = 0;

    bool operator==(const CensoredLogRecord&) const = default;
};

using FullLog = std::vector<FullLogRecord>;
using CensoredLog = std::vector<CensoredLogRecord>;

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

double compensated_sum(std::span<const double> xs);

} // namespace confound_ope
