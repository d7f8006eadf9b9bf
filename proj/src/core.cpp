#include "confound_ope/core.hpp"

#include <cmath>
#include <sstream>

namespace confound_ope {

Table::Table(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ValidationError("table data has " + std::to_string(data_.size()) +
                              " entries, expected " + std::to_string(rows_ * cols_));
    }
}

Table Table::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) {
            throw ValidationError("ragged table: row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " columns, expected " +
                                  std::to_string(cols));
        }
        data.insert(data.end(), rows[r].begin(), rows[r].end());
    }
    return Table(rows.size(), cols, std::move(data));
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
        compensation_ += (sum_ - t) + x;
    } else {
        compensation_ += (x - t) + sum_;
    }
    sum_ = t;
}

double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

std::string cell(std::size_t r, std::size_t c) {
    return "cell (" + std::to_string(r) + "," + std::to_string(c) + ")";
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void check_stochastic_rows(const Table& t, const std::string& field,
                           std::vector<Violation>& out) {
    for (std::size_t r = 0; r < t.rows(); ++r) {
        bool entries_ok = true;
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (!is_probability(t(r, c))) {
                out.push_back({field, cell(r, c), "entry " + fmt(t(r, c)) + " not in [0,1]"});
                entries_ok = false;
            }
        }
        if (!entries_ok) continue;
        const double s = compensated_sum(t.row(r));
        if (std::fabs(s - 1.0) > kProbabilityTolerance) {
            out.push_back({field, "row " + std::to_string(r), "row sums to " + fmt(s)});
        }
    }
}

} // namespace

std::vector<Violation> validate(const EnvironmentSpec& env) {
    std::vector<Violation> out;
    const std::size_t k = env.context_probs.size();
    if (k == 0) out.push_back({"context_probs", "", "no contexts"});
    bool entries_ok = true;
    for (std::size_t x = 0; x < k; ++x) {
        if (!is_probability(env.context_probs[x])) {
            out.push_back({"context_probs", "entry " + std::to_string(x),
                           "probability " + fmt(env.context_probs[x]) + " not in [0,1]"});
            entries_ok = false;
        }
    }
    if (k > 0 && entries_ok) {
        const double s = compensated_sum(env.context_probs);
        if (std::fabs(s - 1.0) > kProbabilityTolerance) {
            out.push_back({"context_probs", "", "sums to " + fmt(s)});
        }
    }

    const std::size_t m = env.reward_means.cols();
    if (m == 0) out.push_back({"reward_means", "", "no actions"});
    if (env.reward_means.rows() != k) {
        out.push_back({"reward_means", "", "has " + std::to_string(env.reward_means.rows()) +
                                               " rows, expected " + std::to_string(k)});
    }
    if (env.logging_policy.rows() != k || env.logging_policy.cols() != m) {
        out.push_back({"logging_policy", "",
                       "shape " + std::to_string(env.logging_policy.rows()) + "x" +
                           std::to_string(env.logging_policy.cols()) + ", expected " +
                           std::to_string(k) + "x" + std::to_string(m)});
    }

    for (std::size_t x = 0; x < env.reward_means.rows(); ++x) {
        for (std::size_t a = 0; a < m; ++a) {
            if (!is_probability(env.reward_means(x, a))) {
                out.push_back({"reward_means", cell(x, a),
                               "mean " + fmt(env.reward_means(x, a)) + " not in [0,1]"});
            }
        }
    }
    check_stochastic_rows(env.logging_policy, "logging_policy", out);
    return out;
}

std::string describe(const std::vector<Violation>& violations) {
    std::string s;
    for (const auto& v : violations) {
        if (!s.empty()) s += "; ";
        s += v.field;
        if (!v.location.empty()) s += " " + v.location;
        s += ": " + v.message;
    }
    return s;
}

void require_valid(const EnvironmentSpec& env) {
    const auto violations = validate(env);
    if (!violations.empty()) {
        throw ValidationError("invalid environment: " + describe(violations));
    }
}

EnvironmentSpec paper_env(double alpha, double epsilon) {
    if (!(alpha >= 0.5 && alpha <= 1.0)) {
        throw RangeError("alpha must lie in [0.5, 1], got " + fmt(alpha));
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw RangeError("epsilon must lie in [0, 1], got " + fmt(epsilon));
    }
    EnvironmentSpec env;
    env.context_probs = {1.0 - alpha, alpha};
    env.reward_means = Table(2, 2, {1.0, 0.7, 0.0, 0.7});
    env.logging_policy = Table(2, 2, {1.0 - epsilon, epsilon, epsilon, 1.0 - epsilon});
    return env;
}

Policy Policy::context_free(std::vector<double> probs) {
    const std::size_t m = probs.size();
    Table t(1, m, std::move(probs));
    std::vector<Violation> v;
    if (m == 0) throw ValidationError("policy has no actions");
    check_stochastic_rows(t, "policy", v);
    if (!v.empty()) throw ValidationError("invalid policy: " + describe(v));
    return Policy(Kind::ContextFree, std::move(t));
}

Policy Policy::contextual(Table probs) {
    std::vector<Violation> v;
    if (probs.rows() == 0 || probs.cols() == 0) throw ValidationError("policy table is empty");
    check_stochastic_rows(probs, "policy", v);
    if (!v.empty()) throw ValidationError("invalid policy: " + describe(v));
    return Policy(Kind::Contextual, std::move(probs));
}

Policy Policy::uniform(std::size_t num_actions) {
    if (num_actions == 0) throw ValidationError("policy has no actions");
    return context_free(std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions)));
}

std::span<const double> Policy::marginal() const {
    if (is_contextual()) {
        throw ValidationError("a context-free policy is required here");
    }
    return probs_.row(0);
}

Policy deterministic_policy(ActionId action, std::size_t num_actions) {
    if (action >= num_actions) {
        throw RangeError("action " + std::to_string(action) + " out of range for " +
                         std::to_string(num_actions) + " actions");
    }
    std::vector<double> probs(num_actions, 0.0);
    probs[action] = 1.0;
    return Policy::context_free(std::move(probs));
}

double action_prob(const Policy& policy, ActionId action, std::optional<ContextId> context) {
    if (action >= policy.num_actions()) {
        throw RangeError("action " + std::to_string(action) + " out of range");
    }
    if (!policy.is_contextual()) return policy.table()(0, action);
    if (!context) throw ValidationError("contextual policy requires a context");
    if (*context >= policy.num_contexts()) {
        throw RangeError("context " + std::to_string(*context) + " out of range");
    }
    return policy.table()(*context, action);
}

} // namespace confound_ope
