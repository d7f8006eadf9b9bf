#include "confound_ope/config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "confound_ope/text.hpp"

namespace confound_ope {

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) {
            throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
        }
        if (cfg.values_.count(key)) {
            throw ValidationError("config line " + std::to_string(line_no) + ": duplicate key '" +
                                  key + "'");
        }
        cfg.values_[key] = trim(std::string_view(t).substr(eq + 1));
        cfg.lines_[key] = line_no;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse(in);
}

const std::string& KeyValueConfig::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("config is missing key '" + key + "'");
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
    return parse_double(raw(key), key);
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key) const {
    return parse_uint(raw(key), key);
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
    return parse_double_list(raw(key), key);
}

std::vector<std::string> KeyValueConfig::get_string_list(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& item : split(raw(key), ',')) {
        if (!item.empty()) out.push_back(std::move(item));
    }
    return out;
}

Table KeyValueConfig::get_table(const std::string& key) const {
    std::vector<std::vector<double>> rows;
    for (const auto& row : split(raw(key), ';')) {
        if (row.empty()) continue;
        rows.push_back(parse_double_list(row, key));
    }
    return Table::from_rows(rows);
}

void KeyValueConfig::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError("config line " + std::to_string(lines_.at(key)) +
                                  ": unknown key '" + key + "'");
        }
    }
}

EnvironmentSpec environment_from_config(const KeyValueConfig& config) {
    config.require_known_keys({"context_probs", "reward_means", "logging_policy"});
    EnvironmentSpec env;
    env.context_probs = config.get_double_list("context_probs");
    env.reward_means = config.get_table("reward_means");
    env.logging_policy = config.get_table("logging_policy");
    require_valid(env);
    return env;
}

namespace {

void write_table(std::ostream& os, const Table& t) {
    for (std::size_t r = 0; r < t.rows(); ++r) {
        if (r) os << "; ";
        for (std::size_t c = 0; c < t.cols(); ++c) {
            if (c) os << ", ";
            os << format_double(t(r, c));
        }
    }
}

} // namespace

void write_environment_config(std::ostream& os, const EnvironmentSpec& env) {
    os << "# contexts: " << env.num_contexts() << ", actions: " << env.num_actions() << '\n';
    os << "context_probs = ";
    for (std::size_t x = 0; x < env.num_contexts(); ++x) {
        if (x) os << ", ";
        os << format_double(env.context_probs[x]);
    }
    os << "\n# one row per context, one column per action\nreward_means = ";
    write_table(os, env.reward_means);
    os << "\nlogging_policy = ";
    write_table(os, env.logging_policy);
    os << '\n';
}

} // namespace confound_ope
