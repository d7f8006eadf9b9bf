#pragma once

// Flat key-value config files:
//
//   # comment
//   key = value
//
// Lists are comma separated; table rows are separated by ';'.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "confound_ope/core.hpp"

namespace confound_ope {

class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& is);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& raw(const std::string& key) const;

    double get_double(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& key) const;
    Table get_table(const std::string& key) const;

    // Throws ValidationError naming the first key not in `allowed`.
    void require_known_keys(const std::vector<std::string>& allowed) const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::size_t> lines_;
};

// Keys: context_probs, reward_means, logging_policy.
EnvironmentSpec environment_from_config(const KeyValueConfig& config);
void write_environment_config(std::ostream& os, const EnvironmentSpec& env);

} // namespace confound_ope
