#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "optomech/errors.hpp"

namespace optomech {

/// Flat key = value config with one [section] per scenario. Keys outside any
/// section apply to every scenario. Every key a scenario does not consume is
/// an error, and every consumed key (default or not) lands in the resolved
/// list so output files can embed the full effective configuration.
class ConfigMap {
public:
    static const std::vector<std::string>& known_sections();

    static ConfigMap from_file(const std::string& path, const std::string& scenario);
    static ConfigMap from_string(const std::string& text, const std::string& scenario,
                                 const std::string& origin = "<inline>");
    /// Empty config: every lookup resolves to its default.
    static ConfigMap empty(const std::string& scenario);

    double get_double(const std::string& key, double def);
    double get_double_required(const std::string& key);
    int get_int(const std::string& key, int def);
    bool get_bool(const std::string& key, bool def);
    std::string get_string(const std::string& key, const std::string& def);

    bool has(const std::string& key) const;

    /// Programmatic override (CLI flags); wins over file values.
    void set(const std::string& key, const std::string& value);

    /// Record a derived quantity into the resolved block.
    void note(const std::string& key, const std::string& value);

    /// Throws ConfigParse when any key was never consumed (typo guard).
    void finish() const;

    const std::vector<std::pair<std::string, std::string>>& resolved() const {
        return resolved_;
    }
    const std::string& scenario() const { return scenario_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };

    std::string raw(const std::string& key, bool* found);
    void record(const std::string& key, const std::string& value);

    std::string scenario_;
    std::string origin_;
    std::map<std::string, Entry> entries_;
    std::vector<std::pair<std::string, std::string>> resolved_;
};

}  // namespace optomech
