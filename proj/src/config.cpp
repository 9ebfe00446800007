#include "optomech/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace optomech {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string normalize(std::string s) {
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

}  // namespace

const std::vector<std::string>& ConfigMap::known_sections() {
    static const std::vector<std::string> sections = {
        "common", "param_map", "blockade", "rwa_check", "phase_sweep",
        "cat_wigner", "custom"};
    return sections;
}

ConfigMap ConfigMap::from_file(const std::string& path, const std::string& scenario) {
    std::ifstream in(path);
    if (!in) throw IOFailure("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), scenario, path);
}

ConfigMap ConfigMap::empty(const std::string& scenario) {
    return from_string("", scenario, "<defaults>");
}

ConfigMap ConfigMap::from_string(const std::string& text, const std::string& scenario,
                                 const std::string& origin) {
    ConfigMap cfg;
    cfg.scenario_ = normalize(scenario);
    cfg.origin_ = origin;

    std::istringstream in(text);
    std::string line;
    std::string section = "common";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ConfigParse(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header '" + t + "'");
            }
            section = normalize(trim(t.substr(1, t.size() - 2)));
            const auto& known = known_sections();
            if (std::find(known.begin(), known.end(), section) == known.end()) {
                throw ConfigParse(origin + ":" + std::to_string(lineno) +
                                  ": unknown section '" + section + "'");
            }
            continue;
        }
        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigParse(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + t + "'");
        }
        const std::string key = normalize(trim(t.substr(0, eq)));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigParse(origin + ":" + std::to_string(lineno) +
                              ": empty key or value");
        }
        if (section != "common" && section != cfg.scenario_) continue;
        if (cfg.entries_.count(key) && section == "common" &&
            cfg.entries_[key].line < 0) {
            continue;  // scenario section already claimed the key
        }
        // Scenario-section values win over common ones.
        const bool from_scenario = section == cfg.scenario_;
        auto it = cfg.entries_.find(key);
        if (it == cfg.entries_.end() || from_scenario) {
            cfg.entries_[key] = Entry{value, from_scenario ? -lineno : lineno, false};
        }
    }
    return cfg;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    entries_[normalize(key)] = Entry{value, 0, false};
}

void ConfigMap::note(const std::string& key, const std::string& value) {
    record(key, value);
}

bool ConfigMap::has(const std::string& key) const {
    return entries_.count(normalize(key)) > 0;
}

std::string ConfigMap::raw(const std::string& key, bool* found) {
    auto it = entries_.find(normalize(key));
    if (it == entries_.end()) {
        *found = false;
        return "";
    }
    it->second.consumed = true;
    *found = true;
    return it->second.value;
}

void ConfigMap::record(const std::string& key, const std::string& value) {
    for (auto& kv : resolved_) {
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    }
    resolved_.emplace_back(key, value);
}

double ConfigMap::get_double(const std::string& key, double def) {
    bool found = false;
    const std::string v = raw(key, &found);
    double out = def;
    if (found) {
        try {
            size_t pos = 0;
            out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            throw ConfigParse("key '" + key + "': cannot parse '" + v + "' as number");
        }
    }
    std::ostringstream ss;
    ss.precision(17);
    ss << out;
    record(key, ss.str());
    return out;
}

double ConfigMap::get_double_required(const std::string& key) {
    if (!has(key)) throw ConfigParse("missing required key '" + key + "'");
    return get_double(key, 0.0);
}

int ConfigMap::get_int(const std::string& key, int def) {
    bool found = false;
    const std::string v = raw(key, &found);
    int out = def;
    if (found) {
        try {
            size_t pos = 0;
            out = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            throw ConfigParse("key '" + key + "': cannot parse '" + v + "' as integer");
        }
    }
    record(key, std::to_string(out));
    return out;
}

bool ConfigMap::get_bool(const std::string& key, bool def) {
    bool found = false;
    std::string v = raw(key, &found);
    bool out = def;
    if (found) {
        std::transform(v.begin(), v.end(), v.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (v == "true" || v == "1" || v == "yes" || v == "on") {
            out = true;
        } else if (v == "false" || v == "0" || v == "no" || v == "off") {
            out = false;
        } else {
            throw ConfigParse("key '" + key + "': cannot parse '" + v + "' as bool");
        }
    }
    record(key, out ? "true" : "false");
    return out;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& def) {
    bool found = false;
    const std::string v = raw(key, &found);
    const std::string out = found ? v : def;
    record(key, out);
    return out;
}

void ConfigMap::finish() const {
    for (const auto& [key, entry] : entries_) {
        if (!entry.consumed) {
            std::ostringstream ss;
            ss << "unknown key '" << key << "'";
            if (entry.line != 0) ss << " (" << origin_ << ":" << std::abs(entry.line) << ")";
            ss << " for scenario " << scenario_;
            throw ConfigParse(ss.str());
        }
    }
}

}  // namespace optomech
