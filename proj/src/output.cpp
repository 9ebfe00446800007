#include "optomech/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace optomech {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void SweepResult::add_row(std::vector<double> row, std::string error) {
    if (row.size() != columns.size()) {
        throw IOFailure("SweepResult row width " + std::to_string(row.size()) +
                        " does not match " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
    row_errors.push_back(std::move(error));
}

void SweepResult::set_metadata(
    const std::vector<std::pair<std::string, std::string>>& resolved, double wall_time_s) {
    metadata.clear();
    metadata.emplace_back("version", kVersion);
    for (const auto& kv : resolved) metadata.push_back(kv);
    metadata.emplace_back("wall_time_s", format_double(wall_time_s));
}

namespace {

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IOFailure("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out) throw IOFailure("write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw IOFailure("rename '" + tmp + "' -> '" + path + "' failed");
    }
}

}  // namespace

void write_csv(const SweepResult& result, const std::string& path) {
    std::ostringstream out;
    for (const auto& [k, v] : result.metadata) out << "# " << k << " = " << v << "\n";
    for (size_t c = 0; c < result.columns.size(); ++c) {
        if (c) out << ",";
        out << result.columns[c];
    }
    out << ",error\n";
    for (size_t r = 0; r < result.rows.size(); ++r) {
        for (size_t c = 0; c < result.rows[r].size(); ++c) {
            if (c) out << ",";
            out << format_double(result.rows[r][c]);
        }
        out << "," << result.row_errors[r] << "\n";
    }
    atomic_write(path, out.str());
}

void write_json(const SweepResult& result, const std::string& path) {
    nlohmann::ordered_json j;
    j["name"] = result.name;
    nlohmann::ordered_json meta;
    for (const auto& [k, v] : result.metadata) meta[k] = v;
    j["metadata"] = meta;
    j["columns"] = result.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (size_t r = 0; r < result.rows.size(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (double v : result.rows[r]) row.push_back(v);
        rows.push_back(row);
    }
    j["rows"] = rows;
    j["row_errors"] = result.row_errors;
    atomic_write(path, j.dump(2) + "\n");
}

}  // namespace optomech
