#pragma once

#include <string>
#include <utility>
#include <vector>

#include "optomech/errors.hpp"

namespace optomech {

inline constexpr const char* kVersion = "0.1.0";

/// A table of sweep output: one row per axis point, an error column for
/// failed points, and a metadata block with the fully resolved config.
struct SweepResult {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_errors;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_row(std::vector<double> row, std::string error = "");
    void set_metadata(const std::vector<std::pair<std::string, std::string>>& resolved,
                      double wall_time_s);
};

/// Atomic writers (temp file + rename). Floats use 17 significant digits.
void write_csv(const SweepResult& result, const std::string& path);
void write_json(const SweepResult& result, const std::string& path);

std::string format_double(double v);

}  // namespace optomech
