#pragma once

// Canonical JSON and CSV emission: object keys sorted, floating-point values
// printed with 17 significant digits so identical runs give identical bytes.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace lowmach::report {

std::string format_double(double v);

std::string dump(const nlohmann::json& doc, int indent = 2);

void write_json(const std::string& path, const nlohmann::json& doc);

using CsvCell = nlohmann::json;  // number or string

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<CsvCell>>& rows);

}  // namespace lowmach::report
