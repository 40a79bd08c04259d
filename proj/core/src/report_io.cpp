#include "lowmach/report_io.hpp"

#include "lowmach/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lowmach::report {

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace {

void emit(std::ostringstream& out, const nlohmann::json& j, int indent, int level) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (level + 1)), ' ') : "";
  const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * level), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{" << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << "," << nl;
        first = false;
        out << pad << nlohmann::json(it.key()).dump() << (indent > 0 ? ": " : ":");
        emit(out, it.value(), indent, level + 1);
      }
      out << nl << close << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // numeric arrays stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const nlohmann::json& e) { return e.is_primitive(); });
      out << "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << (flat ? ", " : ",");
        if (!flat) out << nl << pad;
        first = false;
        emit(out, e, indent, level + 1);
      }
      if (!flat) out << nl << close;
      out << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out << format_double(j.get<double>());
      return;
    default:
      out << j.dump();
  }
}

}  // namespace

std::string dump(const nlohmann::json& doc, int indent) {
  std::ostringstream out;
  emit(out, doc, indent, 0);
  return out.str();
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing", "output_dir");
  out << dump(doc) << "\n";
  if (!out) throw ValidationError("failed writing '" + path + "'", "output_dir");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<CsvCell>>& rows) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing", "output_dir");
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      const auto& c = row[i];
      if (c.is_number_float())
        out << format_double(c.get<double>());
      else if (c.is_string())
        out << c.get<std::string>();
      else
        out << c.dump();
    }
    out << "\n";
  }
  if (!out) throw ValidationError("failed writing '" + path + "'", "output_dir");
}

}  // namespace lowmach::report
