#include "knnmi/json_out.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace knnmi {

namespace {

void write_number(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "\"nan\"";
  } else if (std::isinf(v)) {
    out << (v > 0 ? "\"inf\"" : "\"-inf\"");
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  }
}

void write(std::ostream& out, const nlohmann::json& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
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
        write(out, it.value(), indent, depth + 1);
      }
      out << nl << close_pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_primitive(); });
      out << "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out << ",";
        if (!flat) out << nl << pad;
        else if (!first && indent > 0) out << " ";
        first = false;
        write(out, e, indent, depth + 1);
      }
      if (!flat) out << nl << close_pad;
      out << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out << j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& doc, int indent) {
  std::ostringstream out;
  write(out, doc, indent, 0);
  return out.str();
}

nlohmann::json report_to_json(const EstimateReport& report, bool include_local) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["method"] = report.method;
  doc["estimate"] = report.estimate;
  doc["k"] = report.k;
  doc["norm"] = to_string(report.norm);
  doc["N"] = report.samples;
  doc["dims"] = report.dims;
  doc["units"] = "nats";
  doc["truncate"] = report.threshold.has_value();
  if (report.threshold) {
    doc["threshold"] = *report.threshold;
    std::size_t zeroed = 0;
    for (bool t : report.truncated) zeroed += t ? 1 : 0;
    doc["truncated_samples"] = zeroed;
  }
  doc["warnings"] = report.warnings;
  if (include_local) doc["local_terms"] = report.local;
  return doc;
}

}  // namespace knnmi
