#pragma once

#include <string>

#include <json.hpp>

#include "knnmi/report.hpp"

namespace knnmi {

/// Serializes with every floating-point number at 17 significant digits so
/// output documents round-trip bit-exactly. Non-finite values become
/// the strings "inf", "-inf" or "nan".
std::string dump_json(const nlohmann::json& doc, int indent = 2);

/// Estimate document: schema_version, method, estimate, k, norm, N, dims,
/// truncation metadata and warnings. Local terms are included on request.
nlohmann::json report_to_json(const EstimateReport& report, bool include_local = false);

}  // namespace knnmi
