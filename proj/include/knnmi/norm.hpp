#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace knnmi {

enum class Norm { L2, LInf };

inline const char* to_string(Norm norm) { return norm == Norm::L2 ? "l2" : "linf"; }

inline std::optional<Norm> parse_norm(std::string_view text) {
  if (text == "l2" || text == "2") return Norm::L2;
  if (text == "linf" || text == "inf" || text == "max") return Norm::LInf;
  return std::nullopt;
}

}  // namespace knnmi
