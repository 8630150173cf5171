#pragma once

#include <stdexcept>
#include <string>

namespace gridtop {

/// Error type for all validation and numerical failures surfaced to callers.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class DesignMode { augment, radial, meshed };

inline const char* to_string(DesignMode m) {
  switch (m) {
    case DesignMode::augment: return "augment";
    case DesignMode::radial: return "radial";
    case DesignMode::meshed: return "meshed";
  }
  return "?";
}

inline DesignMode design_mode_from_string(const std::string& s) {
  if (s == "augment") return DesignMode::augment;
  if (s == "radial") return DesignMode::radial;
  if (s == "meshed") return DesignMode::meshed;
  throw Error("unknown design mode '" + s + "' (expected augment|radial|meshed)");
}

}  // namespace gridtop
