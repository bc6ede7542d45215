#pragma once

#include <string>

namespace nutrunner {

// One fastening turn cycles through these stages in order.
enum class Stage { kApproach, kScrew, kRetract };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kApproach: return "Approach";
    case Stage::kScrew: return "Screw";
    case Stage::kRetract: return "Retract";
  }
  return "Unknown";
}

}  // namespace nutrunner
