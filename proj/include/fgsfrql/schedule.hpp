#pragma once

#include <string>

#include "fgsfrql/common.hpp"

namespace fgsfrql {

enum class LrSchedule { constant, robbins_monro };

inline LrSchedule lr_schedule_from_string(const std::string& s) {
  if (s == "constant") return LrSchedule::constant;
  if (s == "robbins_monro") return LrSchedule::robbins_monro;
  throw ConfigError("unknown lr schedule: " + s);
}

inline std::string to_string(LrSchedule s) {
  return s == LrSchedule::constant ? "constant" : "robbins_monro";
}

// robbins_monro: alpha_k = alpha0 / (1 + k / 10000), a harmonic-family decay
// whose sum diverges while the sum of squares converges.
inline double lr_at(LrSchedule schedule, double alpha0, long k) {
  if (schedule == LrSchedule::constant) return alpha0;
  return alpha0 / (1.0 + static_cast<double>(k) / 10000.0);
}

}  // namespace fgsfrql
