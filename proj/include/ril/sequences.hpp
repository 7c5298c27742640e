#pragma once

// Bundled reset-if-leaked sequences, angles in units of pi.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ril/exchange_kernel.hpp"
#include "ril/objective.hpp"

namespace ril {

struct SequenceRecord {
  std::string name;
  ExchangeSequence sequence;
  // Angles printed to six decimals only reach f_total ~ 1e-5.
  std::optional<double> verify_threshold;
};

namespace bundled {

// q1 pi = arccos(1/3)
inline double q1() { return std::acos(1.0 / 3.0) / kPi; }

inline SequenceRecord no_flag() {
  const double q = q1();
  return {"no_flag",
          ExchangeSequence::from_angles_pi({q, 0.0, 2.0 - q, 1.0, 1.5, 1.5, 0.0, 1.0, 1.5, 0.5,
                                            0.0, 1.0, 1.5, 1.5, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0}),
          std::nullopt};
}

inline SequenceRecord best_flag() {
  return {"best_flag",
          ExchangeSequence::from_angles_pi({0.496474, 0.511053, 0.407919, 1.128462, 0.644573,
                                            1.456051, 0.233065, 1.473077, 1.574455, 1.481738,
                                            0.296057, 0.778243, 0.458866, 0.762262, 0.654983,
                                            0.907327, 0.495382, 0.403991, 0.0, 1.700957}),
          kPrintedAngleThreshold};
}

inline SequenceRecord worst_flag() {
  return {"worst_flag",
          ExchangeSequence::from_angles_pi({1.540024, 1.988000, 1.646738, 0.463540, 1.603884,
                                            0.829024, 1.183458, 1.404117, 0.613810, 1.416749,
                                            1.310604, 1.379647, 1.556976, 1.310274, 0.517602,
                                            1.411259, 1.144766, 0.015345, 0.0, 0.516077}),
          kPrintedAngleThreshold};
}

inline std::vector<SequenceRecord> all() { return {no_flag(), best_flag(), worst_flag()}; }

inline std::optional<SequenceRecord> find(std::string_view name) {
  for (auto& r : all()) {
    if (r.name == name) return r;
  }
  return std::nullopt;
}

}  // namespace bundled

// The two fixed layouts: 14 gates over 9 layers (no flag) and all slots but
// the placeholder (flaggable).
inline SlotMask mask_no_flag() { return bundled::no_flag().sequence.mask; }

inline SlotMask mask_flaggable() {
  SlotMask m{};
  m.fill(true);
  m[kPlaceholderSlot - 1] = false;
  return m;
}

}  // namespace ril
