#pragma once

// JSON (de)serialization of sequences. Angles are stored in units of pi at
// 12 significant digits.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ril/exchange_kernel.hpp"
#include "ril/objective.hpp"
#include "ril/sequences.hpp"

namespace ril {

using json = nlohmann::json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kStoredDigits = 12;

inline double round_significant(double v, int digits = kStoredDigits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

inline double to_stored_pi(double radians) { return round_significant(radians / kPi); }

// Rounds every angle to what the stored form can hold and wraps into [0, 2pi).
inline double storable_angle(double radians) {
  return wrap_two_pi(to_stored_pi(wrap_two_pi(radians)) * kPi);
}

inline json sequence_to_json(const ExchangeSequence& seq) {
  json angles = json::array(), mask = json::array();
  for (int k = 0; k < kNumSlots; ++k) {
    angles.push_back(to_stored_pi(seq.angles[k]));
    mask.push_back(seq.mask[k]);
  }
  return {{"angles_pi", angles}, {"mask", mask}};
}

inline ExchangeSequence sequence_from_json(const json& j) {
  if (!j.contains("angles_pi") || !j["angles_pi"].is_array() || j["angles_pi"].size() != kNumSlots) {
    throw ParseError("sequence needs 'angles_pi' with " + std::to_string(kNumSlots) + " numbers");
  }
  std::array<double, kNumSlots> rad{};
  for (int k = 0; k < kNumSlots; ++k) {
    const auto& v = j["angles_pi"][k];
    if (!v.is_number()) throw ParseError("angles_pi[" + std::to_string(k) + "] is not a number");
    rad[k] = v.get<double>() * kPi;
  }
  ExchangeSequence seq = ExchangeSequence::from_angles(rad);
  if (j.contains("mask")) {
    const auto& m = j["mask"];
    if (!m.is_array() || m.size() != kNumSlots) {
      throw ParseError("'mask' must hold " + std::to_string(kNumSlots) + " booleans");
    }
    for (int k = 0; k < kNumSlots; ++k) seq.mask[k] = m[k].get<bool>();
  }
  try {
    seq.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return seq;
}

inline json reversal_to_json(const QaReversal& r) {
  return {{"phi_pi", to_stored_pi(r.phi)}, {"gamma_pi", to_stored_pi(r.gamma)}};
}

inline QaReversal reversal_from_json(const json& j) {
  return {j.at("phi_pi").get<double>() * kPi, j.at("gamma_pi").get<double>() * kPi};
}

// A user-supplied sequence file: {"name", "angles_pi", optional "mask",
// optional "reversal", optional "verify_threshold"}.
struct SequenceFile {
  SequenceRecord record;
  std::optional<QaReversal> reversal;
};

inline SequenceFile sequence_file_from_json(const json& j) {
  SequenceFile f;
  f.record.name = j.value("name", std::string("unnamed"));
  f.record.sequence = sequence_from_json(j);
  if (j.contains("verify_threshold")) f.record.verify_threshold = j["verify_threshold"].get<double>();
  if (j.contains("reversal")) f.reversal = reversal_from_json(j["reversal"]);
  return f;
}

inline json sequence_file_to_json(const SequenceFile& f) {
  json j = sequence_to_json(f.record.sequence);
  j["name"] = f.record.name;
  if (f.record.verify_threshold) j["verify_threshold"] = *f.record.verify_threshold;
  if (f.reversal) j["reversal"] = reversal_to_json(*f.reversal);
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

// Bundled name or path to a sequence file.
inline SequenceFile load_sequence(const std::string& name_or_path) {
  if (auto rec = bundled::find(name_or_path)) return {*rec, std::nullopt};
  try {
    return sequence_file_from_json(read_json_file(name_or_path));
  } catch (const json::exception& e) {
    throw ParseError(name_or_path + ": " + e.what());
  }
}

}  // namespace ril
