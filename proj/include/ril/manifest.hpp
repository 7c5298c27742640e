#pragma once

// Run manifests: enough to rerun a CLI invocation and get the same files.

#include <chrono>
#include <ctime>
#include <string>
#include <vector>

#include "ril/sequence_io.hpp"

namespace ril {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> outputs;

  json to_json() const {
    return {{"format", "ril-manifest"}, {"version", kVersion}, {"command", command},
            {"argv", argv},             {"config", config},    {"seed", seed},
            {"wall_time_s", wall_time_s}, {"outputs", outputs}};
  }

  static RunManifest from_json(const json& j) {
    if (j.value("format", std::string()) != "ril-manifest") throw ParseError("not a ril-manifest file");
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.at("config");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.wall_time_s = j.at("wall_time_s").get<double>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  }
};

inline std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace ril
