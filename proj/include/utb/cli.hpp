#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "utb/parse.hpp"

namespace utb {

constexpr const char* kToolVersion = "0.3.0";
constexpr const char* kCacheEnv = "UTB_CACHE_DIR";

enum ExitCode { ExitOk = 0, ExitUsage = 2, ExitComputation = 3, ExitUnknown = 4 };

struct RunManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> input_digests;  // label, hex digest
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  Json flags = Json::object();
  std::vector<std::pair<std::string, std::string>> outputs;  // path, hex digest
  double duration_s = 0;
  std::string failed_stage;
  std::string error;
  bool cached = false;

  Json to_json() const;
};

std::string hex_digest(const std::string& bytes);

// argv[0] is the program name. Output goes to out, diagnostics to err.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace utb
