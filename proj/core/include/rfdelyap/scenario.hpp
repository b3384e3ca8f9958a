#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rfdelyap/certify.hpp"

namespace rfdelyap {

/// A parsed scenario file. The layout is described in docs/scenario_schema.md.
struct Scenario {
  std::string path;
  std::string name;
  std::uint64_t seed = 0;
  nlohmann::json raw;
};

/// Parse errors carry "file:line:column: message".
Scenario parse_scenario(const std::string& text, const std::string& origin);
Scenario load_scenario(const std::string& path);

struct RunOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> grid_step;
  bool quiet = false;
  /// When false nothing is written to disk.
  bool write = true;
};

struct RunResult {
  CertReport report;
  nlohmann::json report_json;
  std::string out_dir;
  /// 0 all checks passed, 1 a check failed.
  int exit_code = 0;
};

/// Runs every check in order and writes report.json, summary.txt, envelope
/// and trajectory CSVs and one witness file per failed check. Configuration
/// problems raise ConfigError.
RunResult run_scenario(const Scenario& sc, const RunOptions& opts = {});

struct ReplayResult {
  double slack = 0.0;
  double recorded = 0.0;
  double tolerance = 0.0;
  /// The recomputed slack equals the recorded one bit for bit.
  bool reproduced = false;
  bool failing = false;
};

ReplayResult replay_scenario_witness(const Scenario& sc, const nlohmann::json& witness,
                                     const RunOptions& opts = {});

}  // namespace rfdelyap
