#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "rfdelyap/certify.hpp"

namespace rfdelyap {

/// JSON text with sorted keys, two-space indent and every floating-point
/// value printed with %.17g. Non-finite values become the strings "inf",
/// "-inf" and "nan". Identical values give identical bytes.
std::string dump_json(const nlohmann::json& j);

/// Human-readable summary. Each failed check is followed by the command that
/// replays its witness, `rfde-lyap replay <scenario> <out_dir>/witness_<i>.json`.
std::string summary_text(const CertReport& report, const std::string& scenario_path,
                         const std::string& out_dir);

/// Writes a text file, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rfdelyap
