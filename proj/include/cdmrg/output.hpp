#ifndef CDMRG_OUTPUT_HPP
#define CDMRG_OUTPUT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdmrg/report.hpp"

namespace cdmrg {

// Indented JSON with sorted keys and a trailing newline.
std::string dump_json(const nlohmann::json& j);

std::string sha256_hex(const std::string& bytes);

struct OutputFile {
  std::string name;
  std::string contents;
};

// Files that make up a report, excluding the manifest: summary.json,
// config.json, advisory.json and one CSV per table.
std::vector<OutputFile> report_files(const Report& report, const nlohmann::json& resolved_config);

struct RunInfo {
  std::string command;
  std::string started_utc;
  double runtime_seconds = 0.0;
  int threads = 1;
};

// Writes the files plus manifest.json (SHA-256 per file, the manifest
// itself listed with a null digest). Everything is staged in a sibling
// temporary directory and renamed into place, so a failure leaves no
// partial output. Throws std::runtime_error when the directory is not
// writable.
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files,
                   const RunInfo& info);

std::string utc_timestamp();

}  // namespace cdmrg

#endif  // CDMRG_OUTPUT_HPP
