#include "cdmrg/output.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <stdexcept>

#include <openssl/evp.h>

namespace cdmrg {

namespace fs = std::filesystem;

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::vector<OutputFile> report_files(const Report& report, const nlohmann::json& resolved_config) {
  std::vector<OutputFile> files;
  files.push_back({"summary.json", dump_json(report.summary)});
  files.push_back({"config.json", dump_json(resolved_config)});
  files.push_back({"advisory.json", dump_json(nlohmann::json::object())});
  for (const auto& [name, table] : report.tables) files.push_back({name + ".csv", to_csv(table)});
  return files;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  out.close();
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace

void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files, const RunInfo& info) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& f : files) {
    entries.push_back({{"path", f.name}, {"sha256", sha256_hex(f.contents)}, {"bytes", f.contents.size()}});
  }
  entries.push_back({{"path", "manifest.json"}, {"sha256", nullptr}, {"bytes", nullptr}});
  const nlohmann::json manifest = {{"files", entries},
                                   {"command", info.command},
                                   {"started_utc", info.started_utc},
                                   {"runtime_seconds", info.runtime_seconds},
                                   {"threads", info.threads}};

  const fs::path target = fs::absolute(dir).lexically_normal();
  const fs::path parent = target.parent_path();
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw std::runtime_error("cannot create '" + parent.string() + "': " + ec.message());

  std::mt19937_64 rng(std::random_device{}());
  const std::string tag = std::to_string(rng() % 1000000000ULL);
  const fs::path staging = parent / ("." + target.filename().string() + ".tmp-" + tag);
  const fs::path backup = parent / ("." + target.filename().string() + ".old-" + tag);
  try {
    fs::create_directory(staging);
    for (const auto& f : files) write_file(staging / f.name, f.contents);
    write_file(staging / "manifest.json", dump_json(manifest));
    if (fs::exists(target)) fs::rename(target, backup);
    fs::rename(staging, target);
  } catch (const std::exception& e) {
    fs::remove_all(staging, ec);
    if (!fs::exists(target) && fs::exists(backup)) fs::rename(backup, target, ec);
    throw std::runtime_error("cannot write outputs to '" + target.string() + "': " + e.what());
  }
  fs::remove_all(backup, ec);
}

}  // namespace cdmrg
