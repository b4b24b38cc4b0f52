#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdmrg/config.hpp"
#include "cdmrg/harness.hpp"
#include "cdmrg/output.hpp"

namespace {

using namespace cdmrg;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kNumerical = 2;

nlohmann::json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

struct RunOptions {
  std::string config;
  std::string out;
  int threads = 1;
};

int execute(ExperimentConfig cfg, const RunOptions& opt, const std::string& command) {
  const auto start = std::chrono::steady_clock::now();
  RunInfo info;
  info.command = command;
  info.started_utc = utc_timestamp();
  info.threads = opt.threads;
  std::string dir = opt.out;
  if (dir.empty()) dir = cfg.output_dir;
  if (dir.empty()) dir = "results/" + std::string(to_string(cfg.kind));

  const Report report = run_experiment(cfg);
  const auto files = report_files(report, config_to_json(cfg));
  info.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_outputs(dir, files, info);
  std::cout << "wrote " << files.size() + 1 << " files to " << dir << "\n";
  if (report.numerical_failure) {
    std::cerr << "error: some DMRG runs did not reach the energy tolerance; see the report\n";
    return kNumerical;
  }
  return kOk;
}

template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const BoundaryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coherence-aware DMRG experiments"};
  app.require_subcommand(1);
  const std::string command = join_args(argc, argv);
  int status = kOk;

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", run_opt.config, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_opt.out, "Output directory");
  run->add_option("--threads", run_opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  run->callback([&] {
    status = guarded([&] { return execute(load_config(run_opt.config), run_opt, command); });
  });

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config file without running it");
  validate->add_option("config", validate_path, "JSON config")->required()->check(CLI::ExistingFile);
  validate->callback([&] {
    status = guarded([&] {
      const ExperimentConfig cfg = load_config(validate_path);
      std::cout << "ok: " << to_string(cfg.kind) << "\n";
      return kOk;
    });
  });

  // One subcommand per experiment kind; the config file is optional and its
  // kind is overridden.
  std::vector<RunOptions> kind_opts(4);
  const ExperimentKind kinds[] = {ExperimentKind::crossing_scan, ExperimentKind::pec_comparison,
                                  ExperimentKind::dmrg_benchmark,
                                  ExperimentKind::gauge_diagnostics};
  for (std::size_t i = 0; i < 4; ++i) {
    const ExperimentKind kind = kinds[i];
    std::string name(to_string(kind));
    std::replace(name.begin(), name.end(), '_', '-');
    RunOptions& opt = kind_opts[i];
    auto* sub = app.add_subcommand(name, "Run " + std::string(to_string(kind)) + " (defaults unless a config is given)");
    sub->add_option("config", opt.config, "JSON config")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([&status, &command, &opt, kind] {
      status = guarded([&] {
        nlohmann::json doc =
            opt.config.empty() ? nlohmann::json::object() : read_document(opt.config);
        if (!doc.is_object()) throw InvalidInput("config must be a JSON object");
        doc["kind"] = std::string(to_string(kind));
        return execute(parse_config(doc), opt, command);
      });
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }
  return status;
}
