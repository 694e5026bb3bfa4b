// Batch experiment driver.
//
//   attractor run <config.json> [--out DIR] [--overwrite] [--jobs N]
//   attractor scan <config.json>
//   attractor check <config.json>
//
// Exit codes: 0 success, 1 verdict failure, 2 config error, 3 numerical divergence.
// ATTRACTOR_SEED, when set, replaces every seed in the config.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "attractor/experiment.hpp"

namespace fs = std::filesystem;
using namespace attractor;

namespace {

constexpr int kConfigError = static_cast<int>(RunStatus::config_error);

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("ATTRACTOR_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::size_t used = 0;
  const std::string text(raw);
  const unsigned long long v = std::stoull(text, &used);
  if (used != text.size()) throw ConfigSemanticError("ATTRACTOR_SEED", "expected a non-negative integer");
  return v;
}

bool directory_has_entries(const fs::path& dir) {
  std::error_code ec;
  return fs::is_directory(dir, ec) && !fs::is_empty(dir, ec);
}

int execute(const std::string& command, const std::string& config_path, const std::optional<std::string>& out,
            bool overwrite, unsigned jobs) {
  std::vector<ExperimentConfig> batch;
  try {
    batch = load_config(config_path);
    if (auto seed = seed_from_env()) override_seeds(batch, *seed);
  } catch (const ConfigSyntaxError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigSemanticError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  const RunMode mode = command == "scan" ? RunMode::scan_only : command == "check" ? RunMode::check_only : RunMode::full;
  auto outdir_for = [&](const ExperimentConfig& cfg) { return fs::path(out ? *out : cfg.output); };

  if (mode == RunMode::full && !overwrite) {
    for (const auto& cfg : batch) {
      const fs::path dir = outdir_for(cfg) / cfg.name;
      if (directory_has_entries(dir)) {
        std::cerr << "output directory '" << dir.string() << "' is not empty (pass --overwrite)\n";
        return kConfigError;
      }
    }
  }

  const auto results = run_batch(batch, mode, jobs);
  const json summary = summary_json(results);

  if (mode == RunMode::full) {
    try {
      for (std::size_t i = 0; i < results.size(); ++i) write_artifacts(results[i], outdir_for(batch[i]));
      const fs::path summary_dir = outdir_for(batch.front());
      fs::create_directories(summary_dir);
      write_text(summary_dir / "summary.json", summary.dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << "failed to write outputs: " << e.what() << '\n';
      return static_cast<int>(RunStatus::verdict_failure);
    }
  }

  std::cout << summary.dump(2) << '\n';
  for (const auto& r : results) {
    std::cerr << r.name << ": " << (r.status == RunStatus::ok ? "ok" : "FAILED") << '\n';
  }
  return static_cast<int>(batch_status(results));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attractive-point experiments: extensions, class checks, Halpern and Mann runs"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  bool overwrite = false;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "build attractors, run checks, scans and iterations; write outputs");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_flag("--overwrite", overwrite, "replace existing experiment outputs");
  run->add_option("--jobs", jobs, "experiments to run concurrently")->check(CLI::PositiveNumber);

  auto* scan = app.add_subcommand("scan", "fixed-point scan of the extension only");
  scan->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* check = app.add_subcommand("check", "mapping-class checks only");
  check->add_option("config", config_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  return execute(command, config_path, out, overwrite, jobs);
}
