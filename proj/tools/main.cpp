#include <cstdlib>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "delaychain/errors.hpp"

namespace {

using delaychain::KeyValueConfig;

const char* kUsage = R"(usage: delaychain <command> [--key value ...] [--config FILE]

commands:
  simulate    integrate one system and write the trajectory CSV
  hopf        finite-order Hopf points, deviations, perturbative estimates
  scan        sweep the average delay, refine bifurcation points
  crosscorr   cross-correlation chaos test over an ensemble of pairs
  project     stroboscopic projection point cloud

common keys: system alpha beta gamma a b c T delays weights N dde dt
             transient sample-dt phi t-end seed workers out config
Use --print-config to show the fully resolved settings without running.
)";

/// --key value pairs (and bare --flag switches) merged over an optional
/// --config file; command-line values win.
KeyValueConfig parse_args(int argc, char** argv, int first) {
  KeyValueConfig flags;
  std::string config_path;
  for (int i = first; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind("--", 0) != 0)
      throw delaychain::ConfigError("expected --key, got: " + arg);
    arg = arg.substr(2);
    std::string value = "true";
    if (i + 1 < argc && std::string(argv[i + 1]).rfind("--", 0) != 0)
      value = argv[++i];
    if (arg == "config")
      config_path = value;
    else
      flags.set(arg, value);
  }
  if (!config_path.empty()) {
    const KeyValueConfig file = KeyValueConfig::parse_file(config_path);
    for (const auto& [k, v] : file.sorted_entries()) flags.set_default(k, v);
  }
  if (const char* env = std::getenv("DELAYCHAIN_WORKERS"))
    flags.set_default("workers", env);
  return flags;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace delaychain;
  if (argc < 2) {
    std::cerr << kUsage;
    return cli::kConfigError;
  }
  const std::string command = argv[1];
  try {
    KeyValueConfig cfg = parse_args(argc, argv, 2);
    if (command == "simulate") return cli::run_simulate(std::move(cfg));
    if (command == "hopf") return cli::run_hopf(std::move(cfg));
    if (command == "scan") return cli::run_scan(std::move(cfg));
    if (command == "crosscorr") return cli::run_crosscorr(std::move(cfg));
    if (command == "project") return cli::run_project(std::move(cfg));
    if (command == "help" || command == "--help") {
      std::cout << kUsage;
      return cli::kOk;
    }
    std::cerr << "unknown command: " << command << "\n" << kUsage;
    return cli::kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return cli::kConfigError;
  } catch (const DivergenceError& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return cli::kDivergence;
  } catch (const DiagnosticError& e) {
    std::cerr << "diagnostic failure: " << e.what() << "\n";
    return cli::kDiagnosticFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
