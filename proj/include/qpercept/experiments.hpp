#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qpercept/config.hpp"

// The four reproducible experiments behind the command-line tool. Each reads
// its parameters from a config section, validates all of them before doing
// any work, writes CSV tables plus a JSON summary into the output directory,
// and reports whether its checks passed.
namespace qpercept {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;         // overrides the config's seed
  std::optional<std::size_t> trajectories;  // overrides n_trajectories
  unsigned threads = 0;                      // 0 = hardware concurrency
  std::ostream* log = nullptr;               // progress and check lines
};

struct CheckOutcome {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct CommandResult {
  std::vector<CheckOutcome> checks;
  std::vector<std::filesystem::path> files;

  bool passed() const;
};

CommandResult cmd_jz(const ConfigSection& cfg, const RunOptions& opts);
CommandResult cmd_oscillator_curves(const ConfigSection& cfg, const RunOptions& opts);
CommandResult cmd_qubit_verify(const ConfigSection& cfg, const RunOptions& opts);
CommandResult cmd_multi_agent(const ConfigSection& cfg, const RunOptions& opts);

}  // namespace qpercept
