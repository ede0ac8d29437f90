// Command-line front end for the experiments.
//
// Exit codes: 0 all checks passed, 1 a check failed, 2 bad configuration,
// 3 any other runtime error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpercept/experiments.hpp"

namespace {

using Command = qpercept::CommandResult (*)(const qpercept::ConfigSection&,
                                            const qpercept::RunOptions&);

struct Subcommand {
  const char* name;
  const char* help;
  Command run;
};

const Subcommand kSubcommands[] = {
    {"jz", "Relative entropy and trace distance for J_z monitoring", qpercept::cmd_jz},
    {"oscillator-curves", "Long-time bounds versus efficiency for the oscillator",
     qpercept::cmd_oscillator_curves},
    {"qubit-verify", "Analytic regression suite on a monitored qubit",
     qpercept::cmd_qubit_verify},
    {"multi-agent", "Two agents watching different channels of one qubit",
     qpercept::cmd_multi_agent},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensembles of continuously monitored quantum systems seen by "
               "agents with different access to the record"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  unsigned threads = 0;
  bool quiet = false;

  for (const auto& sub : kSubcommands) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    cmd->add_option("--config", config_path, "INI file; the section named after the subcommand is read")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "Override the configured seed");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it")
        ->capture_default_str();
    cmd->add_option("--trajectories", trajectories, "Override the configured trajectory count");
    cmd->add_flag("--quiet", quiet, "Only print failures");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const Subcommand* chosen = nullptr;
  for (const auto& sub : kSubcommands) {
    if (app.got_subcommand(sub.name)) chosen = &sub;
  }

  qpercept::RunOptions opts;
  opts.out_dir = out_dir;
  opts.seed = seed;
  opts.trajectories = trajectories;
  opts.threads = threads;
  opts.log = quiet ? nullptr : &std::cout;

  try {
    qpercept::ConfigSection section =
        config_path.empty() ? qpercept::ConfigSection(chosen->name, {})
                            : qpercept::load_config(config_path, chosen->name);
    qpercept::CommandResult result = chosen->run(section, opts);
    if (quiet) {
      for (const auto& c : result.checks) {
        if (!c.passed) std::cout << "FAIL " << c.name << "  " << c.detail << "\n";
      }
    }
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << "\n";
    return result.passed() ? 0 : 1;
  } catch (const qpercept::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
