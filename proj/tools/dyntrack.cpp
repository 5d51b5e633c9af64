// dyntrack: scenario generation, tracking runs and the ablation suite.
//
//   dyntrack simulate --preset fast --seed 3 --out runs/fast3
//   dyntrack track --scenario runs/fast3/scenario.jsonl --config tracker.cfg --out runs/fast3
//   dyntrack ablate --config configs/ablation_stress.cfg --jobs 4
//   dyntrack track --preset stress --print-config
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dyntrack/cli.hpp"

namespace {

using namespace dyntrack;

struct Common {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Common& c, const std::string& config_help) {
  cmd->add_option("--config", c.config, config_help);
  cmd->add_option("--preset", c.preset, "scenario preset")->check(CLI::IsMember({"fast", "stress", "slow"}));
  cmd->add_option("--seed", c.seed, "scenario seed");
  cmd->add_option("--out", c.out, "output directory (default: $DYNTRACK_OUT_ROOT/<command>)");
  cmd->add_flag("--print-config", c.print_config, "print the effective configuration and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose tracking for fast-moving cameras and objects, on synthetic scenarios"};
  app.require_subcommand(1);

  Common sim_c, track_c, abl_c;
  auto* sim = app.add_subcommand("simulate", "generate a scenario file");
  add_common(sim, sim_c, "scenario config file");

  auto* track = app.add_subcommand("track", "track a scenario and score it");
  add_common(track, track_c, "config file (tracker, refiner and scenario keys)");
  std::string scenario_path, refiner_path, variant;
  track->add_option("--scenario", scenario_path, "scenario file from 'simulate'");
  track->add_option("--refiner-config", refiner_path, "separate refiner config file");
  track->add_option("--variant", variant, "ablation variant")
      ->check(CLI::IsMember({"full", "no-translation", "no-rotation"}));

  auto* abl = app.add_subcommand("ablate", "run every (variant, seed) cell of a manifest");
  add_common(abl, abl_c, "ablation manifest");
  unsigned jobs = 1;
  abl->add_option("--jobs", jobs, "parallel cells")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (sim->parsed()) {
      if (sim_c.print_config) return cli::cmd_print_config(sim_c.config, sim_c.preset, sim_c.seed, std::cout);
      return cli::cmd_simulate({sim_c.config, sim_c.preset, sim_c.seed, sim_c.out}, std::cout);
    }
    if (track->parsed()) {
      if (track_c.print_config) {
        return cli::cmd_print_config(track_c.config, track_c.preset, track_c.seed, std::cout);
      }
      return cli::cmd_track({scenario_path, track_c.config, refiner_path, track_c.preset, track_c.seed, variant,
                             track_c.out},
                            std::cout);
    }
    if (abl_c.print_config) {
      std::cerr << "error: --print-config is not available for ablate; use it with simulate or track\n";
      return cli::kUsage;
    }
    if (abl_c.seed) {
      std::cerr << "error: ablate takes its seeds from the manifest\n";
      return cli::kUsage;
    }
    return cli::cmd_ablate({abl_c.config, abl_c.preset, abl_c.out, jobs}, std::cout);
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const InvalidConfig& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const dyntrack::ParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return cli::kRuntime;
  }
}
