#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "insp/commands.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "mission configuration file")->required();
  cmd->add_option("--seed", [&opts](const CLI::results_t& res) {
    opts.seed = std::stoull(res[0]);
    return true;
  }, "override the configured random seed");
  cmd->add_option("--out", [&opts](const CLI::results_t& res) {
    opts.out_dir = res[0];
    return true;
  }, "override the configured output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverage planning, UWB-inertial localization and mission simulation "
               "for multi-MAV structure inspection"};
  app.require_subcommand(1);

  CommonOpts gen_opts, plan_opts, sim_opts, eval_opts;
  CLI::App* gen = app.add_subcommand("generate", "write the structure cloud and solid model");
  add_common(gen, gen_opts);
  CLI::App* plan = app.add_subcommand("plan", "generate per-agent coverage trajectories");
  add_common(plan, plan_opts);
  CLI::App* sim = app.add_subcommand("simulate", "run the closed-loop mission simulation");
  add_common(sim, sim_opts);
  CLI::App* eval = app.add_subcommand("evaluate", "recompute the report from existing traces");
  add_common(eval, eval_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      insp::cmd_generate(insp::load_mission_config(gen_opts.config_path, gen_opts.seed, gen_opts.out_dir));
    } else if (plan->parsed()) {
      insp::cmd_plan(insp::load_mission_config(plan_opts.config_path, plan_opts.seed, plan_opts.out_dir));
    } else if (sim->parsed()) {
      insp::cmd_simulate(insp::load_mission_config(sim_opts.config_path, sim_opts.seed, sim_opts.out_dir));
    } else if (eval->parsed()) {
      insp::cmd_evaluate(insp::load_mission_config(eval_opts.config_path, eval_opts.seed, eval_opts.out_dir));
    }
  } catch (const insp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
