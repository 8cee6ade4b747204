#include <iostream>

#include <CLI11.hpp>

#include "lqgbound/commands.hpp"

int main(int argc, char** argv) {
  lqgbound::RunConfig cfg;
  CLI::App app{"LQG regret lower bounds: certificates, constants and Monte Carlo checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lqgbound::kVersion);

  auto add_common = [&](CLI::App* sub, bool needs_instance) {
    auto* opt = sub->add_option("--instance", cfg.instance_path, "instance JSON file");
    if (needs_instance) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", cfg.output_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  };

  CLI::App* analyze = app.add_subcommand("analyze", "certificate and lower-bound constants");
  add_common(analyze, true);
  analyze->add_option("--eps", cfg.eps, "neighbourhood radius")->capture_default_str();

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo regret per horizon");
  add_common(simulate, true);
  simulate->add_option("--horizon", cfg.horizons, "horizon(s), comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  simulate->add_option("--rollouts", cfg.n_rollouts, "rollouts per horizon")
      ->check(CLI::Range(2, 100000000));
  simulate->add_option("--policy", cfg.policy,
                       "optimal | feedback:K.json | ce-dither:sigma0,beta")
      ->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "failure-mode sweeps of the closed-form bounds");
  add_common(sweep, false);
  sweep->add_option("--sweep", cfg.sweep, "{marginal,observability,unit-root}:start:stop:points")
      ->required();

  CLI::App* validate = app.add_subcommand("validate", "run the invariant suite on an instance");
  add_common(validate, true);
  validate->add_option("--horizon", cfg.horizons, "horizon for regret checks")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  validate->add_option("--rollouts", cfg.n_rollouts, "rollouts per check")
      ->check(CLI::Range(2, 100000000));
  validate->add_option("--eps", cfg.eps, "neighbourhood radius");
  validate->add_option("--alpha", cfg.alpha, "LLN exponent");
  validate->add_option("--delta", cfg.delta, "LLN deflation (default 0.5 sigma_min(Sigma_nu))");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lqgbound::kExitInputError;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return lqgbound::run_command(cfg, std::cout, std::cerr);
}
