#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "costrec/experiment.hpp"

using namespace costrec;

int main(int argc, char** argv) {
  CLI::App app{"costrec: cost-recovering reductions and their audits"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> mode;
  unsigned jobs = default_jobs();

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "YAML experiment config");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out-dir", out_dir, "Override the output directory");
    sub->add_option("--jobs", jobs, "Worker threads (default: COSTREC_JOBS or all cores)")->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "Build the configured mechanism and write schedule, profiles and summary");
  common(run, true);
  run->add_option("--mode", mode, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
  auto* audit = app.add_subcommand("audit", "Run the audit suite for the configured mechanism");
  common(audit, true);
  audit->add_option("--mode", mode, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
  auto* sweep = app.add_subcommand("sweep", "Run the config over its sweep grid");
  common(sweep, true);
  sweep->add_option("--mode", mode, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));

  LowerBoundConfig lb;
  std::string selector = "combined";
  std::optional<double> eps0;
  auto* lower = app.add_subcommand("lowerbound", "Equal-revenue lower-bound experiment");
  lower->set_help_flag("--help", "Print this help message and exit");
  common(lower, false);
  lower->add_option("--h", lb.h, "Value range ratio h");
  lower->add_option("--agents", lb.agents, "Number of agents n");
  lower->add_option("--samples", lb.samples, "Evaluation samples");
  lower->add_option("--delta", lb.delta, "Grid width (0: v_min)");
  lower->add_option("--epsilon", lb.epsilon, "Curve accuracy");
  lower->add_option("--epsilon0", eps0, "Stopping-test slack (default 2 eps n)");
  lower->add_option("--selector", selector, "log_h, log_n or combined")
      ->check(CLI::IsMember({"log_h", "log_n", "combined"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  Overrides o;
  o.seed = seed;
  o.out_dir = out_dir;
  o.jobs = jobs;
  if (mode) o.mode = *mode == "exact" ? Mode::Exact : Mode::Sampled;

  try {
    if (*lower) {
      if (seed) lb.seed = *seed;
      lb.epsilon0 = eps0;
      lb.jobs = jobs;
      lb.selector = selector == "log_h" ? BicSelector::LogH : selector == "log_n" ? BicSelector::LogN : BicSelector::Combined;
      return cmd_lowerbound(lb, out_dir.value_or("out/lowerbound"), std::cout);
    }
    ExperimentConfig c = load_config(config_path);
    if (*run) return cmd_run(std::move(c), o, std::cout);
    if (*audit) return cmd_audit(std::move(c), o, std::cout);
    return cmd_sweep(std::move(c), o, std::cout);
  } catch (const std::exception& e) {
    return exit_code_for(e, std::cerr);
  }
}
