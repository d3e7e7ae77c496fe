#pragma once

// Subcommand implementations behind the costrec CLI.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "costrec/audit.hpp"
#include "costrec/config.hpp"

namespace costrec {

enum ExitCode : int { kExitOk = 0, kExitAuditFail = 1, kExitConfig = 2, kExitIncompatible = 3 };

/// Command-line overrides applied on top of a config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<Mode> mode;
  unsigned jobs = 1;
};

void apply_overrides(ExperimentConfig& c, const Overrides& o);

struct Experiment {
  std::shared_ptr<const ProductPrior> prior;
  CostFunction cost = CostFunction::public_excludable(1.0);
  AlgorithmPtr base;
  MechanismPtr mechanism;
  std::optional<BayesianReduction> bayesian;
  /// Profiles every expectation in the summary is taken over.
  std::optional<ProfileSource> evaluation;
  Moment expected_cost;
  Moment expected_revenue;
  Moment social_cost;
  Moment base_social_cost;
  double ratio = 1.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::size_t> k;
  std::string chosen;
};

/// Builds the instance and mechanism and evaluates the summary quantities.
/// Incompatible (or NotDiscrete / SupportTooLarge) for exact mode on an
/// instance that cannot be enumerated.
Experiment run_experiment(const ExperimentConfig& c, unsigned jobs);

std::string summary_json(const ExperimentConfig& c, const Experiment& e, const std::string& command);
void write_profiles_csv(std::ostream& out, const ExperimentConfig& c, const Experiment& e);

std::vector<AuditReport> audit_experiment(const ExperimentConfig& c, const Experiment& e, unsigned jobs);

int cmd_run(ExperimentConfig c, const Overrides& o, std::ostream& log);
int cmd_audit(ExperimentConfig c, const Overrides& o, std::ostream& log);
int cmd_lowerbound(const LowerBoundConfig& lb, const std::string& out_dir, std::ostream& log);
int cmd_sweep(ExperimentConfig c, const Overrides& o, std::ostream& log);

/// Maps an exception from any subcommand to its exit status, printing it.
int exit_code_for(const std::exception& e, std::ostream& err);

}  // namespace costrec
