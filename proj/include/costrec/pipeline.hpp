#pragma once

// End-to-end Bayesian reduction: curves, monotonization, threshold selection
// and the final mechanism, in exact or sampled mode.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "costrec/bic_reduction.hpp"

namespace costrec {

enum class BicSelector { LogH, LogN, Combined };

struct BayesianSetup {
  std::shared_ptr<const ProductPrior> prior;
  AlgorithmPtr base;
  CostFunction cost = CostFunction::public_excludable(1.0);
  Mode mode = Mode::Exact;
  double delta = 0.5;
  double epsilon = 0.1;
  std::optional<double> epsilon0;
  /// Samples per (agent, cell) for curve estimation; 0 derives it from epsilon.
  std::size_t curve_samples = 0;
  /// Fresh profiles for expected costs in sampled mode; 0 uses curve_samples.
  std::size_t cost_samples = 0;
  std::uint64_t seed = 1;
  PaymentRule payments = PaymentRule::ClosedForm;
  std::size_t support_cap = kDefaultSupportCap;
  unsigned jobs = 1;
};

struct BayesianBuild {
  Discretization grid{1.0, 1.0};
  /// Curves of the base algorithm before monotonization (raw estimates in sampled mode).
  CurveSet raw_curves;
  /// Monotone curves the payments are computed from.
  CurveSet curves;
  /// Exact mode only: the pooled, resampling wrapper around the base.
  std::shared_ptr<const MonotonizedAlgorithm> monotonized;
  /// The allocation the thresholds truncate.
  AlgorithmPtr allocation;
  std::optional<SamplingConfig> sampling;
  double epsilon0 = 0.0;
  std::optional<ProfileSource> cost_source;
};

/// Default slack: 2 eps n in sampled mode, 0 in exact mode.
double default_epsilon0(Mode mode, double epsilon, std::size_t agents) noexcept;

BayesianBuild prepare_bayesian(const BayesianSetup& setup);

struct BayesianReduction {
  BayesianBuild build;
  std::vector<ThresholdSchedule> schedules;
  std::vector<Moment> social_costs;
  std::string chosen;
  ReducedPtr mechanism;
};

BayesianReduction reduce_bayesian(const BayesianSetup& setup, BicSelector selector);

std::string to_string(BicSelector selector);

}  // namespace costrec
