#include "costrec/pipeline.hpp"

#include "costrec/error.hpp"

namespace costrec {

double default_epsilon0(Mode mode, double epsilon, std::size_t agents) noexcept {
  return mode == Mode::Exact ? 0.0 : 2.0 * epsilon * static_cast<double>(agents);
}

std::string to_string(BicSelector selector) {
  switch (selector) {
    case BicSelector::LogH: return "log_h";
    case BicSelector::LogN: return "log_n";
    case BicSelector::Combined: return "combined";
  }
  return "?";
}

BayesianBuild prepare_bayesian(const BayesianSetup& setup) {
  require(setup.prior != nullptr && setup.base != nullptr, ErrorCode::InvalidArgument,
          "reduction needs a prior and a base algorithm");
  const ProductPrior& prior = *setup.prior;
  BayesianBuild b;
  b.grid = Discretization(setup.delta, prior.v_max());
  b.epsilon0 = setup.epsilon0.value_or(default_epsilon0(setup.mode, setup.epsilon, prior.agents()));
  require(b.epsilon0 >= 0.0, ErrorCode::InvalidArgument, "epsilon0 must be >= 0");

  if (setup.mode == Mode::Exact) {
    require(prior.is_discrete(), ErrorCode::NotDiscrete, "exact mode needs a discrete prior");
    b.raw_curves = exact_interim_curve(*setup.base, prior, b.grid, setup.support_cap, setup.jobs);
    b.monotonized = pava_monotonize(setup.base, setup.prior, b.raw_curves);
    b.curves = b.monotonized->pooled();
    b.allocation = b.monotonized;
    b.cost_source = ProfileSource::exact(setup.prior, setup.support_cap);
    return b;
  }

  SamplingConfig sampling = SamplingConfig::for_accuracy(setup.epsilon, prior.agents(), setup.delta, setup.seed);
  if (setup.curve_samples > 0) sampling.samples = setup.curve_samples;
  b.sampling = sampling;
  b.raw_curves = estimate_raw_interim_curve(*setup.base, prior, b.grid, sampling, setup.jobs);
  b.curves = running_max(b.raw_curves);
  b.allocation = setup.base;
  const std::size_t costs = setup.cost_samples > 0 ? setup.cost_samples : sampling.samples;
  b.cost_source = ProfileSource::sampled(setup.prior, costs, setup.seed, Purpose::CostSampling);
  return b;
}

BayesianReduction reduce_bayesian(const BayesianSetup& setup, BicSelector selector) {
  BayesianReduction r;
  r.build = prepare_bayesian(setup);
  const BayesianBuild& b = r.build;
  switch (selector) {
    case BicSelector::LogH:
    case BicSelector::LogN: {
      ThresholdSchedule s =
          selector == BicSelector::LogH
              ? select_threshold_log_h(*b.allocation, *b.cost_source, setup.cost, b.curves, b.epsilon0, setup.jobs)
              : select_threshold_log_n(*b.allocation, *b.cost_source, setup.cost, b.curves, setup.delta, b.epsilon0,
                                       setup.jobs);
      r.chosen = s.selector;
      r.mechanism = std::make_shared<const ReducedMechanism>(b.allocation, b.curves, s.threshold(), setup.payments,
                                                             s.selector);
      r.schedules.push_back(std::move(s));
      break;
    }
    case BicSelector::Combined: {
      CombinedReduction c = reduce_combined(b.allocation, *b.cost_source, setup.cost, b.curves, setup.delta,
                                            b.epsilon0, setup.payments, setup.jobs);
      r.chosen = c.chosen;
      r.mechanism = c.mechanism;
      r.social_costs = {c.social_cost_log_h, c.social_cost_log_n};
      r.schedules.push_back(std::move(c.log_h));
      r.schedules.push_back(std::move(c.log_n));
      break;
    }
  }
  return r;
}

}  // namespace costrec
