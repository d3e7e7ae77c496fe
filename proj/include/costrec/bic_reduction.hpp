#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "costrec/algorithm.hpp"
#include "costrec/cost.hpp"
#include "costrec/expectation.hpp"
#include "costrec/interim.hpp"

namespace costrec {

/// Expectations of the served set truncated at t: S_t(v) = {i in S(v) : v_i >= t}.
struct TruncatedStats {
  Moment cost;
  Moment served;
};

TruncatedStats truncated_stats(const AllocationAlgorithm& alg, const ProfileSource& source, const CostFunction& cost,
                               double t, unsigned jobs = 1);

/// E[C(S_t(v))] over the source's profiles (exact enumeration or fresh samples).
Moment expected_cost_at_threshold(const AllocationAlgorithm& alg, const ProfileSource& source,
                                  const CostFunction& cost, double t, unsigned jobs = 1);

/// Sum over agents of E[p_t(v_i)], exact over atoms or over grid cells of continuous marginals.
double expected_revenue_at_threshold(const CurveSet& curves, const ProductPrior& prior, double t);

/// Smallest multiple of delta strictly larger than x.
double round_up_to_grid(double x, double delta);

struct ScheduleRow {
  std::size_t j = 0;
  double threshold = 0.0;
  Moment cost;
  Moment revenue;
  Moment served;
  double slack = 0.0;
  bool pass = false;
};

struct ThresholdSchedule {
  std::string selector;
  std::vector<ScheduleRow> rows;
  std::size_t chosen = 0;
  double epsilon0 = 0.0;
  Mode mode = Mode::Exact;
  std::size_t cost_samples = 0;
  std::uint64_t seed = 0;

  double threshold() const { return rows.at(chosen).threshold; }
  const ScheduleRow& chosen_row() const { return rows.at(chosen); }
};

/// Inclusive stopping test with slack eps0.
bool passes_stopping_test(double revenue, double cost, double eps0) noexcept;

/// Powers-of-two thresholds v_min 2^j, j = 0 .. 1 + floor(log2 h).
ThresholdSchedule select_threshold_log_h(const AllocationAlgorithm& alg, const ProfileSource& source,
                                         const CostFunction& cost, const CurveSet& curves, double eps0,
                                         unsigned jobs = 1);

/// Adaptive thresholds t_j = ceil(E[C(S_{j-1})] / E[|S_{j-1}|])_delta with t_0 = 0.
ThresholdSchedule select_threshold_log_n(const AllocationAlgorithm& alg, const ProfileSource& source,
                                         const CostFunction& cost, const CurveSet& curves, double delta,
                                         double eps0, unsigned jobs = 1);

enum class PaymentRule { ClosedForm, Sampled };

/// Serves S(v) restricted to agents at or above the threshold and charges each
/// served agent p_T(v_i) / x_i(v_i).
class ReducedMechanism final : public Mechanism {
 public:
  ReducedMechanism(AlgorithmPtr alg, CurveSet curves, double threshold, PaymentRule rule = PaymentRule::ClosedForm,
                   std::string label = "reduced");

  std::string name() const override;
  MechanismResult run(const ValuationProfile& v, RandomStream& rng) const override;
  std::vector<Weighted<MechanismResult>> distribution(const ValuationProfile& v) const override;

  double threshold() const noexcept { return threshold_; }
  const CurveSet& curves() const noexcept { return curves_; }
  const AlgorithmPtr& allocation() const noexcept { return alg_; }
  PaymentRule payment_rule() const noexcept { return rule_; }
  /// Closed-form price for a served agent.
  double price(std::size_t agent, double value) const;

 private:
  AgentSet truncate(const ValuationProfile& v, const AgentSet& served) const;

  AlgorithmPtr alg_;
  CurveSet curves_;
  double threshold_;
  PaymentRule rule_;
  std::string label_;
};

using ReducedPtr = std::shared_ptr<const ReducedMechanism>;

/// E[SC] of a mechanism (or algorithm) over a source, using common random numbers.
template <class Object>
Moment expected_social_cost(const Object& obj, const ProfileSource& source, const CostFunction& cost,
                            unsigned jobs = 1) {
  return expect(
      obj, source, 1,
      [&](const ValuationProfile& v, const auto& outcome, std::span<double> out) {
        out[0] = social_cost(outcome.served, v, cost);
      },
      jobs)[0];
}

struct CombinedReduction {
  ThresholdSchedule log_h;
  ThresholdSchedule log_n;
  Moment social_cost_log_h;
  Moment social_cost_log_n;
  std::string chosen;
  ReducedPtr mechanism;
};

/// Runs both selectors and keeps the mechanism with the smaller measured
/// expected social cost; ties keep the powers-of-two variant.
CombinedReduction reduce_combined(const AlgorithmPtr& alg, const ProfileSource& source, const CostFunction& cost,
                                  const CurveSet& curves, double delta, double eps0,
                                  PaymentRule rule = PaymentRule::ClosedForm, unsigned jobs = 1);

void write_schedule_csv(std::ostream& out, const std::vector<ThresholdSchedule>& schedules);

}  // namespace costrec
