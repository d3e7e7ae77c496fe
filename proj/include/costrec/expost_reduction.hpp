#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "costrec/algorithm.hpp"
#include "costrec/cost.hpp"
#include "costrec/distribution.hpp"

namespace costrec {

/// Strictly increasing positive values every agent's value is drawn from.
class SupportList {
 public:
  explicit SupportList(std::vector<double> values);
  /// v_min 2^j for j = 0 .. floor(log2 h).
  static SupportList powers_of_two(double v_min, double h);
  const std::vector<double>& values() const noexcept { return values_; }
  bool contains(double v) const noexcept;

 private:
  std::vector<double> values_;
};

/// Drops zero-value winners and serves the rest at price 1 iff C(S) <= |S|.
/// NonBinaryValuation unless every value is 0 or 1.
MechanismResult reduce_zero_one(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost);

/// First j with v_min 2^j |S_j| >= C(S_j), S_j = {i in S : v_i >= v_min 2^j},
/// serves S_j at that price; nobody if no j <= floor(log2 h) passes.
MechanismResult reduce_powers_of_two(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost,
                                     double v_min, double h);

/// Same, iterating thresholds over the support in ascending order.
MechanismResult reduce_support_list(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost,
                                    const SupportList& support);

class ZeroOneReduction final : public Mechanism {
 public:
  ZeroOneReduction(AlgorithmPtr base, CostFunction cost);
  std::string name() const override { return "expost_01[" + base_->name() + "]"; }
  MechanismResult run(const ValuationProfile& v, RandomStream& rng) const override;
  std::vector<Weighted<MechanismResult>> distribution(const ValuationProfile& v) const override;

 private:
  AlgorithmPtr base_;
  CostFunction cost_;
};

/// Powers-of-two or support-list thresholds over a deterministic, truthful,
/// no-bossy base; other bases are refused with a Configuration error.
class ThresholdPriceReduction final : public Mechanism {
 public:
  static ThresholdPriceReduction powers_of_two(AlgorithmPtr base, CostFunction cost, double v_min, double h);
  static ThresholdPriceReduction support_list(AlgorithmPtr base, CostFunction cost, SupportList support);

  std::string name() const override;
  MechanismResult run(const ValuationProfile& v, RandomStream& rng) const override;
  std::vector<Weighted<MechanismResult>> distribution(const ValuationProfile& v) const override;

 private:
  ThresholdPriceReduction(AlgorithmPtr base, CostFunction cost, SupportList support, bool pow2);
  MechanismResult apply(const ValuationProfile& v) const;

  AlgorithmPtr base_;
  CostFunction cost_;
  SupportList support_;
  bool pow2_;
};

/// Values each agent may report; the grid is their product.
using ValueGrid = std::vector<std::vector<double>>;

ValueGrid binary_grid(std::size_t n);
ValueGrid uniform_grid(std::size_t n, std::vector<double> values);
ValueGrid grid_of(const ProductPrior& prior);
/// Number of profiles in the grid, saturating at SIZE_MAX.
std::size_t grid_size(const ValueGrid& grid) noexcept;

/// Calls f(profile) for every profile of the grid. SupportTooLarge above cap.
template <class F>
void for_each_profile(const ValueGrid& grid, std::size_t cap, F&& f);

struct BossyViolation {
  std::size_t agent = 0;
  double value = 0.0;
  double other_value = 0.0;
  ValuationProfile profile;
  AgentSet served;
  AgentSet other_served;
};

/// Pairs (v_i, v_i') at which agent i is served both times but the served set
/// changes. Needs a deterministic algorithm.
std::vector<BossyViolation> check_no_bossy(const AllocationAlgorithm& alg, const ValueGrid& grid,
                                           std::size_t cap = kDefaultSupportCap);

}  // namespace costrec

#include "costrec/detail/grid_iter.hpp"
