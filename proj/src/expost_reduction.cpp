#include "costrec/expost_reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "costrec/error.hpp"
#include "costrec/format.hpp"

namespace costrec {

namespace {

MechanismResult nobody(std::size_t n) { return {AgentSet(n), std::vector<double>(n, 0.0)}; }

MechanismResult serve_at(const AgentSet& s, double price) {
  MechanismResult r{s, std::vector<double>(s.universe(), 0.0)};
  s.for_each([&](std::size_t i) { r.payments[i] = price; });
  return r;
}

MechanismResult first_recovering_level(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost,
                                       const std::vector<double>& thresholds) {
  require(served.universe() == v.size(), ErrorCode::InvalidArgument, "served set and profile sizes differ");
  for (double t : thresholds) {
    AgentSet s(v.size());
    served.for_each([&](std::size_t i) {
      if (v[i] >= t) s.insert(i);
    });
    if (t * static_cast<double>(s.count()) >= cost(s)) return serve_at(s, t);
  }
  return nobody(v.size());
}

void require_truthful_base(const AllocationAlgorithm& base) {
  const AlgorithmTraits t = base.traits();
  require(t.deterministic && t.truthful && t.no_bossy, ErrorCode::Configuration,
          fmt::format("threshold-price reduction needs a deterministic, truthful, no-bossy base; {} is not",
                      base.name()));
}

}  // namespace

SupportList::SupportList(std::vector<double> values) : values_(std::move(values)) {
  require(!values_.empty(), ErrorCode::InvalidArgument, "support list must not be empty");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    require(std::isfinite(values_[k]) && values_[k] > 0.0, ErrorCode::InvalidArgument,
            "support values must be finite and > 0");
    require(k == 0 || values_[k] > values_[k - 1], ErrorCode::InvalidArgument,
            "support values must be strictly increasing");
  }
}

SupportList SupportList::powers_of_two(double v_min, double h) {
  require(v_min > 0.0 && h >= 1.0, ErrorCode::InvalidArgument, "need v_min > 0 and h >= 1");
  const auto last = static_cast<int>(std::floor(std::log2(h) + 1e-9));
  std::vector<double> t;
  for (int j = 0; j <= last; ++j) t.push_back(v_min * std::ldexp(1.0, j));
  return SupportList(std::move(t));
}

bool SupportList::contains(double v) const noexcept {
  return std::binary_search(values_.begin(), values_.end(), v);
}

MechanismResult reduce_zero_one(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost) {
  require(served.universe() == v.size(), ErrorCode::InvalidArgument, "served set and profile sizes differ");
  for (std::size_t i = 0; i < v.size(); ++i)
    require(v[i] == 0.0 || v[i] == 1.0, ErrorCode::NonBinaryValuation,
            fmt::format("agent {} has value {:.12g}, expected 0 or 1", i, v[i]));
  AgentSet s(v.size());
  served.for_each([&](std::size_t i) {
    if (v[i] == 1.0) s.insert(i);
  });
  if (cost(s) <= static_cast<double>(s.count())) return serve_at(s, 1.0);
  return nobody(v.size());
}

MechanismResult reduce_powers_of_two(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost,
                                     double v_min, double h) {
  return first_recovering_level(served, v, cost, SupportList::powers_of_two(v_min, h).values());
}

MechanismResult reduce_support_list(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost,
                                    const SupportList& support) {
  for (std::size_t i = 0; i < v.size(); ++i)
    require(support.contains(v[i]), ErrorCode::ValueOutsideSupport,
            fmt::format("agent {} reports {:.12g}, outside the support list", i, v[i]));
  return first_recovering_level(served, v, cost, support.values());
}

ZeroOneReduction::ZeroOneReduction(AlgorithmPtr base, CostFunction cost) : base_(std::move(base)), cost_(cost) {
  require(base_ != nullptr, ErrorCode::InvalidArgument, "reduction needs a base algorithm");
}

MechanismResult ZeroOneReduction::run(const ValuationProfile& v, RandomStream& rng) const {
  return reduce_zero_one(base_->run(v, rng).served, v, cost_);
}

std::vector<Weighted<MechanismResult>> ZeroOneReduction::distribution(const ValuationProfile& v) const {
  std::vector<Weighted<MechanismResult>> out;
  for (const auto& [outcome, q] : base_->distribution(v)) out.push_back({reduce_zero_one(outcome.served, v, cost_), q});
  return out;
}

ThresholdPriceReduction::ThresholdPriceReduction(AlgorithmPtr base, CostFunction cost, SupportList support, bool pow2)
    : base_(std::move(base)), cost_(std::move(cost)), support_(std::move(support)), pow2_(pow2) {
  require(base_ != nullptr, ErrorCode::InvalidArgument, "reduction needs a base algorithm");
  require_truthful_base(*base_);
}

ThresholdPriceReduction ThresholdPriceReduction::powers_of_two(AlgorithmPtr base, CostFunction cost, double v_min,
                                                               double h) {
  return {std::move(base), std::move(cost), SupportList::powers_of_two(v_min, h), true};
}

ThresholdPriceReduction ThresholdPriceReduction::support_list(AlgorithmPtr base, CostFunction cost,
                                                              SupportList support) {
  return {std::move(base), std::move(cost), std::move(support), false};
}

std::string ThresholdPriceReduction::name() const {
  return (pow2_ ? "expost_pow2[" : "expost_support[") + base_->name() + "]";
}

MechanismResult ThresholdPriceReduction::apply(const ValuationProfile& v) const {
  RandomStream unused(0, Purpose::Mechanism);
  const AgentSet served = base_->run(v, unused).served;
  if (pow2_) return first_recovering_level(served, v, cost_, support_.values());
  return reduce_support_list(served, v, cost_, support_);
}

MechanismResult ThresholdPriceReduction::run(const ValuationProfile& v, RandomStream&) const { return apply(v); }

std::vector<Weighted<MechanismResult>> ThresholdPriceReduction::distribution(const ValuationProfile& v) const {
  return {{apply(v), 1.0}};
}

ValueGrid binary_grid(std::size_t n) { return ValueGrid(n, std::vector<double>{0.0, 1.0}); }

ValueGrid uniform_grid(std::size_t n, std::vector<double> values) { return ValueGrid(n, std::move(values)); }

ValueGrid grid_of(const ProductPrior& prior) {
  ValueGrid g(prior.agents());
  for (std::size_t i = 0; i < prior.agents(); ++i)
    for (const auto& a : prior[i].atoms())
      if (a.probability > 0.0) g[i].push_back(a.value);
  return g;
}

std::size_t grid_size(const ValueGrid& grid) noexcept {
  std::size_t total = 1;
  for (const auto& g : grid) {
    if (g.empty()) return 0;
    if (total > std::numeric_limits<std::size_t>::max() / g.size()) return std::numeric_limits<std::size_t>::max();
    total *= g.size();
  }
  return total;
}

std::vector<BossyViolation> check_no_bossy(const AllocationAlgorithm& alg, const ValueGrid& grid, std::size_t cap) {
  require(alg.traits().deterministic, ErrorCode::Configuration, "no-bossiness is checked for deterministic algorithms");
  std::vector<BossyViolation> out;
  RandomStream unused(0, Purpose::Audit);
  std::map<std::vector<double>, AgentSet> cache;
  auto served_at = [&](const ValuationProfile& v) -> const AgentSet& {
    std::vector<double> key(v.values().begin(), v.values().end());
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(std::move(key), alg.run(v, unused).served).first;
    return it->second;
  };
  for_each_profile(grid, cap, [&](const ValuationProfile& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const AgentSet& s = served_at(v);
      if (!s.contains(i)) continue;
      for (double other : grid[i]) {
        if (!(other > v[i])) continue;
        const ValuationProfile w = v.with(i, other);
        const AgentSet& s2 = served_at(w);
        if (s2.contains(i) && !(s2 == s)) out.push_back({i, v[i], other, v, s, s2});
      }
    }
  });
  return out;
}

}  // namespace costrec
