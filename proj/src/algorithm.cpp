#include "costrec/algorithm.hpp"

#include <fmt/format.h>

#include "costrec/error.hpp"

namespace costrec {

ServiceOutcome Argmax::serve(const ValuationProfile& v) const {
  AgentSet s(v.size());
  if (v.size() == 0) return {s};
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  s.insert(best);
  return {s};
}

ServiceOutcome Argmin::serve(const ValuationProfile& v) const {
  AgentSet s(v.size());
  if (v.size() == 0) return {s};
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  s.insert(best);
  return {s};
}

std::string ValueThreshold::name() const { return fmt::format("value_threshold({:.12g})", cutoff_); }

ServiceOutcome ValueThreshold::serve(const ValuationProfile& v) const {
  AgentSet s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (meets_threshold(v[i], cutoff_)) s.insert(i);
  return {s};
}

ServiceOutcome SocialCostOptimal::serve(const ValuationProfile& v) const {
  const std::size_t n = v.size();
  require(n <= 20, ErrorCode::SupportTooLarge, "optimal algorithm enumerates subsets of at most 20 agents");
  std::uint64_t best_mask = 0;
  double best = social_cost(AgentSet(n), v, cost_);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    const double sc = social_cost(AgentSet::from_mask(n, mask), v, cost_);
    if (sc < best) {
      best = sc;
      best_mask = mask;
    }
  }
  return {AgentSet::from_mask(n, best_mask)};
}

PricedAllocation::PricedAllocation(AlgorithmPtr base, Rule rule, double price)
    : base_(std::move(base)), rule_(rule), price_(price) {
  require(base_ != nullptr, ErrorCode::InvalidArgument, "priced allocation needs a base algorithm");
}

std::string PricedAllocation::name() const {
  switch (rule_) {
    case Rule::Zero: return base_->name() + "+zero_price";
    case Rule::Flat: return fmt::format("{}+flat_price({:.12g})", base_->name(), price_);
    case Rule::PayYourBid: return base_->name() + "+pay_your_bid";
  }
  return base_->name();
}

MechanismResult PricedAllocation::priced(const ValuationProfile& v, const AgentSet& served) const {
  MechanismResult r{served, std::vector<double>(v.size(), 0.0)};
  served.for_each([&](std::size_t i) {
    switch (rule_) {
      case Rule::Zero: break;
      case Rule::Flat: r.payments[i] = price_; break;
      case Rule::PayYourBid: r.payments[i] = v[i]; break;
    }
  });
  return r;
}

MechanismResult PricedAllocation::run(const ValuationProfile& v, RandomStream& rng) const {
  return priced(v, base_->run(v, rng).served);
}

std::vector<Weighted<MechanismResult>> PricedAllocation::distribution(const ValuationProfile& v) const {
  std::vector<Weighted<MechanismResult>> out;
  for (auto& [outcome, p] : base_->distribution(v)) out.push_back({priced(v, outcome.served), p});
  return out;
}

}  // namespace costrec
