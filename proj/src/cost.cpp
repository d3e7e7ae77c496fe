#include "costrec/cost.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "costrec/error.hpp"

namespace costrec {

namespace {

void check_entries(const std::vector<double>& xs, const char* what) {
  for (double x : xs)
    require(std::isfinite(x) && x >= 0.0, ErrorCode::InvalidArgument,
            fmt::format("{} entries must be finite and >= 0", what));
}

}  // namespace

CostFunction CostFunction::public_excludable(double c) {
  require(std::isfinite(c) && c >= 0.0, ErrorCode::InvalidArgument, "public good cost must be finite and >= 0");
  return {Kind::PublicExcludable, {c}, 0};
}

CostFunction CostFunction::additive(std::vector<double> per_agent) {
  check_entries(per_agent, "additive cost");
  const std::size_t n = per_agent.size();
  return {Kind::Additive, std::move(per_agent), n};
}

CostFunction CostFunction::cardinality(std::vector<double> g) {
  require(!g.empty(), ErrorCode::InvalidArgument, "cardinality cost needs g[0..n]");
  check_entries(g, "cardinality cost");
  const std::size_t n = g.size() - 1;
  return {Kind::CardinalityConcave, std::move(g), n};
}

CostFunction CostFunction::explicit_table(std::size_t n, std::vector<double> table) {
  require(n <= 20, ErrorCode::InvalidArgument, "explicit cost tables support at most 20 agents");
  require(table.size() == (std::size_t{1} << n), ErrorCode::InvalidArgument,
          fmt::format("explicit cost table for {} agents needs {} entries", n, std::size_t{1} << n));
  check_entries(table, "explicit cost table");
  return {Kind::ExplicitTable, std::move(table), n};
}

std::optional<std::size_t> CostFunction::agents() const noexcept {
  if (kind_ == Kind::PublicExcludable) return std::nullopt;
  return n_;
}

double CostFunction::operator()(const AgentSet& s) const {
  if (kind_ != Kind::PublicExcludable)
    require(s.universe() == n_, ErrorCode::InvalidArgument,
            fmt::format("cost function is defined for {} agents, got a set over {}", n_, s.universe()));
  switch (kind_) {
    case Kind::PublicExcludable: return s.empty() ? 0.0 : params_[0];
    case Kind::Additive: {
      double c = 0.0;
      s.for_each([&](std::size_t i) { c += params_[i]; });
      return c;
    }
    case Kind::CardinalityConcave: return params_[s.count()];
    case Kind::ExplicitTable: return params_[s.mask()];
  }
  return 0.0;
}

std::string CostFunction::describe() const {
  switch (kind_) {
    case Kind::PublicExcludable: return fmt::format("public_excludable({:.12g})", params_[0]);
    case Kind::Additive: return fmt::format("additive({:.12g})", fmt::join(params_, ","));
    case Kind::CardinalityConcave: return fmt::format("cardinality({:.12g})", fmt::join(params_, ","));
    case Kind::ExplicitTable: return fmt::format("explicit_table(n={})", n_);
  }
  return "?";
}

CostMonotoneReport check_cost_monotone(const CostFunction& cost, std::size_t n) {
  require(n <= 20, ErrorCode::SupportTooLarge, "monotonicity check enumerates subsets of at most 20 agents");
  if (auto fixed = cost.agents()) require(*fixed == n, ErrorCode::InvalidArgument, "agent count mismatch");
  CostMonotoneReport report;
  report.empty_is_zero = cost(AgentSet(n)) == 0.0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::vector<double> values(subsets);
  for (std::uint64_t mask = 0; mask < subsets; ++mask) values[mask] = cost(AgentSet::from_mask(n, mask));
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (mask & bit) continue;
      if (values[mask] > values[mask | bit])
        report.violations.emplace_back(AgentSet::from_mask(n, mask), AgentSet::from_mask(n, mask | bit));
    }
  }
  return report;
}

double social_cost(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost) {
  require(served.universe() == v.size(), ErrorCode::InvalidArgument, "served set and profile sizes differ");
  double excluded = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!served.contains(i)) excluded += v[i];
  return cost(served) + excluded;
}

double social_welfare(const AgentSet& served, const ValuationProfile& v) {
  require(served.universe() == v.size(), ErrorCode::InvalidArgument, "served set and profile sizes differ");
  double w = 0.0;
  served.for_each([&](std::size_t i) { w += v[i]; });
  return w;
}

}  // namespace costrec
