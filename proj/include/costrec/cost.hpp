#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "costrec/model.hpp"

namespace costrec {

/// Service cost C(S) of serving a set of agents.
class CostFunction {
 public:
  enum class Kind { PublicExcludable, Additive, CardinalityConcave, ExplicitTable };

  /// C(S) = c for every nonempty S.
  static CostFunction public_excludable(double c);
  /// C(S) = sum of per-agent costs.
  static CostFunction additive(std::vector<double> per_agent);
  /// C(S) = g[|S|]; g has n + 1 entries.
  static CostFunction cardinality(std::vector<double> g);
  /// C(S) = table[mask(S)]; 2^n entries, n <= 20.
  static CostFunction explicit_table(std::size_t n, std::vector<double> table);

  double operator()(const AgentSet& s) const;

  Kind kind() const noexcept { return kind_; }
  /// Agent count the function is defined for, if it fixes one.
  std::optional<std::size_t> agents() const noexcept;
  const std::vector<double>& parameters() const noexcept { return params_; }
  std::string describe() const;

 private:
  CostFunction(Kind kind, std::vector<double> params, std::size_t n) : kind_(kind), params_(std::move(params)), n_(n) {}
  Kind kind_;
  std::vector<double> params_;
  std::size_t n_;
};

struct CostMonotoneReport {
  bool empty_is_zero = true;
  /// Pairs (S, T) with S a subset of T and C(S) > C(T); only covering pairs T = S + {i} are listed.
  std::vector<std::pair<AgentSet, AgentSet>> violations;

  bool ok() const noexcept { return empty_is_zero && violations.empty(); }
};

/// Exhaustive check over covering pairs for n <= 20 (monotonicity along covering
/// pairs implies it for all nested pairs).
CostMonotoneReport check_cost_monotone(const CostFunction& cost, std::size_t n);

double social_cost(const AgentSet& served, const ValuationProfile& v, const CostFunction& cost);
double social_welfare(const AgentSet& served, const ValuationProfile& v);

}  // namespace costrec
