#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "costrec/model.hpp"
#include "costrec/rng.hpp"

namespace costrec {

/// Half-open value interval (lo, hi]. A lower end of -infinity admits the value 0,
/// which is how the zero cell of a grid is expressed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval zero_cell() noexcept { return {-std::numeric_limits<double>::infinity(), 0.0}; }
  bool contains(double v) const noexcept { return in_half_open(v, lo, hi); }
};

struct Atom {
  double value;
  double probability;
};

/// Distribution of a single agent's value.
class ValueDistribution {
 public:
  enum class Kind { DiscreteAtoms, UniformContinuous, EqualRevenue };

  /// Atoms must have strictly increasing values >= 0 and probabilities summing to 1 (1e-12).
  static ValueDistribution discrete(std::vector<Atom> atoms);
  static ValueDistribution uniform(double lo, double hi);
  /// Mass 1/h at 0 and density proportional to 1/z^2 on [1, h], scaled by `scale`.
  static ValueDistribution equal_revenue(double h, double scale = 1.0);

  Kind kind() const noexcept { return kind_; }
  bool is_discrete() const noexcept { return kind_ == Kind::DiscreteAtoms; }
  /// Throws NotDiscrete for continuous kinds.
  const std::vector<Atom>& atoms() const;

  double support_lo() const noexcept;
  double support_hi() const noexcept;
  /// Infimum of the nonzero part of the support; +infinity if the value is always 0.
  double min_nonzero() const noexcept;
  double mean() const noexcept;

  double cdf(double x) const noexcept;
  /// Pr[V in (lo, hi]].
  double mass(const Interval& interval) const noexcept;

  double sample(RandomStream& rng) const;
  /// Inverse CDF at u in (0, 1).
  double quantile(double u) const;
  /// Draw from the distribution restricted to `interval`; ZeroMassInterval if it has no mass.
  double conditional_sample(const Interval& interval, RandomStream& rng) const;
  /// Atoms inside the interval with renormalized probabilities (discrete only).
  std::vector<Atom> conditional_atoms(const Interval& interval) const;

  /// Parameters: (lo, hi) for uniform, (h, scale) for equal revenue.
  double param_a() const noexcept { return a_; }
  double param_b() const noexcept { return b_; }

  std::string describe() const;

  friend bool operator==(const ValueDistribution& x, const ValueDistribution& y) noexcept;

 private:
  ValueDistribution() = default;
  Kind kind_ = Kind::DiscreteAtoms;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  double a_ = 0.0;
  double b_ = 0.0;
};

inline constexpr std::size_t kDefaultSupportCap = 1'000'000;

/// Independent per-agent value distributions.
class ProductPrior {
 public:
  explicit ProductPrior(std::vector<ValueDistribution> dists);
  static ProductPrior iid(const ValueDistribution& dist, std::size_t n);

  std::size_t agents() const noexcept { return dists_.size(); }
  const ValueDistribution& operator[](std::size_t i) const { return dists_[i]; }
  const std::vector<ValueDistribution>& distributions() const noexcept { return dists_; }

  double v_max() const noexcept { return v_max_; }
  double v_min() const noexcept { return v_min_; }
  double h() const noexcept { return v_max_ / v_min_; }

  bool is_discrete() const noexcept;
  bool identical_marginals() const noexcept;
  /// Product of atom counts, saturating at SIZE_MAX. NotDiscrete for continuous priors.
  std::size_t support_size() const;

  ValuationProfile sample(RandomStream& rng) const;

 private:
  std::vector<ValueDistribution> dists_;
  double v_max_ = 0.0;
  double v_min_ = 0.0;
};

/// Every profile in the product support with its probability.
/// NotDiscrete for continuous marginals, SupportTooLarge above `cap`.
std::vector<Weighted<ValuationProfile>> enumerate_support(const ProductPrior& prior,
                                                          std::size_t cap = kDefaultSupportCap);

/// Profiles with agent `agent` pinned to `value`; the weight is the probability
/// of the other agents' values only.
std::vector<Weighted<ValuationProfile>> enumerate_others(const ProductPrior& prior, std::size_t agent,
                                                         double value, std::size_t cap = kDefaultSupportCap);

}  // namespace costrec
