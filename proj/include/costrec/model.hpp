#pragma once

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace costrec {

/// Absolute slack used when comparing values against grid edges and thresholds.
/// Grid edges are products k*delta and pick up rounding error.
inline double edge_tolerance(double x) noexcept { return 1e-9 * std::max(1.0, std::abs(x)); }

/// v >= t, inclusive, tolerant to rounding in t.
inline bool meets_threshold(double v, double t) noexcept { return v >= t - edge_tolerance(t); }

/// Membership in the half-open interval (lo, hi]; lo may be -infinity.
inline bool in_half_open(double v, double lo, double hi) noexcept {
  const bool above = std::isinf(lo) ? true : v > lo + edge_tolerance(lo);
  return above && v <= hi + edge_tolerance(hi);
}

/// Set of agent indices in [0, n).
class AgentSet {
 public:
  AgentSet() = default;
  explicit AgentSet(std::size_t n) : bits_(n) {}
  AgentSet(std::size_t n, std::initializer_list<std::size_t> members);

  static AgentSet all(std::size_t n);
  static AgentSet from_mask(std::size_t n, std::uint64_t mask);

  std::size_t universe() const noexcept { return bits_.size(); }
  std::size_t count() const noexcept { return bits_.count(); }
  bool empty() const noexcept { return bits_.none(); }
  bool contains(std::size_t i) const { return i < bits_.size() && bits_.test(i); }
  void insert(std::size_t i) { bits_.set(i); }
  void erase(std::size_t i) { bits_.reset(i); }
  std::vector<std::size_t> members() const;
  /// Bitmask of members; requires universe() <= 64.
  std::uint64_t mask() const;
  bool subset_of(const AgentSet& other) const { return bits_.is_subset_of(other.bits_); }

  template <class F>
  void for_each(F&& f) const {
    for (auto i = bits_.find_first(); i != decltype(bits_)::npos; i = bits_.find_next(i)) f(i);
  }

  friend bool operator==(const AgentSet& a, const AgentSet& b) { return a.bits_ == b.bits_; }
  friend bool operator<(const AgentSet& a, const AgentSet& b) { return a.bits_ < b.bits_; }

  std::string to_string() const;

 private:
  boost::dynamic_bitset<std::uint64_t> bits_;
};

/// Reported (or true) values of all n agents, in the same units as costs.
class ValuationProfile {
 public:
  ValuationProfile() = default;
  explicit ValuationProfile(std::vector<double> values);
  ValuationProfile(std::initializer_list<double> values) : ValuationProfile(std::vector<double>(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double total() const noexcept;

  /// Copy of this profile with agent i's value replaced.
  ValuationProfile with(std::size_t i, double value) const;

  friend bool operator==(const ValuationProfile&, const ValuationProfile&) = default;

 private:
  std::vector<double> values_;
};

struct ServiceOutcome {
  AgentSet served;

  friend bool operator==(const ServiceOutcome&, const ServiceOutcome&) = default;
};

struct MechanismResult {
  AgentSet served;
  std::vector<double> payments;

  double revenue() const noexcept;
};

/// A finite-support distribution over outcomes, used wherever exact
/// expectations are computed by enumeration.
template <class T>
struct Weighted {
  T value;
  double probability;
};

}  // namespace costrec
