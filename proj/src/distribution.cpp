#include "costrec/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "costrec/error.hpp"

namespace costrec {

ValueDistribution ValueDistribution::discrete(std::vector<Atom> atoms) {
  require(!atoms.empty(), ErrorCode::InvalidArgument, "discrete distribution needs at least one atom");
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const auto& a = atoms[k];
    require(std::isfinite(a.value) && a.value >= 0.0, ErrorCode::InvalidArgument,
            "atom values must be finite and >= 0");
    require(std::isfinite(a.probability) && a.probability >= 0.0, ErrorCode::InvalidArgument,
            "atom probabilities must be >= 0");
    require(k == 0 || atoms[k - 1].value < a.value, ErrorCode::InvalidArgument,
            "atom values must be strictly increasing");
    total += a.probability;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidArgument,
          fmt::format("atom probabilities sum to {:.17g}, expected 1", total));
  ValueDistribution d;
  d.kind_ = Kind::DiscreteAtoms;
  d.cumulative_.reserve(atoms.size());
  double run = 0.0;
  for (const auto& a : atoms) d.cumulative_.push_back(run += a.probability);
  d.cumulative_.back() = 1.0;
  d.atoms_ = std::move(atoms);
  return d;
}

ValueDistribution ValueDistribution::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo < hi, ErrorCode::InvalidArgument,
          "uniform distribution needs 0 <= lo < hi");
  ValueDistribution d;
  d.kind_ = Kind::UniformContinuous;
  d.a_ = lo;
  d.b_ = hi;
  return d;
}

ValueDistribution ValueDistribution::equal_revenue(double h, double scale) {
  require(std::isfinite(h) && h > 1.0, ErrorCode::InvalidArgument, "equal revenue distribution needs h > 1");
  require(std::isfinite(scale) && scale > 0.0, ErrorCode::InvalidArgument, "scale must be positive");
  ValueDistribution d;
  d.kind_ = Kind::EqualRevenue;
  d.a_ = h;
  d.b_ = scale;
  return d;
}

const std::vector<Atom>& ValueDistribution::atoms() const {
  require(is_discrete(), ErrorCode::NotDiscrete, "distribution " + describe() + " has no finite support");
  return atoms_;
}

double ValueDistribution::support_lo() const noexcept {
  switch (kind_) {
    case Kind::DiscreteAtoms:
      for (const auto& a : atoms_)
        if (a.probability > 0.0) return a.value;
      return atoms_.front().value;
    case Kind::UniformContinuous: return a_;
    case Kind::EqualRevenue: return 0.0;
  }
  return 0.0;
}

double ValueDistribution::support_hi() const noexcept {
  switch (kind_) {
    case Kind::DiscreteAtoms:
      for (auto it = atoms_.rbegin(); it != atoms_.rend(); ++it)
        if (it->probability > 0.0) return it->value;
      return atoms_.back().value;
    case Kind::UniformContinuous: return b_;
    case Kind::EqualRevenue: return a_ * b_;
  }
  return 0.0;
}

double ValueDistribution::min_nonzero() const noexcept {
  switch (kind_) {
    case Kind::DiscreteAtoms:
      for (const auto& a : atoms_)
        if (a.probability > 0.0 && a.value > 0.0) return a.value;
      return std::numeric_limits<double>::infinity();
    case Kind::UniformContinuous: return a_;
    case Kind::EqualRevenue: return b_;
  }
  return 0.0;
}

double ValueDistribution::mean() const noexcept {
  switch (kind_) {
    case Kind::DiscreteAtoms: {
      double m = 0.0;
      for (const auto& a : atoms_) m += a.value * a.probability;
      return m;
    }
    case Kind::UniformContinuous: return 0.5 * (a_ + b_);
    case Kind::EqualRevenue: return b_ * std::log(a_);
  }
  return 0.0;
}

double ValueDistribution::cdf(double x) const noexcept {
  switch (kind_) {
    case Kind::DiscreteAtoms: {
      double c = 0.0;
      for (const auto& a : atoms_) {
        if (a.value > x + edge_tolerance(x)) break;
        c += a.probability;
      }
      return std::min(c, 1.0);
    }
    case Kind::UniformContinuous:
      if (x <= a_) return 0.0;
      if (x >= b_) return 1.0;
      return (x - a_) / (b_ - a_);
    case Kind::EqualRevenue: {
      const double h = a_, s = b_;
      if (x < 0.0) return 0.0;
      if (x < s) return 1.0 / h;
      if (x >= s * h) return 1.0;
      return 1.0 / h + 1.0 - s / x;
    }
  }
  return 0.0;
}

double ValueDistribution::mass(const Interval& interval) const noexcept {
  if (is_discrete()) {
    double m = 0.0;
    for (const auto& a : atoms_)
      if (interval.contains(a.value)) m += a.probability;
    return m;
  }
  const double lower = std::isinf(interval.lo) ? 0.0 : cdf(interval.lo);
  return std::max(0.0, cdf(interval.hi) - lower);
}

double ValueDistribution::quantile(double u) const {
  switch (kind_) {
    case Kind::DiscreteAtoms: {
      const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto k = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
          it - cumulative_.begin(), static_cast<std::ptrdiff_t>(atoms_.size()) - 1));
      return atoms_[k].value;
    }
    case Kind::UniformContinuous: return a_ + (b_ - a_) * u;
    case Kind::EqualRevenue: {
      const double h = a_, s = b_;
      if (u < 1.0 / h) return 0.0;
      return std::min(s * h, s / (1.0 + 1.0 / h - u));
    }
  }
  return 0.0;
}

double ValueDistribution::sample(RandomStream& rng) const { return quantile(rng.uniform()); }

double ValueDistribution::conditional_sample(const Interval& interval, RandomStream& rng) const {
  const double m = mass(interval);
  require(m > 0.0, ErrorCode::ZeroMassInterval,
          fmt::format("{} has no mass on ({:.12g}, {:.12g}]", describe(), interval.lo, interval.hi));
  if (is_discrete()) {
    double target = rng.uniform() * m;
    double last = 0.0;
    for (const auto& a : atoms_) {
      if (!interval.contains(a.value) || a.probability <= 0.0) continue;
      last = a.value;
      if (target < a.probability) return a.value;
      target -= a.probability;
    }
    return last;
  }
  if (kind_ == Kind::UniformContinuous) {
    const double lo = std::isinf(interval.lo) ? a_ : std::max(interval.lo, a_);
    const double hi = std::min(interval.hi, b_);
    return rng.uniform(lo, hi);
  }
  const double lower = std::isinf(interval.lo) ? 0.0 : cdf(interval.lo);
  const double x = quantile(lower + m * rng.uniform());
  // Guard the open lower end against quantile rounding.
  return interval.contains(x) ? x : std::min(interval.hi, support_hi());
}

std::vector<Atom> ValueDistribution::conditional_atoms(const Interval& interval) const {
  std::vector<Atom> out;
  double m = 0.0;
  for (const auto& a : atoms()) {
    if (interval.contains(a.value) && a.probability > 0.0) {
      out.push_back(a);
      m += a.probability;
    }
  }
  for (auto& a : out) a.probability /= m;
  return out;
}

std::string ValueDistribution::describe() const {
  switch (kind_) {
    case Kind::DiscreteAtoms: {
      std::string s = "discrete{";
      for (std::size_t k = 0; k < atoms_.size(); ++k)
        s += fmt::format("{}{:.12g}:{:.12g}", k ? "," : "", atoms_[k].value, atoms_[k].probability);
      return s + "}";
    }
    case Kind::UniformContinuous: return fmt::format("uniform({:.12g},{:.12g})", a_, b_);
    case Kind::EqualRevenue: return fmt::format("equal_revenue(h={:.12g},scale={:.12g})", a_, b_);
  }
  return "?";
}

bool operator==(const ValueDistribution& x, const ValueDistribution& y) noexcept {
  if (x.kind_ != y.kind_) return false;
  if (x.kind_ != ValueDistribution::Kind::DiscreteAtoms) return x.a_ == y.a_ && x.b_ == y.b_;
  if (x.atoms_.size() != y.atoms_.size()) return false;
  for (std::size_t k = 0; k < x.atoms_.size(); ++k)
    if (x.atoms_[k].value != y.atoms_[k].value || x.atoms_[k].probability != y.atoms_[k].probability)
      return false;
  return true;
}

ProductPrior::ProductPrior(std::vector<ValueDistribution> dists) : dists_(std::move(dists)) {
  require(!dists_.empty(), ErrorCode::InvalidArgument, "prior needs at least one agent");
  v_min_ = std::numeric_limits<double>::infinity();
  for (const auto& d : dists_) {
    v_max_ = std::max(v_max_, d.support_hi());
    v_min_ = std::min(v_min_, d.min_nonzero());
  }
  require(std::isfinite(v_min_) && v_min_ > 0.0, ErrorCode::InvalidArgument,
          "prior needs a positive infimum of nonzero values");
}

ProductPrior ProductPrior::iid(const ValueDistribution& dist, std::size_t n) {
  return ProductPrior(std::vector<ValueDistribution>(n, dist));
}

bool ProductPrior::is_discrete() const noexcept {
  return std::all_of(dists_.begin(), dists_.end(), [](const auto& d) { return d.is_discrete(); });
}

bool ProductPrior::identical_marginals() const noexcept {
  return std::all_of(dists_.begin(), dists_.end(), [&](const auto& d) { return d == dists_.front(); });
}

std::size_t ProductPrior::support_size() const {
  std::size_t total = 1;
  for (const auto& d : dists_) {
    const std::size_t k = d.atoms().size();
    if (total > std::numeric_limits<std::size_t>::max() / k) return std::numeric_limits<std::size_t>::max();
    total *= k;
  }
  return total;
}

ValuationProfile ProductPrior::sample(RandomStream& rng) const {
  std::vector<double> v(dists_.size());
  for (std::size_t i = 0; i < dists_.size(); ++i) v[i] = dists_[i].sample(rng);
  return ValuationProfile(std::move(v));
}

namespace {

// Odometer over atom indices; agents flagged in `pinned` are held at a single value.
std::vector<Weighted<ValuationProfile>> enumerate(const ProductPrior& prior, std::size_t pinned_agent,
                                                  double pinned_value, std::size_t cap) {
  const std::size_t n = prior.agents();
  std::vector<std::vector<Atom>> atoms(n);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == pinned_agent) {
      atoms[i] = {{pinned_value, 1.0}};
    } else {
      for (const auto& a : prior[i].atoms())
        if (a.probability > 0.0) atoms[i].push_back(a);
    }
    require(total <= cap / atoms[i].size(), ErrorCode::SupportTooLarge,
            fmt::format("product support exceeds the enumeration cap of {}", cap));
    total *= atoms[i].size();
  }
  std::vector<Weighted<ValuationProfile>> out;
  out.reserve(total);
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> values(n);
  for (std::size_t count = 0; count < total; ++count) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = atoms[i][idx[i]].value;
      p *= atoms[i][idx[i]].probability;
    }
    out.push_back({ValuationProfile(values), p});
    for (std::size_t i = n; i-- > 0;) {
      if (++idx[i] < atoms[i].size()) break;
      idx[i] = 0;
    }
  }
  return out;
}

}  // namespace

std::vector<Weighted<ValuationProfile>> enumerate_support(const ProductPrior& prior, std::size_t cap) {
  return enumerate(prior, prior.agents(), 0.0, cap);
}

std::vector<Weighted<ValuationProfile>> enumerate_others(const ProductPrior& prior, std::size_t agent,
                                                         double value, std::size_t cap) {
  require(agent < prior.agents(), ErrorCode::InvalidArgument, "agent index out of range");
  return enumerate(prior, agent, value, cap);
}

}  // namespace costrec
