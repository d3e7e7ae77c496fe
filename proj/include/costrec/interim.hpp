#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "costrec/algorithm.hpp"
#include "costrec/distribution.hpp"

namespace costrec {

/// The delta-grid: cell 0 holds the value 0 alone, cell k >= 1 is ((k-1)delta, k*delta].
class Discretization {
 public:
  Discretization(double delta, double v_hi);

  double delta() const noexcept { return delta_; }
  double v_hi() const noexcept { return v_hi_; }
  /// Number of positive cells K = ceil(v_hi / delta).
  std::size_t cells() const noexcept { return cells_; }
  /// K + 1, counting the zero cell.
  std::size_t size() const noexcept { return cells_ + 1; }
  Interval cell(std::size_t k) const;
  double lower_edge(std::size_t k) const noexcept { return k == 0 ? 0.0 : static_cast<double>(k - 1) * delta_; }
  double upper_edge(std::size_t k) const noexcept { return static_cast<double>(k) * delta_; }
  /// Cell containing v; values above the grid map to the last cell.
  std::size_t cell_of(double v) const noexcept;

  friend bool operator==(const Discretization& a, const Discretization& b) noexcept {
    return a.delta_ == b.delta_ && a.cells_ == b.cells_;
  }

 private:
  double delta_;
  double v_hi_;
  std::size_t cells_;
};

struct Provenance {
  enum class Kind { Exact, Estimated };
  Kind kind = Kind::Exact;
  double epsilon = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  std::string describe() const;
};

/// One agent's interim allocation as a right-continuous step function on the grid.
/// Cells with zero prior mass are "absent": leading absent cells take the first
/// present value, later ones repeat the previous value.
class InterimCurve {
 public:
  InterimCurve(Discretization grid, std::vector<double> values, std::vector<double> masses, Provenance provenance);

  const Discretization& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& masses() const noexcept { return masses_; }
  double value(std::size_t k) const { return values_[k]; }
  double mass(std::size_t k) const { return masses_[k]; }
  bool present(std::size_t k) const { return masses_[k] > 0.0; }
  const Provenance& provenance() const noexcept { return provenance_; }
  bool monotone() const noexcept { return monotone_; }

  /// x(v).
  double at(double v) const noexcept { return values_[grid_.cell_of(v)]; }
  /// Integral of x over [a, b], closed form with partial cells prorated.
  double integral(double a, double b) const noexcept;

 private:
  Discretization grid_;
  std::vector<double> values_;
  std::vector<double> masses_;
  Provenance provenance_;
  bool monotone_ = false;
};

/// One curve per agent.
using CurveSet = std::vector<InterimCurve>;

/// Per-cell masses of one marginal on the grid.
std::vector<double> cell_masses(const ValueDistribution& dist, const Discretization& grid);

/// Pr[alg (or mechanism) serves `agent` | v_agent = value], by enumeration of v_{-agent}
/// and of the object's own finite randomness.
template <class Object>
double exact_service_probability(const Object& obj, const ProductPrior& prior, std::size_t agent, double value,
                                 std::size_t cap = kDefaultSupportCap) {
  double x = 0.0;
  for (const auto& [v, w] : enumerate_others(prior, agent, value, cap))
    for (const auto& [outcome, q] : obj.distribution(v))
      if (outcome.served.contains(agent)) x += w * q;
  return x;
}

/// Exact interim curves on a discrete prior. Entry (i, k) is the probability
/// that alg serves i given v_i in cell k.
CurveSet exact_interim_curve(const AllocationAlgorithm& alg, const ProductPrior& prior, const Discretization& grid,
                             std::size_t cap = kDefaultSupportCap, unsigned jobs = 1);

/// Samples per (agent, cell): ceil(ln(2n / (eps*delta)) / (2 eps^2)).
std::size_t sample_count(double epsilon, std::size_t agents, double delta);

struct SamplingConfig {
  double epsilon = 0.1;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static SamplingConfig for_accuracy(double epsilon, std::size_t agents, double delta, std::uint64_t seed);
};

/// Raw Monte Carlo estimates M_ik / N, before the running maximum.
CurveSet estimate_raw_interim_curve(const AllocationAlgorithm& alg, const ProductPrior& prior,
                                    const Discretization& grid, const SamplingConfig& sampling, unsigned jobs = 1);

/// Estimated curves: raw estimates followed by a running maximum over cells.
CurveSet estimate_interim_curve(const AllocationAlgorithm& alg, const ProductPrior& prior, const Discretization& grid,
                                const SamplingConfig& sampling, unsigned jobs = 1);

/// Running maximum of a curve set (monotone by construction).
CurveSet running_max(const CurveSet& curves);

/// True iff every entry differs by strictly less than eps. GridMismatch otherwise incomparable.
bool eps_close(const CurveSet& a, const CurveSet& b, double eps);
double max_abs_difference(const CurveSet& a, const CurveSet& b);

/// A pooled block of consecutive grid cells with a common curve value.
struct PooledCell {
  std::size_t first = 0;
  std::size_t last = 0;
  double value = 0.0;
  double mass = 0.0;
};

/// Mass-weighted pool-adjacent-violators over the present cells of a curve.
std::vector<PooledCell> pool_adjacent_violators(const InterimCurve& raw);

/// Wraps an algorithm so that each v_i is first resampled from F_i conditional
/// on its pooled cell. Its exact interim curve is the pooled curve.
class MonotonizedAlgorithm final : public AllocationAlgorithm {
 public:
  MonotonizedAlgorithm(AlgorithmPtr base, std::shared_ptr<const ProductPrior> prior, const CurveSet& raw);

  std::string name() const override;
  AlgorithmTraits traits() const override { return traits_; }
  ServiceOutcome run(const ValuationProfile& v, RandomStream& rng) const override;
  std::vector<Weighted<ServiceOutcome>> distribution(const ValuationProfile& v) const override;

  const AlgorithmPtr& base() const noexcept { return base_; }
  const std::vector<std::vector<PooledCell>>& partition() const noexcept { return blocks_; }
  /// Pooled curves, constant on each block and nondecreasing.
  const CurveSet& pooled() const noexcept { return pooled_; }
  /// True iff every block is a single grid cell.
  bool identity_partition() const noexcept;

 private:
  const PooledCell& block_of(std::size_t agent, double value) const;
  Interval block_interval(const PooledCell& b) const;

  AlgorithmPtr base_;
  std::shared_ptr<const ProductPrior> prior_;
  Discretization grid_;
  std::vector<std::vector<PooledCell>> blocks_;
  std::vector<std::vector<std::size_t>> cell_block_;
  std::vector<std::vector<bool>> single_atom_;
  CurveSet pooled_;
  AlgorithmTraits traits_;
};

std::shared_ptr<const MonotonizedAlgorithm> pava_monotonize(AlgorithmPtr alg,
                                                            std::shared_ptr<const ProductPrior> prior,
                                                            const CurveSet& raw);

/// gamma = 2 eps / delta.
double blatant_gamma(double epsilon, double delta) noexcept;

/// With probability 1 - gamma runs the wrapped algorithm; otherwise picks an
/// agent i uniformly and serves {i} with probability k*delta where v_i is in cell k.
class BlatantMonotonized final : public AllocationAlgorithm {
 public:
  BlatantMonotonized(AlgorithmPtr base, Discretization grid, double gamma);

  std::string name() const override;
  AlgorithmTraits traits() const override;
  ServiceOutcome run(const ValuationProfile& v, RandomStream& rng) const override;
  std::vector<Weighted<ServiceOutcome>> distribution(const ValuationProfile& v) const override;
  double gamma() const noexcept { return gamma_; }

 private:
  AlgorithmPtr base_;
  Discretization grid_;
  double gamma_;
};

/// Interim curves of the blatant construction given the wrapped curves:
/// (1 - gamma) x + gamma k delta / n as realized, or without the 1/n factor.
CurveSet blatant_interim_curve(const CurveSet& base, double gamma, bool per_agent_factor = true);

/// v x(v) - integral_t^v x, or 0 when v < t. NonMonotoneCurve on a non-monotone curve.
double truncated_interim_payment(const InterimCurve& curve, double v, double t);

/// Unbiased single-draw estimate of truncated_interim_payment: Y ~ U[t, v],
/// returns v x(v) - (v - t) x(Y). Nonnegative for monotone curves.
double sampled_payment(const InterimCurve& curve, double v, double t, RandomStream& rng);

/// Writes agent,cell,lower_edge,upper_edge,mass,value,provenance rows.
void write_curves_csv(std::ostream& out, const CurveSet& curves);

}  // namespace costrec
