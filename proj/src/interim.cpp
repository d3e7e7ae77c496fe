#include "costrec/interim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "costrec/error.hpp"
#include "costrec/format.hpp"
#include "costrec/parallel.hpp"

namespace costrec {

namespace {

constexpr double kMonotoneSlack = 1e-12;

bool use_anonymous_shortcut(const AllocationAlgorithm& alg, const ProductPrior& prior) {
  return alg.traits().anonymous && prior.identical_marginals();
}

void require_cover(const ProductPrior& prior, const Discretization& grid) {
  const double top = grid.upper_edge(grid.cells());
  require(prior.v_max() <= top + edge_tolerance(top), ErrorCode::GridMismatch,
          fmt::format("grid ends at {:.12g} but the prior reaches {:.12g}", top, prior.v_max()));
}

std::vector<Weighted<ServiceOutcome>> merge(std::map<AgentSet, double>& acc) {
  std::vector<Weighted<ServiceOutcome>> out;
  out.reserve(acc.size());
  for (auto& [s, p] : acc) out.push_back({{s}, p});
  return out;
}

}  // namespace

Discretization::Discretization(double delta, double v_hi) : delta_(delta), v_hi_(v_hi) {
  require(std::isfinite(delta) && delta > 0.0, ErrorCode::InvalidArgument, "grid width delta must be > 0");
  require(std::isfinite(v_hi) && v_hi >= 0.0, ErrorCode::InvalidArgument, "grid upper end must be finite and >= 0");
  const double k = std::ceil(v_hi / delta - 1e-9);
  require(k < 1e8, ErrorCode::SupportTooLarge, "grid would have more than 1e8 cells");
  cells_ = std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

Interval Discretization::cell(std::size_t k) const {
  require(k <= cells_, ErrorCode::InvalidArgument, fmt::format("cell {} outside grid of {} cells", k, cells_));
  if (k == 0) return Interval::zero_cell();
  return {lower_edge(k), upper_edge(k)};
}

std::size_t Discretization::cell_of(double v) const noexcept {
  if (v <= edge_tolerance(0.0)) return 0;
  double k = std::ceil(v / delta_);
  if (k > static_cast<double>(cells_)) return cells_;
  if (k < 1.0) k = 1.0;
  auto cell = static_cast<std::size_t>(k);
  // Match Interval::contains at the upper edge of the previous cell.
  if (cell > 1 && v <= upper_edge(cell - 1) + edge_tolerance(upper_edge(cell - 1))) --cell;
  return cell;
}

std::string Provenance::describe() const {
  if (kind == Kind::Exact) return "exact";
  return fmt::format("estimated(eps={:.12g};N={};seed={})", epsilon, samples, seed);
}

InterimCurve::InterimCurve(Discretization grid, std::vector<double> values, std::vector<double> masses,
                           Provenance provenance)
    : grid_(grid), values_(std::move(values)), masses_(std::move(masses)), provenance_(provenance) {
  require(values_.size() == grid_.size() && masses_.size() == grid_.size(), ErrorCode::GridMismatch,
          fmt::format("curve needs {} cells", grid_.size()));
  std::size_t first_present = values_.size();
  for (std::size_t k = 0; k < values_.size(); ++k) {
    require(std::isfinite(values_[k]) && values_[k] >= -1e-12 && values_[k] <= 1.0 + 1e-12,
            ErrorCode::InvalidArgument, fmt::format("curve entry {} = {:.12g} outside [0,1]", k, values_[k]));
    values_[k] = std::clamp(values_[k], 0.0, 1.0);
    require(masses_[k] >= 0.0, ErrorCode::InvalidArgument, "cell masses must be >= 0");
    if (masses_[k] > 0.0 && first_present == values_.size()) first_present = k;
  }
  if (first_present < values_.size()) {
    for (std::size_t k = 0; k < first_present; ++k) values_[k] = values_[first_present];
    for (std::size_t k = first_present + 1; k < values_.size(); ++k)
      if (masses_[k] <= 0.0) values_[k] = values_[k - 1];
  }
  monotone_ = true;
  for (std::size_t k = 1; k < values_.size(); ++k)
    if (values_[k] < values_[k - 1] - kMonotoneSlack) monotone_ = false;
}

double InterimCurve::integral(double a, double b) const noexcept {
  a = std::max(a, 0.0);
  if (!(b > a)) return 0.0;
  const double delta = grid_.delta();
  const std::size_t K = grid_.cells();
  double total = 0.0;
  const auto first = std::min<std::size_t>(K, static_cast<std::size_t>(std::floor(a / delta)) + 1);
  const auto last = std::min<std::size_t>(K, static_cast<std::size_t>(std::ceil(b / delta)));
  for (std::size_t k = first; k <= last; ++k) {
    const double overlap = std::min(b, grid_.upper_edge(k)) - std::max(a, grid_.lower_edge(k));
    if (overlap > 0.0) total += overlap * values_[k];
  }
  const double top = grid_.upper_edge(K);
  if (b > top) total += (b - std::max(a, top)) * values_[K];
  return total;
}

std::vector<double> cell_masses(const ValueDistribution& dist, const Discretization& grid) {
  std::vector<double> m(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) m[k] = dist.mass(grid.cell(k));
  return m;
}

CurveSet exact_interim_curve(const AllocationAlgorithm& alg, const ProductPrior& prior, const Discretization& grid,
                             std::size_t cap, unsigned jobs) {
  require(prior.is_discrete(), ErrorCode::NotDiscrete, "exact interim curves need a discrete prior");
  require(prior.support_size() <= cap, ErrorCode::SupportTooLarge,
          fmt::format("product support {} exceeds cap {}", prior.support_size(), cap));
  require_cover(prior, grid);
  const std::size_t n = prior.agents();
  const std::size_t computed = use_anonymous_shortcut(alg, prior) ? 1 : n;
  const std::size_t cells = grid.size();
  std::vector<double> values(computed * cells, 0.0);
  parallel_for(computed * cells, jobs, [&](std::size_t task) {
    const std::size_t i = task / cells, k = task % cells;
    const Interval cell = grid.cell(k);
    if (prior[i].mass(cell) <= 0.0) return;
    double x = 0.0;
    for (const auto& atom : prior[i].conditional_atoms(cell))
      x += atom.probability * exact_service_probability(alg, prior, i, atom.value, cap);
    values[task] = x;
  });
  CurveSet out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = computed == 1 ? 0 : i;
    std::vector<double> v(values.begin() + static_cast<std::ptrdiff_t>(src * cells),
                          values.begin() + static_cast<std::ptrdiff_t>((src + 1) * cells));
    out.emplace_back(grid, std::move(v), cell_masses(prior[i], grid), Provenance{});
  }
  return out;
}

std::size_t sample_count(double epsilon, std::size_t agents, double delta) {
  require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::InvalidArgument, "epsilon must lie in (0,1)");
  require(delta > 0.0, ErrorCode::InvalidArgument, "delta must be > 0");
  require(agents >= 1, ErrorCode::InvalidArgument, "need at least one agent");
  const double log_term = std::log(2.0 * static_cast<double>(agents) / (epsilon * delta));
  const double n = std::ceil(std::max(0.0, log_term) / (2.0 * epsilon * epsilon));
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

SamplingConfig SamplingConfig::for_accuracy(double epsilon, std::size_t agents, double delta, std::uint64_t seed) {
  return {epsilon, sample_count(epsilon, agents, delta), seed};
}

CurveSet estimate_raw_interim_curve(const AllocationAlgorithm& alg, const ProductPrior& prior,
                                    const Discretization& grid, const SamplingConfig& sampling, unsigned jobs) {
  require(sampling.samples >= 1, ErrorCode::InvalidArgument, "sampling needs N >= 1");
  require(sampling.epsilon > 0.0 && sampling.epsilon < 1.0, ErrorCode::InvalidArgument,
          "epsilon must lie in (0,1)");
  require_cover(prior, grid);
  const std::size_t n = prior.agents();
  const std::size_t computed = use_anonymous_shortcut(alg, prior) ? 1 : n;
  const std::size_t cells = grid.size();
  std::vector<std::vector<double>> masses(n);
  for (std::size_t i = 0; i < n; ++i) masses[i] = cell_masses(prior[i], grid);

  std::vector<double> values(computed * cells, 0.0);
  parallel_for(computed * cells, jobs, [&](std::size_t task) {
    const std::size_t i = task / cells, k = task % cells;
    if (masses[i][k] <= 0.0) return;
    const Interval cell = grid.cell(k);
    std::vector<double> v(n);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < sampling.samples; ++r) {
      RandomStream rng(sampling.seed, Purpose::Estimation, static_cast<std::uint32_t>(i),
                       static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(r));
      for (std::size_t j = 0; j < n; ++j) v[j] = j == i ? prior[j].conditional_sample(cell, rng) : prior[j].sample(rng);
      if (alg.run(ValuationProfile(v), rng).served.contains(i)) ++hits;
    }
    values[task] = static_cast<double>(hits) / static_cast<double>(sampling.samples);
  });
  const Provenance prov{Provenance::Kind::Estimated, sampling.epsilon, sampling.samples, sampling.seed};
  CurveSet out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = computed == 1 ? 0 : i;
    std::vector<double> v(values.begin() + static_cast<std::ptrdiff_t>(src * cells),
                          values.begin() + static_cast<std::ptrdiff_t>((src + 1) * cells));
    out.emplace_back(grid, std::move(v), masses[i], prov);
  }
  return out;
}

CurveSet running_max(const CurveSet& curves) {
  CurveSet out;
  out.reserve(curves.size());
  for (const auto& c : curves) {
    std::vector<double> v = c.values();
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = std::max(v[k], v[k - 1]);
    out.emplace_back(c.grid(), std::move(v), c.masses(), c.provenance());
  }
  return out;
}

CurveSet estimate_interim_curve(const AllocationAlgorithm& alg, const ProductPrior& prior, const Discretization& grid,
                                const SamplingConfig& sampling, unsigned jobs) {
  return running_max(estimate_raw_interim_curve(alg, prior, grid, sampling, jobs));
}

double max_abs_difference(const CurveSet& a, const CurveSet& b) {
  require(a.size() == b.size(), ErrorCode::GridMismatch, "curve sets have different agent counts");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i].grid() == b[i].grid(), ErrorCode::GridMismatch, fmt::format("agent {} curves use different grids", i));
    for (std::size_t k = 0; k < a[i].values().size(); ++k)
      worst = std::max(worst, std::abs(a[i].value(k) - b[i].value(k)));
  }
  return worst;
}

bool eps_close(const CurveSet& a, const CurveSet& b, double eps) { return max_abs_difference(a, b) < eps; }

std::vector<PooledCell> pool_adjacent_violators(const InterimCurve& raw) {
  std::vector<PooledCell> stack;
  for (std::size_t k = 0; k < raw.values().size(); ++k) {
    if (!raw.present(k)) continue;
    stack.push_back({k, k, raw.value(k), raw.mass(k)});
    while (stack.size() >= 2 && stack[stack.size() - 2].value > stack.back().value + kMonotoneSlack) {
      PooledCell top = stack.back();
      stack.pop_back();
      PooledCell& prev = stack.back();
      const double m = prev.mass + top.mass;
      prev.value = (prev.value * prev.mass + top.value * top.mass) / m;
      prev.mass = m;
      prev.last = top.last;
    }
  }
  return stack;
}

MonotonizedAlgorithm::MonotonizedAlgorithm(AlgorithmPtr base, std::shared_ptr<const ProductPrior> prior,
                                           const CurveSet& raw)
    : base_(std::move(base)), prior_(std::move(prior)), grid_(raw.empty() ? Discretization(1, 1) : raw[0].grid()) {
  require(base_ != nullptr && prior_ != nullptr, ErrorCode::InvalidArgument, "monotonization needs a base and prior");
  const std::size_t n = prior_->agents();
  require(raw.size() == n, ErrorCode::GridMismatch, "one raw curve per agent required");
  bool all_single = true;
  for (std::size_t i = 0; i < n; ++i) {
    require(raw[i].grid() == grid_, ErrorCode::GridMismatch, "raw curves must share one grid");
    auto blocks = pool_adjacent_violators(raw[i]);
    std::vector<std::size_t> map(grid_.size(), 0);
    std::vector<double> pooled(grid_.size(), 0.0);
    std::vector<bool> single(blocks.size(), false);
    std::size_t b = 0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      while (b + 1 < blocks.size() && k >= blocks[b + 1].first) ++b;
      map[k] = b;
      pooled[k] = blocks.empty() ? 0.0 : blocks[b].value;
    }
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      const auto& dist = (*prior_)[i];
      single[j] = dist.is_discrete() && dist.conditional_atoms(block_interval(blocks[j])).size() == 1;
      all_single = all_single && single[j];
    }
    pooled_.emplace_back(grid_, std::move(pooled), raw[i].masses(), raw[i].provenance());
    blocks_.push_back(std::move(blocks));
    cell_block_.push_back(std::move(map));
    single_atom_.push_back(std::move(single));
  }
  const AlgorithmTraits bt = base_->traits();
  bool same_partition = prior_->identical_marginals();
  for (std::size_t i = 1; i < n && same_partition; ++i) {
    same_partition = blocks_[i].size() == blocks_[0].size();
    for (std::size_t j = 0; same_partition && j < blocks_[i].size(); ++j)
      same_partition = blocks_[i][j].first == blocks_[0][j].first && blocks_[i][j].last == blocks_[0][j].last;
  }
  traits_.deterministic = bt.deterministic && all_single;
  traits_.truthful = bt.truthful && all_single;
  traits_.no_bossy = bt.no_bossy && all_single;
  traits_.anonymous = bt.anonymous && same_partition;
}

std::string MonotonizedAlgorithm::name() const { return "monotonized(" + base_->name() + ")"; }

bool MonotonizedAlgorithm::identity_partition() const noexcept {
  for (const auto& blocks : blocks_)
    for (const auto& b : blocks)
      if (b.first != b.last) return false;
  return true;
}

Interval MonotonizedAlgorithm::block_interval(const PooledCell& b) const {
  if (b.first == 0) return {-std::numeric_limits<double>::infinity(), grid_.upper_edge(b.last)};
  return {grid_.lower_edge(b.first), grid_.upper_edge(b.last)};
}

const PooledCell& MonotonizedAlgorithm::block_of(std::size_t agent, double value) const {
  return blocks_[agent][cell_block_[agent][grid_.cell_of(value)]];
}

ServiceOutcome MonotonizedAlgorithm::run(const ValuationProfile& v, RandomStream& rng) const {
  require(v.size() == blocks_.size(), ErrorCode::InvalidArgument, "profile size does not match the prior");
  std::vector<double> resampled(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t b = cell_block_[i][grid_.cell_of(v[i])];
    resampled[i] = single_atom_[i][b] ? v[i] : (*prior_)[i].conditional_sample(block_interval(blocks_[i][b]), rng);
  }
  return base_->run(ValuationProfile(std::move(resampled)), rng);
}

std::vector<Weighted<ServiceOutcome>> MonotonizedAlgorithm::distribution(const ValuationProfile& v) const {
  require(v.size() == blocks_.size(), ErrorCode::InvalidArgument, "profile size does not match the prior");
  const std::size_t n = v.size();
  std::vector<std::vector<Atom>> options(n);
  std::size_t combos = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = cell_block_[i][grid_.cell_of(v[i])];
    if (single_atom_[i][b])
      options[i] = {{v[i], 1.0}};
    else
      options[i] = (*prior_)[i].conditional_atoms(block_interval(blocks_[i][b]));
    combos *= options[i].size();
    require(combos <= kDefaultSupportCap, ErrorCode::SupportTooLarge, "resampling support too large to enumerate");
  }
  std::map<AgentSet, double> acc;
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> values(n);
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = options[i][idx[i]].value;
      w *= options[i][idx[i]].probability;
    }
    if (w > 0.0)
      for (const auto& [outcome, q] : base_->distribution(ValuationProfile(values))) acc[outcome.served] += w * q;
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == options[pos].size()) idx[pos++] = 0;
    if (pos == n) break;
  }
  return merge(acc);
}

std::shared_ptr<const MonotonizedAlgorithm> pava_monotonize(AlgorithmPtr alg,
                                                            std::shared_ptr<const ProductPrior> prior,
                                                            const CurveSet& raw) {
  return std::make_shared<const MonotonizedAlgorithm>(std::move(alg), std::move(prior), raw);
}

double blatant_gamma(double epsilon, double delta) noexcept { return 2.0 * epsilon / delta; }

BlatantMonotonized::BlatantMonotonized(AlgorithmPtr base, Discretization grid, double gamma)
    : base_(std::move(base)), grid_(grid), gamma_(gamma) {
  require(base_ != nullptr, ErrorCode::InvalidArgument, "blatant monotonization needs a base algorithm");
  require(std::isfinite(gamma) && gamma >= 0.0 && gamma <= 1.0, ErrorCode::GammaOutOfRange,
          fmt::format("gamma = {:.12g} must lie in [0,1]", gamma));
  const double top = grid_.upper_edge(grid_.cells());
  require(top <= 1.0 + edge_tolerance(1.0), ErrorCode::InvalidArgument,
          fmt::format("serving with probability k*delta needs K*delta <= 1, grid ends at {:.12g}", top));
}

std::string BlatantMonotonized::name() const { return fmt::format("blatant({},gamma={:.12g})", base_->name(), gamma_); }

AlgorithmTraits BlatantMonotonized::traits() const {
  const AlgorithmTraits bt = base_->traits();
  AlgorithmTraits t;
  t.deterministic = gamma_ == 0.0 && bt.deterministic;
  t.anonymous = bt.anonymous;
  return t;
}

ServiceOutcome BlatantMonotonized::run(const ValuationProfile& v, RandomStream& rng) const {
  if (gamma_ == 0.0 || rng.uniform() >= gamma_) return base_->run(v, rng);
  AgentSet s(v.size());
  if (v.size() == 0) return {s};
  const std::size_t i = rng.below(v.size());
  const double p = std::min(1.0, static_cast<double>(grid_.cell_of(v[i])) * grid_.delta());
  if (rng.bernoulli(p)) s.insert(i);
  return {s};
}

std::vector<Weighted<ServiceOutcome>> BlatantMonotonized::distribution(const ValuationProfile& v) const {
  std::map<AgentSet, double> acc;
  if (gamma_ < 1.0)
    for (const auto& [outcome, q] : base_->distribution(v)) acc[outcome.served] += (1.0 - gamma_) * q;
  const std::size_t n = v.size();
  if (gamma_ > 0.0 && n > 0) {
    const double pick = gamma_ / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::min(1.0, static_cast<double>(grid_.cell_of(v[i])) * grid_.delta());
      if (p > 0.0) acc[AgentSet(n, {i})] += pick * p;
      if (p < 1.0) acc[AgentSet(n)] += pick * (1.0 - p);
    }
  }
  return merge(acc);
}

CurveSet blatant_interim_curve(const CurveSet& base, double gamma, bool per_agent_factor) {
  require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::GammaOutOfRange, "gamma must lie in [0,1]");
  const double scale = per_agent_factor && !base.empty() ? 1.0 / static_cast<double>(base.size()) : 1.0;
  CurveSet out;
  out.reserve(base.size());
  for (const auto& c : base) {
    std::vector<double> v(c.values().size());
    for (std::size_t k = 0; k < v.size(); ++k)
      v[k] = std::min(1.0, (1.0 - gamma) * c.value(k) + gamma * scale * static_cast<double>(k) * c.grid().delta());
    out.emplace_back(c.grid(), std::move(v), c.masses(), c.provenance());
  }
  return out;
}

double truncated_interim_payment(const InterimCurve& curve, double v, double t) {
  require(curve.monotone(), ErrorCode::NonMonotoneCurve, "payments need a nondecreasing interim curve");
  if (!meets_threshold(v, t)) return 0.0;
  const double lo = std::min(t, v);
  return std::max(0.0, v * curve.at(v) - curve.integral(lo, v));
}

double sampled_payment(const InterimCurve& curve, double v, double t, RandomStream& rng) {
  require(curve.monotone(), ErrorCode::NonMonotoneCurve, "payments need a nondecreasing interim curve");
  if (!meets_threshold(v, t)) return 0.0;
  const double lo = std::min(std::max(t, 0.0), v);
  const double y = rng.uniform(lo, v);
  return v * curve.at(v) - (v - lo) * curve.at(y);
}

void write_curves_csv(std::ostream& out, const CurveSet& curves) {
  out << "agent,cell,lower_edge,upper_edge,mass,value,provenance\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const std::string prov = c.provenance().describe();
    for (std::size_t k = 0; k < c.values().size(); ++k) {
      out << i << ',' << k << ',' << format_number(c.grid().lower_edge(k)) << ','
          << format_number(c.grid().upper_edge(k)) << ',' << format_number(c.mass(k)) << ','
          << format_number(c.value(k)) << ',' << prov << '\n';
    }
  }
}

}  // namespace costrec
