#include "costrec/bic_reduction.hpp"

#include <cmath>

#include <fmt/format.h>

#include "costrec/error.hpp"
#include "costrec/format.hpp"

namespace costrec {

namespace {

bool reaches(double v, double t) { return !std::isinf(t) && meets_threshold(v, t); }

AgentSet truncated(const AgentSet& served, const ValuationProfile& v, double t) {
  AgentSet s(v.size());
  served.for_each([&](std::size_t i) {
    if (reaches(v[i], t)) s.insert(i);
  });
  return s;
}

ScheduleRow make_row(std::size_t j, double t, const AllocationAlgorithm& alg, const ProfileSource& source,
                     const CostFunction& cost, const CurveSet& curves, double eps0, unsigned jobs) {
  ScheduleRow row;
  row.j = j;
  row.threshold = t;
  const TruncatedStats stats = truncated_stats(alg, source, cost, t, jobs);
  row.cost = stats.cost;
  row.served = stats.served;
  row.revenue.mean = expected_revenue_at_threshold(curves, source.prior(), t);
  // A row that serves nobody in expectation is the unconditional fallback.
  row.slack = stats.served.mean > 0.0 ? eps0 : 0.0;
  row.pass = passes_stopping_test(row.revenue.mean, row.cost.mean, row.slack);
  return row;
}

ThresholdSchedule empty_schedule(std::string selector, const ProfileSource& source, double eps0) {
  ThresholdSchedule s;
  s.selector = std::move(selector);
  s.epsilon0 = eps0;
  s.mode = source.mode();
  s.cost_samples = source.mode() == Mode::Sampled ? source.size() : 0;
  s.seed = source.seed();
  return s;
}

}  // namespace

TruncatedStats truncated_stats(const AllocationAlgorithm& alg, const ProfileSource& source, const CostFunction& cost,
                               double t, unsigned jobs) {
  require(t >= 0.0, ErrorCode::InvalidArgument, "threshold must be >= 0");
  const auto m = expect(
      alg, source, 2,
      [&](const ValuationProfile& v, const ServiceOutcome& outcome, std::span<double> out) {
        const AgentSet s = truncated(outcome.served, v, t);
        out[0] = cost(s);
        out[1] = static_cast<double>(s.count());
      },
      jobs);
  return {m[0], m[1]};
}

Moment expected_cost_at_threshold(const AllocationAlgorithm& alg, const ProfileSource& source,
                                  const CostFunction& cost, double t, unsigned jobs) {
  return truncated_stats(alg, source, cost, t, jobs).cost;
}

double expected_revenue_at_threshold(const CurveSet& curves, const ProductPrior& prior, double t) {
  require(curves.size() == prior.agents(), ErrorCode::GridMismatch, "one curve per agent required");
  if (std::isinf(t)) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& curve = curves[i];
    require(curve.monotone(), ErrorCode::NonMonotoneCurve, fmt::format("curve of agent {} is not monotone", i));
    const auto& dist = prior[i];
    if (dist.is_discrete()) {
      for (const auto& a : dist.atoms()) total += a.probability * truncated_interim_payment(curve, a.value, t);
      continue;
    }
    // The truncated payment is constant on the part of each cell at or above t.
    const auto& grid = curve.grid();
    for (std::size_t k = 1; k <= grid.cells(); ++k) {
      const double hi = grid.upper_edge(k);
      if (!meets_threshold(hi, t)) continue;
      const double lo = std::max(grid.lower_edge(k), t);
      const double m = dist.mass({lo, hi}) + (k == grid.cells() ? 1.0 - dist.cdf(hi) : 0.0);
      if (m > 0.0) total += m * truncated_interim_payment(curve, hi, t);
    }
  }
  return total;
}

double round_up_to_grid(double x, double delta) {
  require(delta > 0.0, ErrorCode::InvalidArgument, "delta must be > 0");
  return (std::floor(x / delta + 1e-9) + 1.0) * delta;
}

bool passes_stopping_test(double revenue, double cost, double eps0) noexcept {
  return revenue >= cost + eps0 - 1e-12 * std::max(1.0, std::abs(cost));
}

ThresholdSchedule select_threshold_log_h(const AllocationAlgorithm& alg, const ProfileSource& source,
                                         const CostFunction& cost, const CurveSet& curves, double eps0,
                                         unsigned jobs) {
  const ProductPrior& prior = source.prior();
  ThresholdSchedule s = empty_schedule("log_h", source, eps0);
  const auto last = static_cast<std::size_t>(1 + std::floor(std::log2(prior.h()) + 1e-9));
  for (std::size_t j = 0; j <= last; ++j) {
    const double t = prior.v_min() * std::ldexp(1.0, static_cast<int>(j));
    s.rows.push_back(make_row(j, t, alg, source, cost, curves, j == last ? 0.0 : eps0, jobs));
    if (s.rows.back().pass) {
      s.chosen = j;
      return s;
    }
  }
  fail(ErrorCode::InvalidArgument, "powers-of-two schedule found no passing row");
}

ThresholdSchedule select_threshold_log_n(const AllocationAlgorithm& alg, const ProfileSource& source,
                                         const CostFunction& cost, const CurveSet& curves, double delta,
                                         double eps0, unsigned jobs) {
  require(delta > 0.0, ErrorCode::InvalidArgument, "delta must be > 0");
  const ProductPrior& prior = source.prior();
  ThresholdSchedule s = empty_schedule("log_n", source, eps0);
  const double limit = std::ceil(prior.v_max() / delta) + 3.0;
  double t = 0.0;
  for (std::size_t j = 0;; ++j) {
    require(static_cast<double>(j) <= limit, ErrorCode::InvalidArgument, "adaptive schedule did not terminate");
    s.rows.push_back(make_row(j, t, alg, source, cost, curves, eps0, jobs));
    const ScheduleRow& row = s.rows.back();
    if (row.pass) {
      s.chosen = j;
      return s;
    }
    // Rows with E|S| = 0 always pass, so the division is safe here.
    const double avg = row.cost.mean / row.served.mean;
    t = std::max(round_up_to_grid(avg, delta), round_up_to_grid(t, delta));
  }
}

ReducedMechanism::ReducedMechanism(AlgorithmPtr alg, CurveSet curves, double threshold, PaymentRule rule,
                                   std::string label)
    : alg_(std::move(alg)), curves_(std::move(curves)), threshold_(threshold), rule_(rule), label_(std::move(label)) {
  require(alg_ != nullptr, ErrorCode::InvalidArgument, "reduced mechanism needs an allocation");
  require(threshold >= 0.0, ErrorCode::InvalidArgument, "threshold must be >= 0");
  for (std::size_t i = 0; i < curves_.size(); ++i)
    require(curves_[i].monotone(), ErrorCode::NonMonotoneCurve, fmt::format("curve of agent {} is not monotone", i));
}

std::string ReducedMechanism::name() const {
  return fmt::format("{}[{}, T={}]", label_, alg_->name(), format_number(threshold_));
}

AgentSet ReducedMechanism::truncate(const ValuationProfile& v, const AgentSet& served) const {
  require(v.size() == curves_.size(), ErrorCode::InvalidArgument, "profile size does not match the curves");
  return truncated(served, v, threshold_);
}

double ReducedMechanism::price(std::size_t agent, double value) const {
  const InterimCurve& c = curves_.at(agent);
  const double x = c.at(value);
  require(x > 0.0, ErrorCode::ZeroInterimServed,
          fmt::format("agent {} served at value {:.12g} where the interim allocation is 0", agent, value));
  return truncated_interim_payment(c, value, threshold_) / x;
}

MechanismResult ReducedMechanism::run(const ValuationProfile& v, RandomStream& rng) const {
  MechanismResult r{truncate(v, alg_->run(v, rng).served), std::vector<double>(v.size(), 0.0)};
  r.served.for_each([&](std::size_t i) {
    if (rule_ == PaymentRule::ClosedForm) {
      r.payments[i] = price(i, v[i]);
      return;
    }
    const double x = curves_[i].at(v[i]);
    require(x > 0.0, ErrorCode::ZeroInterimServed,
            fmt::format("agent {} served at value {:.12g} where the interim allocation is 0", i, v[i]));
    r.payments[i] = sampled_payment(curves_[i], v[i], threshold_, rng) / x;
  });
  return r;
}

std::vector<Weighted<MechanismResult>> ReducedMechanism::distribution(const ValuationProfile& v) const {
  std::vector<Weighted<MechanismResult>> out;
  for (const auto& [outcome, q] : alg_->distribution(v)) {
    MechanismResult r{truncate(v, outcome.served), std::vector<double>(v.size(), 0.0)};
    r.served.for_each([&](std::size_t i) { r.payments[i] = price(i, v[i]); });
    out.push_back({std::move(r), q});
  }
  return out;
}

CombinedReduction reduce_combined(const AlgorithmPtr& alg, const ProfileSource& source, const CostFunction& cost,
                                  const CurveSet& curves, double delta, double eps0, PaymentRule rule,
                                  unsigned jobs) {
  CombinedReduction out;
  out.log_h = select_threshold_log_h(*alg, source, cost, curves, eps0, jobs);
  out.log_n = select_threshold_log_n(*alg, source, cost, curves, delta, eps0, jobs);
  auto mech_h = std::make_shared<const ReducedMechanism>(alg, curves, out.log_h.threshold(), rule, "log_h");
  auto mech_n = std::make_shared<const ReducedMechanism>(alg, curves, out.log_n.threshold(), rule, "log_n");
  out.social_cost_log_h = expected_social_cost(*mech_h, source, cost, jobs);
  out.social_cost_log_n = expected_social_cost(*mech_n, source, cost, jobs);
  if (out.social_cost_log_n.mean < out.social_cost_log_h.mean) {
    out.chosen = "log_n";
    out.mechanism = mech_n;
  } else {
    out.chosen = "log_h";
    out.mechanism = mech_h;
  }
  return out;
}

void write_schedule_csv(std::ostream& out, const std::vector<ThresholdSchedule>& schedules) {
  out << "selector,j,threshold,expected_cost,cost_se,expected_revenue,expected_served,slack,pass,chosen\n";
  for (const auto& s : schedules) {
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      const auto& row = s.rows[r];
      out << s.selector << ',' << row.j << ',' << format_number(row.threshold) << ','
          << format_number(row.cost.mean) << ',' << format_number(row.cost.standard_error) << ','
          << format_number(row.revenue.mean) << ',' << format_number(row.served.mean) << ','
          << format_number(row.slack) << ',' << (row.pass ? 1 : 0) << ',' << (r == s.chosen ? 1 : 0) << '\n';
    }
  }
}

}  // namespace costrec
