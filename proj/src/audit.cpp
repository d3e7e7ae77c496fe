#include "costrec/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>
#include "json.hpp"

#include "costrec/error.hpp"
#include "costrec/format.hpp"

namespace costrec {

namespace {

std::string profile_string(const ValuationProfile& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s + ")";
}

void record(AuditReport& r, double amount, const std::string& what) {
  ++r.violations;
  r.pass = false;
  if (r.violations == 1 || amount > r.worst) {
    r.worst = amount;
    r.worst_violation = what;
  }
}

nlohmann::ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

}  // namespace

AuditReport& AuditReport::measure(std::string key, double value) {
  measured.emplace_back(std::move(key), value);
  return *this;
}

AuditReport& AuditReport::tolerance(std::string key, double value) {
  tolerances.emplace_back(std::move(key), value);
  return *this;
}

AuditReport& AuditReport::note(std::string key, std::string value) {
  notes.emplace_back(std::move(key), std::move(value));
  return *this;
}

double AuditReport::get(const std::string& key) const {
  for (const auto& [k, v] : measured)
    if (k == key) return v;
  fail(ErrorCode::InvalidArgument, "report " + name + " has no measurement " + key);
}

bool all_pass(const std::vector<AuditReport>& reports) noexcept {
  return std::all_of(reports.begin(), reports.end(), [](const AuditReport& r) { return r.pass || r.informational; });
}

std::string reports_json(const std::vector<AuditReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["pass"] = r.pass;
    j["informational"] = r.informational;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.measured) m[k] = number(v);
    j["measured"] = m;
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.tolerances) t[k] = number(v);
    j["tolerances"] = t;
    nlohmann::ordered_json n = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.notes) n[k] = v;
    j["notes"] = n;
    if (r.seed) j["seed"] = *r.seed;
    j["samples"] = r.samples;
    j["violations"] = r.violations;
    j["worst"] = number(r.worst);
    j["worst_violation"] = r.worst_violation;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void write_reports_csv(std::ostream& out, const std::vector<AuditReport>& reports) {
  out << "name,pass,informational,violations,worst,samples,seed,worst_violation\n";
  for (const auto& r : reports) {
    out << csv_field(r.name) << ',' << (r.pass ? 1 : 0) << ',' << (r.informational ? 1 : 0) << ',' << r.violations
        << ',' << format_number(r.worst) << ',' << r.samples << ',' << (r.seed ? std::to_string(*r.seed) : "") << ','
        << csv_field(r.worst_violation) << '\n';
  }
}

AuditReport check_interim_monotone(const CurveSet& curves) {
  AuditReport r;
  r.name = "interim_monotone";
  r.tolerance("dip", 1e-12);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& v = curves[i].values();
    for (std::size_t k = 1; k < v.size(); ++k) {
      const double dip = v[k - 1] - v[k];
      if (dip > 1e-12) record(r, dip, fmt::format("agent {} cell {}: {} -> {}", i, k, format_number(v[k - 1]),
                                                 format_number(v[k])));
    }
  }
  r.measure("agents", static_cast<double>(curves.size()));
  return r;
}

InterimOutcome exact_interim_outcome(const Mechanism& mech, const ProductPrior& prior, std::size_t agent,
                                     double report, std::size_t cap) {
  InterimOutcome o;
  for (const auto& [v, w] : enumerate_others(prior, agent, report, cap)) {
    for (const auto& [res, q] : mech.distribution(v)) {
      if (res.served.contains(agent)) o.allocation += w * q;
      o.payment += w * q * res.payments[agent];
    }
  }
  return o;
}

AuditReport check_bic_on_grid(const Mechanism& mech, const ProductPrior& prior, double tol, std::size_t cap) {
  require(prior.is_discrete(), ErrorCode::NotDiscrete, "grid BIC audit needs a discrete prior");
  AuditReport r;
  r.name = "bic_grid";
  r.note("mechanism", mech.name());
  r.tolerance("gain", tol);
  double min_utility = std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < prior.agents(); ++i) {
    std::vector<double> values;
    std::vector<InterimOutcome> interim;
    for (const auto& a : prior[i].atoms()) {
      if (a.probability <= 0.0) continue;
      values.push_back(a.value);
      interim.push_back(exact_interim_outcome(mech, prior, i, a.value, cap));
    }
    for (std::size_t t = 0; t < values.size(); ++t) {
      const double truthful = values[t] * interim[t].allocation - interim[t].payment;
      min_utility = std::min(min_utility, truthful);
      for (std::size_t d = 0; d < values.size(); ++d) {
        if (d == t) continue;
        ++pairs;
        const double gain = values[t] * interim[d].allocation - interim[d].payment - truthful;
        if (gain > tol)
          record(r, gain, fmt::format("agent {} value {} gains {} by reporting {}", i, format_number(values[t]),
                                      format_number(gain), format_number(values[d])));
      }
    }
  }
  r.measure("pairs", static_cast<double>(pairs));
  r.measure("min_interim_utility", std::isinf(min_utility) ? 0.0 : min_utility);
  return r;
}

AuditReport check_expost_truthful(const Mechanism& mech, const ValueGrid& grid, double tol, std::size_t cap) {
  AuditReport r;
  r.name = "expost_truthful";
  r.note("mechanism", mech.name());
  r.tolerance("gain", tol);
  // Per profile and agent: (allocation, expected payment).
  std::map<std::vector<double>, std::vector<std::pair<double, double>>> table;
  for_each_profile(grid, cap, [&](const ValuationProfile& v) {
    std::vector<std::pair<double, double>> row(v.size(), {0.0, 0.0});
    for (const auto& [res, q] : mech.distribution(v)) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (res.served.contains(i)) row[i].first += q;
        row[i].second += q * res.payments[i];
      }
    }
    table.emplace(std::vector<double>(v.values().begin(), v.values().end()), std::move(row));
  });
  std::size_t checks = 0;
  for (const auto& [values, row] : table) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double truthful = values[i] * row[i].first - row[i].second;
      for (double other : grid[i]) {
        if (other == values[i]) continue;
        std::vector<double> w = values;
        w[i] = other;
        const auto& dev = table.at(w)[i];
        ++checks;
        const double gain = values[i] * dev.first - dev.second - truthful;
        if (gain > tol)
          record(r, gain, fmt::format("agent {} at {} gains {} by reporting {}", i,
                                      profile_string(ValuationProfile(values)), format_number(gain),
                                      format_number(other)));
      }
    }
  }
  r.measure("profiles", static_cast<double>(table.size()));
  r.measure("deviations", static_cast<double>(checks));
  return r;
}

AuditReport check_cost_recovery(const Mechanism& mech, const ProfileSource& source, const CostFunction& cost,
                                double tol, unsigned jobs) {
  AuditReport r;
  r.name = "cost_recovery";
  r.note("mechanism", mech.name());
  r.note("mode", std::string(to_string(source.mode())));
  const auto m = expect(
      mech, source, 4,
      [&](const ValuationProfile&, const MechanismResult& res, std::span<double> out) {
        const double rev = res.revenue(), c = cost(res.served);
        out[0] = rev;
        out[1] = c;
        out[2] = rev - c;
        out[3] = rev >= c - 1e-12 * std::max(1.0, c) ? 1.0 : 0.0;
      },
      jobs);
  r.measure("expected_revenue", m[0].mean);
  r.measure("expected_cost", m[1].mean);
  r.measure("surplus", m[2].mean);
  r.measure("surplus_se", m[2].standard_error);
  r.measure("profile_recovery_rate", m[3].mean);
  if (source.mode() == Mode::Exact) {
    r.tolerance("absolute", tol);
    r.pass = m[0].mean >= m[1].mean - tol;
  } else {
    r.seed = source.seed();
    r.samples = source.size();
    r.tolerance("standard_errors", 3.0);
    r.pass = m[2].mean + 3.0 * m[2].standard_error >= 0.0;
  }
  if (!r.pass) {
    r.violations = 1;
    r.worst = m[1].mean - m[0].mean;
    r.worst_violation = fmt::format("revenue {} below cost {}", format_number(m[0].mean), format_number(m[1].mean));
  }
  return r;
}

AuditReport check_profile_cost_recovery(const Mechanism& mech, const ValueGrid& grid, const CostFunction& cost,
                                        std::size_t cap) {
  AuditReport r;
  r.name = "profile_cost_recovery";
  r.note("mechanism", mech.name());
  r.tolerance("absolute", 0.0);
  std::size_t profiles = 0;
  for_each_profile(grid, cap, [&](const ValuationProfile& v) {
    ++profiles;
    for (const auto& [res, q] : mech.distribution(v)) {
      if (q <= 0.0) continue;
      const double rev = res.revenue(), c = cost(res.served);
      if (rev < c)
        record(r, c - rev, fmt::format("profile {} serves {} for revenue {} at cost {}", profile_string(v),
                                       res.served.to_string(), format_number(rev), format_number(c)));
    }
  });
  r.measure("profiles", static_cast<double>(profiles));
  return r;
}

SocialCostRatio social_cost_ratio(const Mechanism& mech, const AllocationAlgorithm& base, const ProfileSource& source,
                                  const CostFunction& cost, unsigned jobs) {
  SocialCostRatio out;
  out.mechanism = expected_social_cost(mech, source, cost, jobs);
  out.base = expected_social_cost(base, source, cost, jobs);
  if (out.base.mean > 0.0)
    out.ratio = out.mechanism.mean / out.base.mean;
  else
    out.ratio = out.mechanism.mean > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return out;
}

double log_h_constant(double h) noexcept { return 3.0 + 2.0 * (1.0 + std::floor(std::log2(h) + 1e-9)); }

double harmonic_number(std::size_t r) noexcept {
  double s = 0.0;
  for (std::size_t i = r; i >= 1; --i) s += 1.0 / static_cast<double>(i);
  return s;
}

AuditReport check_log_h_approximation(const Mechanism& mech, const AllocationAlgorithm& base,
                                      const ProfileSource& source, const CostFunction& cost, double tol,
                                      unsigned jobs) {
  const SocialCostRatio sc = social_cost_ratio(mech, base, source, cost, jobs);
  const double c = log_h_constant(source.prior().h());
  AuditReport r;
  r.name = "approximation_log_h";
  r.note("mechanism", mech.name());
  r.note("base", base.name());
  r.measure("sc_mechanism", sc.mechanism.mean);
  r.measure("sc_base", sc.base.mean);
  r.measure("ratio", sc.ratio);
  r.measure("constant", c);
  r.tolerance("absolute", tol);
  if (source.mode() == Mode::Sampled) {
    r.seed = source.seed();
    r.samples = source.size();
  }
  if (sc.mechanism.mean > c * sc.base.mean + tol)
    record(r, sc.mechanism.mean - c * sc.base.mean,
           fmt::format("SC {} exceeds {} x {}", format_number(sc.mechanism.mean), format_number(c),
                       format_number(sc.base.mean)));
  return r;
}

AuditReport check_log_n_approximation(const AllocationAlgorithm& alg, const ProfileSource& source,
                                      const CostFunction& cost, double threshold, double delta, double tol,
                                      unsigned jobs) {
  const auto m = expect(
      alg, source, 2,
      [&](const ValuationProfile& v, const ServiceOutcome& o, std::span<double> out) {
        out[0] = cost(o.served);
        o.served.for_each([&](std::size_t i) {
          if (std::isinf(threshold) || !meets_threshold(v[i], threshold)) out[1] += v[i];
        });
      },
      jobs);
  const std::size_t n = source.prior().agents();
  const double bound = (1.0 + 2.0 * harmonic_number(n)) * m[0].mean + static_cast<double>(n) * delta;
  AuditReport r;
  r.name = "approximation_log_n";
  r.note("allocation", alg.name());
  r.measure("threshold", threshold);
  r.measure("excluded_value", m[1].mean);
  r.measure("base_cost", m[0].mean);
  r.measure("bound", bound);
  r.tolerance("absolute", tol);
  if (m[1].mean > bound + tol)
    record(r, m[1].mean - bound,
           fmt::format("excluded value {} exceeds bound {}", format_number(m[1].mean), format_number(bound)));
  return r;
}

HarmonicResult harmonic_inequality(const std::vector<double>& a) {
  require(!a.empty(), ErrorCode::InvalidArgument, "harmonic inequality needs at least one entry");
  double floors = 0.0;
  for (double x : a) {
    require(std::isfinite(x) && x >= 1.0, ErrorCode::EntryBelowOne, fmt::format("entry {:.12g} is below 1", x));
    floors += std::floor(x);
  }
  HarmonicResult h;
  double suffix = 0.0;
  for (std::size_t j = a.size(); j-- > 0;) {
    suffix += a[j];
    h.lhs += a[j] / suffix;
  }
  h.bound = 2.0 * harmonic_number(static_cast<std::size_t>(floors));
  h.pass = h.lhs <= h.bound + 1e-12;
  return h;
}

AuditReport harmonic_sweep(std::size_t vectors, std::size_t max_len, double lo, double hi, std::uint64_t seed) {
  AuditReport r;
  r.name = "harmonic_inequality";
  r.seed = seed;
  r.samples = vectors;
  double tightest = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < vectors; ++s) {
    RandomStream rng(seed, Purpose::Audit, static_cast<std::uint32_t>(s), 0, static_cast<std::uint32_t>(s >> 32));
    std::vector<double> a(1 + rng.below(max_len));
    for (auto& x : a) x = rng.uniform(lo, hi);
    const HarmonicResult h = harmonic_inequality(a);
    tightest = std::min(tightest, h.bound - h.lhs);
    if (!h.pass) record(r, h.lhs - h.bound, fmt::format("vector {} lhs {} bound {}", s, h.lhs, h.bound));
  }
  r.measure("vectors", static_cast<double>(vectors));
  r.measure("min_margin", tightest);
  return r;
}

LowerBoundResult lower_bound_experiment(const LowerBoundConfig& config) {
  require(config.h > 1.0, ErrorCode::InvalidArgument, "lower-bound experiment needs h > 1");
  require(config.agents >= 1, ErrorCode::InvalidArgument, "lower-bound experiment needs n >= 1");
  require(config.samples >= 2, ErrorCode::InvalidArgument, "lower-bound experiment needs at least 2 samples");
  const double n = static_cast<double>(config.agents);
  const double scale = 1.0 / (4.0 * n);
  auto prior = std::make_shared<const ProductPrior>(
      ProductPrior::iid(ValueDistribution::equal_revenue(config.h, scale), config.agents));
  const CostFunction cost = CostFunction::public_excludable(1.0);
  auto base = std::make_shared<const ServeAll>();

  BayesianSetup setup;
  setup.prior = prior;
  setup.base = base;
  setup.cost = cost;
  setup.mode = Mode::Sampled;
  setup.delta = config.delta > 0.0 ? config.delta : prior->v_min();
  setup.epsilon = config.epsilon;
  setup.epsilon0 = config.epsilon0;
  setup.seed = config.seed;
  setup.jobs = config.jobs;

  LowerBoundResult out;
  out.reduction = reduce_bayesian(setup, config.selector);
  const ReducedMechanism& mech = *out.reduction.mechanism;

  const ProfileSource eval = ProfileSource::sampled(prior, config.samples, config.seed, Purpose::Evaluation);
  const AgentSet everyone = AgentSet::all(config.agents);
  const auto m = expect(
      mech, eval, 4,
      [&](const ValuationProfile& v, const MechanismResult& res, std::span<double> o) {
        o[0] = v.total();
        o[1] = social_cost(res.served, v, cost);
        o[2] = res.served.empty() ? 0.0 : 1.0;
        o[3] = social_cost(everyone, v, cost);
      },
      config.jobs);

  const double ln_h = std::log(config.h);
  const double target = ln_h / 4.0;
  const double var_theory = (config.h - 1.0 - ln_h * ln_h) / (16.0 * n);
  const double var_sample = m[0].standard_error * m[0].standard_error * static_cast<double>(config.samples);
  auto stamp = [&](AuditReport& r, std::string name) {
    r.name = std::move(name);
    r.seed = config.seed;
    r.samples = config.samples;
    r.note("log_base", "natural");
    r.measure("h", config.h).measure("n", n);
  };

  stamp(out.calibration, "lower_bound_calibration");
  out.calibration.measure("mean_total_value", m[0].mean)
      .measure("expected_total_value", target)
      .measure("variance_total_value", var_sample)
      .measure("expected_variance", var_theory)
      .tolerance("relative", 0.05);
  if (std::abs(m[0].mean - target) > 0.05 * target)
    record(out.calibration, std::abs(m[0].mean - target),
           fmt::format("E[V] = {} vs ln(h)/4 = {}", format_number(m[0].mean), format_number(target)));

  const double floor_value = (ln_h - 2.0 * std::sqrt(config.h / n)) / 8.0;
  stamp(out.floor, "lower_bound_floor");
  out.floor.note("mechanism", mech.name());
  out.floor.note("chosen", out.reduction.chosen);
  out.floor.measure("sc_mechanism", m[1].mean)
      .measure("sc_mechanism_se", m[1].standard_error)
      .measure("floor", floor_value)
      .measure("threshold", mech.threshold())
      .measure("epsilon0", out.reduction.build.epsilon0);
  if (m[1].mean < floor_value)
    record(out.floor, floor_value - m[1].mean,
           fmt::format("SC {} below floor {}", format_number(m[1].mean), format_number(floor_value)));

  stamp(out.nonempty, "lower_bound_nonempty");
  out.nonempty.informational = true;
  out.nonempty.measure("pr_nonempty", m[2].mean).measure("bound", 0.25);
  out.nonempty.pass = m[2].mean <= 0.25 + 3.0 * m[2].standard_error;

  stamp(out.baseline, "lower_bound_baseline");
  out.baseline.note("base", base->name());
  out.baseline.measure("sc_baseline", m[3].mean).tolerance("absolute", 0.0);
  if (m[3].mean != 1.0) record(out.baseline, std::abs(m[3].mean - 1.0), "serve-all social cost differs from 1");
  return out;
}

}  // namespace costrec
