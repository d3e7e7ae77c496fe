#include "costrec/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "costrec/error.hpp"
#include "costrec/format.hpp"

namespace costrec {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void apply_overrides(ExperimentConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.mode) c.mode = *o.mode;
}

namespace {

BicSelector selector_of(ReductionKind k) {
  if (k == ReductionKind::LogN) return BicSelector::LogN;
  if (k == ReductionKind::Combined) return BicSelector::Combined;
  return BicSelector::LogH;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Configuration, "cannot write " + path.string());
  out << contents;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& w) {
  std::ostringstream ss;
  w(ss);
  write_file(path, ss.str());
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", 0, "cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

ordered_json moment_json(const Moment& m, Mode mode) {
  ordered_json j;
  j["mean"] = num(m.mean);
  if (mode == Mode::Sampled) j["standard_error"] = num(m.standard_error);
  return j;
}

std::string members_string(const AgentSet& s) {
  std::string out;
  s.for_each([&](std::size_t i) { out += (out.empty() ? "" : " ") + std::to_string(i); });
  return out;
}

std::string values_string(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_number(v[i]);
  return out;
}

}  // namespace

Experiment run_experiment(const ExperimentConfig& c, unsigned jobs) {
  Experiment e;
  e.prior = build_prior(c);
  e.cost = build_cost(c);
  e.base = build_algorithm(c, e.cost);
  const ProductPrior& prior = *e.prior;

  if (c.mode == Mode::Exact) {
    require(prior.is_discrete(), ErrorCode::Incompatible, "exact mode needs discrete priors for every agent");
    require(prior.support_size() <= c.support_cap, ErrorCode::Incompatible,
            fmt::format("exact mode: support of {} profiles exceeds the cap {}", prior.support_size(), c.support_cap));
  }

  switch (c.reduction) {
    case ReductionKind::LogH:
    case ReductionKind::LogN:
    case ReductionKind::Combined: {
      BayesianSetup s;
      s.prior = e.prior;
      s.base = e.base;
      s.cost = e.cost;
      s.mode = c.mode;
      s.delta = c.delta;
      s.epsilon = c.epsilon;
      s.epsilon0 = c.epsilon0;
      s.curve_samples = c.curve_samples;
      s.cost_samples = c.cost_samples;
      s.seed = c.seed;
      s.payments = c.sampled_payments ? PaymentRule::Sampled : PaymentRule::ClosedForm;
      s.support_cap = c.support_cap;
      s.jobs = jobs;
      e.bayesian = reduce_bayesian(s, selector_of(c.reduction));
      e.mechanism = e.bayesian->mechanism;
      e.threshold = e.bayesian->mechanism->threshold();
      e.chosen = e.bayesian->chosen;
      for (const auto& sched : e.bayesian->schedules)
        if (sched.selector == e.chosen) e.k = sched.rows[sched.chosen].j;
      break;
    }
    case ReductionKind::ExpostZeroOne:
      if (prior.is_discrete())
        for (std::size_t i = 0; i < prior.agents(); ++i)
          for (const auto& a : prior[i].atoms())
            require(a.value == 0.0 || a.value == 1.0, ErrorCode::Incompatible, "expost_01 needs values in {0, 1}");
      e.mechanism = std::make_shared<const ZeroOneReduction>(e.base, e.cost);
      break;
    case ReductionKind::ExpostPow2:
      e.mechanism = std::make_shared<const ThresholdPriceReduction>(
          ThresholdPriceReduction::powers_of_two(e.base, e.cost, prior.v_min(), prior.h()));
      break;
    case ReductionKind::ExpostSupport: {
      SupportList list(c.support);
      if (prior.is_discrete())
        for (std::size_t i = 0; i < prior.agents(); ++i)
          for (const auto& a : prior[i].atoms())
            require(a.probability == 0.0 || list.contains(a.value), ErrorCode::Incompatible,
                    "prior value " + format_number(a.value) + " is not in the support list");
      e.mechanism = std::make_shared<const ThresholdPriceReduction>(
          ThresholdPriceReduction::support_list(e.base, e.cost, std::move(list)));
      break;
    }
    case ReductionKind::FlatPrice:
      e.mechanism = std::make_shared<const PricedAllocation>(e.base, PricedAllocation::Rule::Flat, c.price);
      break;
    case ReductionKind::PayYourBid:
      e.mechanism = std::make_shared<const PricedAllocation>(e.base, PricedAllocation::Rule::PayYourBid);
      break;
  }

  e.evaluation = c.mode == Mode::Exact ? ProfileSource::exact(e.prior, c.support_cap)
                                       : ProfileSource::sampled(e.prior, c.eval_samples, c.seed, Purpose::Evaluation);
  const CostFunction& cost = e.cost;
  const auto m = expect(
      *e.mechanism, *e.evaluation, 2,
      [&](const ValuationProfile&, const MechanismResult& r, std::span<double> o) {
        o[0] = cost(r.served);
        o[1] = r.revenue();
      },
      jobs);
  e.expected_cost = m[0];
  e.expected_revenue = m[1];
  const auto ratio = social_cost_ratio(*e.mechanism, *e.base, *e.evaluation, cost, jobs);
  e.social_cost = ratio.mechanism;
  e.base_social_cost = ratio.base;
  e.ratio = ratio.ratio;
  return e;
}

std::string summary_json(const ExperimentConfig& c, const Experiment& e, const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["config_hash"] = c.hash;
  j["seed"] = c.seed;
  j["mode"] = std::string(to_string(c.mode));
  j["reduction"] = to_string(c.reduction);
  j["mechanism"] = e.mechanism->name();
  j["base"] = e.base->name();
  j["cost"] = e.cost.describe();
  j["agents"] = c.agents;
  j["h"] = num(e.prior->h());
  if (e.bayesian) {
    const auto& b = e.bayesian->build;
    j["delta"] = c.delta;
    j["epsilon0"] = b.epsilon0;
    if (b.sampling) {
      j["epsilon"] = b.sampling->epsilon;
      j["curve_samples"] = b.sampling->samples;
    }
    if (b.cost_source && b.cost_source->mode() == Mode::Sampled) j["cost_samples"] = b.cost_source->size();
    j["chosen_selector"] = e.chosen;
    if (e.k) j["k"] = *e.k;
    j["threshold"] = num(e.threshold);
    if (c.reduction == ReductionKind::Combined && e.bayesian->social_costs.size() == 2) {
      j["social_cost_log_h"] = moment_json(e.bayesian->social_costs[0], c.mode);
      j["social_cost_log_n"] = moment_json(e.bayesian->social_costs[1], c.mode);
    }
  }
  if (c.mode == Mode::Sampled) j["eval_samples"] = c.eval_samples;
  j["expected_cost"] = moment_json(e.expected_cost, c.mode);
  j["expected_revenue"] = moment_json(e.expected_revenue, c.mode);
  j["expected_social_cost"] = moment_json(e.social_cost, c.mode);
  j["base_social_cost"] = moment_json(e.base_social_cost, c.mode);
  j["ratio"] = num(e.ratio);
  return j.dump(2) + "\n";
}

void write_profiles_csv(std::ostream& out, const ExperimentConfig& c, const Experiment& e) {
  out << "index,probability,values,served,payments,revenue,cost,social_cost\n";
  const ProfileSource& src = *e.evaluation;
  const std::size_t rows = std::min(src.size(), c.profile_rows);
  auto line = [&](std::size_t idx, double p, const ValuationProfile& v, const MechanismResult& r) {
    out << idx << ',' << format_number(p) << ',' << values_string(v.values()) << ',' << members_string(r.served) << ','
        << values_string(r.payments) << ',' << format_number(r.revenue()) << ',' << format_number(e.cost(r.served))
        << ',' << format_number(social_cost(r.served, v, e.cost)) << '\n';
  };
  for (std::size_t idx = 0; idx < rows; ++idx) {
    const ValuationProfile v = src.profile(idx);
    if (src.mode() == Mode::Exact) {
      for (const auto& [r, q] : e.mechanism->distribution(v)) line(idx, src.weight(idx) * q, v, r);
    } else {
      RandomStream rng = src.stream(idx);
      line(idx, 1.0 / static_cast<double>(src.size()), v, e.mechanism->run(v, rng));
    }
  }
}

std::vector<AuditReport> audit_experiment(const ExperimentConfig& c, const Experiment& e, unsigned jobs) {
  std::vector<AuditReport> out;
  const ProductPrior& prior = *e.prior;
  const bool exact = c.mode == Mode::Exact;
  const bool enumerable = prior.is_discrete() && prior.support_size() <= c.support_cap;
  auto tag = [&](AuditReport r, bool hard) {
    if (!hard) {
      r.informational = true;
      r.note("status", "reported only in sampled mode");
    }
    out.push_back(std::move(r));
  };

  if (e.bayesian) {
    tag(check_interim_monotone(e.bayesian->build.curves), true);
    if (enumerable) tag(check_bic_on_grid(*e.mechanism, prior, 1e-9, c.support_cap), exact);
  } else if (c.reduction == ReductionKind::FlatPrice || c.reduction == ReductionKind::PayYourBid) {
    require(enumerable, ErrorCode::Incompatible, "fixture audits enumerate the prior's support");
    tag(check_bic_on_grid(*e.mechanism, prior, 1e-9, c.support_cap), true);
  } else {
    require(enumerable, ErrorCode::Incompatible, "ex-post audits enumerate every profile of the support");
    const ValueGrid grid = grid_of(prior);
    tag(check_expost_truthful(*e.mechanism, grid, 1e-9, c.support_cap), true);
    tag(check_profile_cost_recovery(*e.mechanism, grid, e.cost, c.support_cap), true);
    if (c.reduction != ReductionKind::ExpostZeroOne) {
      AuditReport r;
      r.name = "no_bossy";
      r.note("base", e.base->name());
      r.samples = grid_size(grid);
      for (const auto& b : check_no_bossy(*e.base, grid, c.support_cap)) {
        ++r.violations;
        r.pass = false;
        if (r.violations == 1)
          r.worst_violation = fmt::format("agent {} raising {} to {} changes the served set", b.agent,
                                          format_number(b.value), format_number(b.other_value));
      }
      tag(std::move(r), true);
    }
  }

  AuditReport cr = check_cost_recovery(*e.mechanism, *e.evaluation, e.cost, 1e-9, jobs);
  if (!exact) cr.seed = c.seed;
  tag(std::move(cr), true);

  if (e.bayesian) {
    const auto& b = e.bayesian->build;
    if (e.chosen == "log_h") {
      tag(check_log_h_approximation(*e.mechanism, *b.allocation, *e.evaluation, e.cost, 1e-9, jobs), exact);
    } else {
      tag(check_log_n_approximation(*b.allocation, *e.evaluation, e.cost, e.threshold, c.delta, 1e-9, jobs), exact);
    }
  }
  return out;
}

namespace {

void print_reports(std::ostream& log, const std::vector<AuditReport>& reports) {
  for (const auto& r : reports) {
    log << (r.pass ? "PASS" : (r.informational ? "INFO" : "FAIL")) << ' ' << r.name;
    if (r.violations) log << " violations=" << r.violations << " worst: " << r.worst_violation;
    log << '\n';
  }
}

}  // namespace

int cmd_run(ExperimentConfig c, const Overrides& o, std::ostream& log) {
  apply_overrides(c, o);
  const Experiment e = run_experiment(c, o.jobs);
  const fs::path dir = prepare_dir(c.out_dir);
  write_with(dir / "schedule.csv", [&](std::ostream& s) {
    write_schedule_csv(s, e.bayesian ? e.bayesian->schedules : std::vector<ThresholdSchedule>{});
  });
  if (e.bayesian) write_with(dir / "curves.csv", [&](std::ostream& s) { write_curves_csv(s, e.bayesian->build.curves); });
  write_with(dir / "profiles.csv", [&](std::ostream& s) { write_profiles_csv(s, c, e); });
  write_file(dir / "summary.json", summary_json(c, e, "run"));
  log << e.mechanism->name() << ": E[cost] " << format_number(e.expected_cost.mean) << ", E[revenue] "
      << format_number(e.expected_revenue.mean) << ", E[SC] " << format_number(e.social_cost.mean) << ", ratio "
      << format_number(e.ratio) << '\n';
  return kExitOk;
}

int cmd_audit(ExperimentConfig c, const Overrides& o, std::ostream& log) {
  apply_overrides(c, o);
  const Experiment e = run_experiment(c, o.jobs);
  const auto reports = audit_experiment(c, e, o.jobs);
  const fs::path dir = prepare_dir(c.out_dir);
  ordered_json j;
  j["command"] = "audit";
  j["config_hash"] = c.hash;
  j["seed"] = c.seed;
  j["mechanism"] = e.mechanism->name();
  j["pass"] = all_pass(reports);
  j["reports"] = ordered_json::parse(reports_json(reports));
  write_file(dir / "audit.json", j.dump(2) + "\n");
  write_with(dir / "audit.csv", [&](std::ostream& s) { write_reports_csv(s, reports); });
  print_reports(log, reports);
  return all_pass(reports) ? kExitOk : kExitAuditFail;
}

int cmd_lowerbound(const LowerBoundConfig& lb, const std::string& out_dir, std::ostream& log) {
  if (!(lb.h > 1.0)) throw ConfigError("h", 0, "must exceed 1");
  if (lb.agents < 1) throw ConfigError("agents", 0, "must be at least 1");
  if (lb.samples < 2) throw ConfigError("samples", 0, "must be at least 2");
  const auto r = lower_bound_experiment(lb);
  const std::vector<AuditReport> reports = {r.calibration, r.floor, r.nonempty, r.baseline};
  const fs::path dir = prepare_dir(out_dir);
  ordered_json j;
  j["command"] = "lowerbound";
  j["h"] = lb.h;
  j["agents"] = lb.agents;
  j["samples"] = lb.samples;
  j["seed"] = lb.seed;
  j["selector"] = to_string(lb.selector);
  j["mechanism"] = r.reduction.mechanism->name();
  j["pass"] = all_pass(reports);
  j["reports"] = ordered_json::parse(reports_json(reports));
  write_file(dir / "lowerbound.json", j.dump(2) + "\n");
  write_with(dir / "lowerbound.csv", [&](std::ostream& s) { write_reports_csv(s, reports); });
  print_reports(log, reports);
  return all_pass(reports) ? kExitOk : kExitAuditFail;
}

int cmd_sweep(ExperimentConfig c, const Overrides& o, std::ostream& log) {
  apply_overrides(c, o);
  struct Cell {
    ExperimentConfig config;
  };
  std::vector<Cell> cells;
  const bool any = !c.sweep_h.empty() || !c.sweep_agents.empty() || !c.sweep_delta.empty() || !c.sweep_epsilon.empty();
  auto or_default = [](const auto& list, auto fallback) {
    using T = typename std::decay_t<decltype(list)>::value_type;
    return list.empty() ? std::vector<T>{static_cast<T>(fallback)} : list;
  };
  if (any) {
    const double h0 = c.priors.empty() ? 0.0 : c.priors[0].h;
    for (double h : or_default(c.sweep_h, h0))
      for (std::size_t n : or_default(c.sweep_agents, c.agents))
        for (double d : or_default(c.sweep_delta, c.delta))
          for (double eps : or_default(c.sweep_epsilon, c.epsilon)) {
            ExperimentConfig cell = c;
            if (!c.sweep_h.empty()) set_prior_h(cell, h);
            if (!c.sweep_agents.empty()) {
              if (cell.priors.size() != 1) throw ConfigError("sweep.agents", 0, "needs an iid prior");
              if (cell.cost.kind != CostSpec::Kind::PublicExcludable)
                throw ConfigError("sweep.agents", 0, "needs a public_excludable cost");
              cell.agents = n;
            }
            cell.delta = d;
            cell.epsilon = eps;
            build_prior(cell);
            build_cost(cell);
            cells.push_back({std::move(cell)});
          }
  }

  const fs::path dir = prepare_dir(c.out_dir);
  std::ostringstream s;
  s << "cell,h,agents,delta,epsilon,log2_h,H_n,status,mechanism,chosen,threshold,expected_cost,expected_revenue,"
       "expected_social_cost,base_social_cost,ratio,note\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const ExperimentConfig& cell = cells[i].config;
    const auto prior = build_prior(cell);
    const double h = prior->h();
    s << i << ',' << format_number(h) << ',' << cell.agents << ',' << format_number(cell.delta) << ','
      << format_number(cell.epsilon) << ',' << format_number(std::log2(h)) << ','
      << format_number(harmonic_number(cell.agents)) << ',';
    try {
      const Experiment e = run_experiment(cell, o.jobs);
      s << "ok," << csv_field(e.mechanism->name()) << ',' << e.chosen << ','
        << (std::isnan(e.threshold) ? "" : format_number(e.threshold)) << ',' << format_number(e.expected_cost.mean)
        << ',' << format_number(e.expected_revenue.mean) << ',' << format_number(e.social_cost.mean) << ','
        << format_number(e.base_social_cost.mean) << ',' << format_number(e.ratio) << ",\n";
    } catch (const Error& err) {
      const auto code = err.code();
      if (code != ErrorCode::Incompatible && code != ErrorCode::SupportTooLarge && code != ErrorCode::NotDiscrete)
        throw;
      s << "skipped,,,,,,,," << csv_field(err.what()) << '\n';
      log << "cell " << i << " skipped: " << err.what() << '\n';
    }
  }
  write_file(dir / "sweep.csv", s.str());
  log << cells.size() << " cells written to " << (dir / "sweep.csv").string() << '\n';
  return kExitOk;
}

int exit_code_for(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (const auto* lib = dynamic_cast<const Error*>(&e)) {
    switch (lib->code()) {
      case ErrorCode::Incompatible:
      case ErrorCode::NotDiscrete:
      case ErrorCode::SupportTooLarge:
      case ErrorCode::GridMismatch:
      case ErrorCode::NonBinaryValuation:
      case ErrorCode::ValueOutsideSupport:
        return kExitIncompatible;
      default:
        return kExitConfig;
    }
  }
  return kExitConfig;
}

}  // namespace costrec
