#include <cmath>
#include <sstream>

#include "costrec/audit.hpp"
#include "costrec/error.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace costrec;

namespace {

InterimCurve curve(std::vector<double> values) {
  std::vector<double> masses(values.size(), 1.0);
  masses[0] = 0.0;
  const double v_hi = static_cast<double>(values.size() - 1);
  return InterimCurve(Discretization(1.0, v_hi), std::move(values), std::move(masses), Provenance{});
}

std::shared_ptr<const ProductPrior> one_four_prior() {
  return std::make_shared<const ProductPrior>(
      ProductPrior::iid(ValueDistribution::discrete({{1, 0.5}, {4, 0.5}}), 2));
}

}  // namespace

TEST_CASE("interim monotonicity audit") {
  CHECK(check_interim_monotone({curve({0.4, 0.4, 0.4})}).pass);
  auto bad = check_interim_monotone({curve({0.2, 0.2, 0.1})});
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst == doctest::Approx(0.1));
  CHECK(bad.worst_violation.find("cell 2") != std::string::npos);
  CHECK(check_interim_monotone({curve({0, 0, 0, 0.5, 0.9})}).pass);
}

TEST_CASE("grid BIC audit") {
  auto prior = one_four_prior();
  PricedAllocation free(std::make_shared<const ServeAll>(), PricedAllocation::Rule::Zero);
  CHECK(check_bic_on_grid(free, *prior).pass);

  BayesianSetup s;
  s.prior = prior;
  s.base = std::make_shared<const ServeAll>();
  s.cost = CostFunction::public_excludable(3);
  auto r = reduce_bayesian(s, BicSelector::LogH);
  CHECK(check_bic_on_grid(*r.mechanism, *prior, 1e-9).pass);

  auto three = std::make_shared<const ProductPrior>(
      ProductPrior::iid(ValueDistribution::discrete({{1, 0.3}, {2, 0.3}, {6, 0.4}}), 2));
  PricedAllocation flat(std::make_shared<const Argmax>(), PricedAllocation::Rule::Flat, 5);
  auto broken = check_bic_on_grid(flat, *three);
  CHECK_FALSE(broken.pass);
  CHECK(broken.violations > 0);

  CHECK_THROWS_AS(check_bic_on_grid(free, ProductPrior::iid(ValueDistribution::uniform(1, 2), 2)), Error);
}

TEST_CASE("cost recovery audit") {
  auto prior = one_four_prior();
  const auto src = ProfileSource::exact(prior);
  PricedAllocation nobody(std::make_shared<const ServeNone>(), PricedAllocation::Rule::Zero);
  CHECK(check_cost_recovery(nobody, src, CostFunction::public_excludable(1)).pass);

  BayesianSetup s;
  s.prior = prior;
  s.base = std::make_shared<const ServeAll>();
  s.cost = CostFunction::public_excludable(3);
  auto r = reduce_bayesian(s, BicSelector::LogH);
  auto rep = check_cost_recovery(*r.mechanism, src, s.cost);
  CHECK(rep.pass);
  CHECK(rep.get("expected_revenue") == doctest::Approx(4.0));
  CHECK(rep.get("expected_cost") == doctest::Approx(2.25));

  PricedAllocation free(std::make_shared<const ServeAll>(), PricedAllocation::Rule::Zero);
  CHECK_FALSE(check_cost_recovery(free, src, CostFunction::public_excludable(1)).pass);

  const auto sampled = ProfileSource::sampled(prior, 20000, 3);
  CHECK_FALSE(check_cost_recovery(free, sampled, CostFunction::public_excludable(1)).pass);
  CHECK(check_cost_recovery(*r.mechanism, sampled, s.cost).pass);
}

TEST_CASE("social cost ratio") {
  auto prior = one_four_prior();
  const auto src = ProfileSource::exact(prior);
  const auto pe3 = CostFunction::public_excludable(3);
  PricedAllocation same(std::make_shared<const ServeAll>(), PricedAllocation::Rule::Zero);
  CHECK(social_cost_ratio(same, ServeAll(), src, pe3).ratio == doctest::Approx(1.0));

  BayesianSetup s;
  s.prior = prior;
  s.base = std::make_shared<const ServeAll>();
  s.cost = pe3;
  auto r = reduce_bayesian(s, BicSelector::LogH);
  auto sc = social_cost_ratio(*r.mechanism, ServeAll(), src, pe3);
  CHECK(sc.base.mean == doctest::Approx(3.0));
  CHECK(sc.mechanism.mean == doctest::Approx(2.25 + 2 * 0.5 * 1));
  CHECK(sc.ratio <= log_h_constant(4));
  CHECK(log_h_constant(4) == 9.0);

  PricedAllocation none(std::make_shared<const ServeNone>(), PricedAllocation::Rule::Zero);
  CHECK(social_cost_ratio(none, ServeNone(), src, pe3).ratio <= 1.0);
}

TEST_CASE("harmonic inequality") {
  auto one = harmonic_inequality({1});
  CHECK(one.lhs == doctest::Approx(1.0));
  CHECK(one.bound == doctest::Approx(2.0));
  CHECK(one.pass);
  auto three = harmonic_inequality({1, 1, 1});
  CHECK(three.lhs == doctest::Approx(11.0 / 6));
  CHECK(three.bound == doctest::Approx(11.0 / 3));
  try {
    harmonic_inequality({1, 0.5});
    FAIL("expected EntryBelowOne");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EntryBelowOne);
  }
  CHECK(harmonic_number(3) == doctest::Approx(oracle::harmonic(3)));
  auto sweep = harmonic_sweep(2000, 50, 1, 10, 4);
  CHECK(sweep.pass);
  CHECK(sweep.violations == 0);
}

TEST_CASE("approximation audits") {
  auto prior = std::make_shared<const ProductPrior>(
      ProductPrior::iid(ValueDistribution::discrete({{1, 0.25}, {2, 0.25}, {4, 0.5}}), 3));
  const auto cost = CostFunction::public_excludable(4);
  BayesianSetup s;
  s.prior = prior;
  s.base = std::make_shared<const ServeAll>();
  s.cost = cost;
  s.delta = 0.5;
  const auto src = ProfileSource::exact(prior);
  auto h = reduce_bayesian(s, BicSelector::LogH);
  CHECK(check_log_h_approximation(*h.mechanism, *h.build.allocation, src, cost).pass);
  auto n = reduce_bayesian(s, BicSelector::LogN);
  CHECK(check_log_n_approximation(*n.build.allocation, src, cost, n.mechanism->threshold(), 0.5).pass);
}

TEST_CASE("report serialization") {
  AuditReport r;
  r.name = "x";
  r.measure("a", 1.5).note("k", "v,w");
  r.seed = 3;
  const std::string js = reports_json({r});
  CHECK(js.find("\"name\": \"x\"") != std::string::npos);
  CHECK(js.find("\"a\": 1.5") != std::string::npos);
  std::ostringstream os;
  write_reports_csv(os, {r});
  CHECK(os.str() == "name,pass,informational,violations,worst,samples,seed,worst_violation\nx,1,0,0,0,0,3,\n");
}

TEST_CASE("lower-bound experiment at small scale") {
  LowerBoundConfig c;
  c.h = 16;
  c.agents = 64;
  c.samples = 20000;
  c.seed = 2;
  auto r = lower_bound_experiment(c);
  CHECK(r.calibration.pass);
  CHECK(r.baseline.get("sc_baseline") == 1.0);
  CHECK(r.floor.pass);
  CHECK(r.nonempty.informational);
}
