#include <cmath>
#include <sstream>

#include "costrec/error.hpp"
#include "costrec/interim.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace costrec;

namespace {

ValueDistribution one_four() { return ValueDistribution::discrete({{1, 0.5}, {4, 0.5}}); }

std::shared_ptr<const ProductPrior> one_four_prior(std::size_t n = 2) {
  return std::make_shared<const ProductPrior>(ProductPrior::iid(one_four(), n));
}

InterimCurve step_curve(double delta, std::vector<double> values, std::vector<double> masses = {}) {
  const double v_hi = delta * static_cast<double>(values.size() - 1);
  if (masses.empty()) masses.assign(values.size(), 1.0);
  return InterimCurve(Discretization(delta, v_hi), std::move(values), std::move(masses), Provenance{});
}

oracle::Rule argmax_rule() {
  return [](const std::vector<double>& v) {
    std::vector<bool> s(v.size(), false);
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[best]) best = i;
    s[best] = true;
    return s;
  };
}

}  // namespace

TEST_CASE("grid cells") {
  Discretization g(0.5, 4.0);
  CHECK(g.cells() == 8);
  CHECK(g.cell_of(0.0) == 0);
  CHECK(g.cell_of(0.5) == 1);
  CHECK(g.cell_of(0.50000001) == 2);
  CHECK(g.cell_of(4.0) == 8);
  CHECK(g.cell_of(9.0) == 8);
  CHECK(g.cell(2).contains(1.0));
  CHECK_FALSE(g.cell(2).contains(0.5));
  Discretization fine(0.1, 1.0);
  CHECK(fine.cells() == 10);
  CHECK(fine.cell_of(0.3) == 3);
  CHECK(fine.cell(3).contains(0.3));
  CHECK_THROWS_AS(Discretization(-0.1, 1.0), Error);
}

TEST_CASE("exact interim curves") {
  auto prior = one_four_prior();
  Discretization g(0.5, 4.0);
  for (const auto& c : exact_interim_curve(ServeAll(), *prior, g))
    for (double x : c.values()) CHECK(x == 1.0);
  for (const auto& c : exact_interim_curve(ServeNone(), *prior, g))
    for (double x : c.values()) CHECK(x == 0.0);
  auto arg = exact_interim_curve(Argmax(), *prior, g);
  CHECK(arg[0].at(4) == doctest::Approx(1.0));
  CHECK(arg[0].at(1) == doctest::Approx(0.5));
  CHECK(arg[1].at(4) == doctest::Approx(0.5));
  CHECK(arg[1].at(1) == doctest::Approx(0.0));
  oracle::Marginals m = {{{1, 0.5}, {4, 0.5}}, {{1, 0.5}, {4, 0.5}}};
  for (std::size_t i = 0; i < 2; ++i)
    for (double v : {1.0, 4.0}) CHECK(arg[i].at(v) == doctest::Approx(oracle::interim(argmax_rule(), m, i, v)));
  CHECK_THROWS_AS(exact_interim_curve(ServeAll(), ProductPrior::iid(ValueDistribution::uniform(1, 2), 2), g), Error);
}

TEST_CASE("sample count") {
  CHECK(sample_count(0.1, 2, 0.25) == 254);
  CHECK(sample_count(0.05, 2, 0.5) ==
        static_cast<std::size_t>(std::ceil(std::log(2.0 * 2 / (0.05 * 0.5)) / (2 * 0.05 * 0.05))));
  CHECK_THROWS_AS(sample_count(1.5, 2, 0.5), Error);
}

TEST_CASE("estimated curves") {
  auto prior = one_four_prior();
  Discretization g(0.5, 4.0);
  const auto s = SamplingConfig::for_accuracy(0.05, 2, 0.5, 1);
  for (const auto& c : estimate_interim_curve(ServeAll(), *prior, g, s))
    for (double x : c.values()) CHECK(x == 1.0);
  for (const auto& c : estimate_interim_curve(ServeNone(), *prior, g, s))
    for (double x : c.values()) CHECK(x == 0.0);

  const auto exact = exact_interim_curve(Argmax(), *prior, g);
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto est = estimate_interim_curve(Argmax(), *prior, g, SamplingConfig::for_accuracy(0.05, 2, 0.5, seed));
    for (const auto& c : est) CHECK(c.monotone());
    if (max_abs_difference(est, exact) < 0.05) ++successes;
  }
  CHECK(successes >= 190);
}

TEST_CASE("estimation is independent of job count") {
  auto prior = one_four_prior(3);
  Discretization g(0.5, 4.0);
  const auto s = SamplingConfig::for_accuracy(0.1, 3, 0.5, 42);
  const auto a = estimate_raw_interim_curve(Argmax(), *prior, g, s, 1);
  const auto b = estimate_raw_interim_curve(Argmax(), *prior, g, s, 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values() == b[i].values());
}

TEST_CASE("eps closeness") {
  std::vector<InterimCurve> a{step_curve(1, {0, 0.2, 0.4})};
  std::vector<InterimCurve> b{step_curve(1, {0, 0.2, 0.5})};
  std::vector<InterimCurve> c{step_curve(1, {0.05, 0.25, 0.45})};
  CHECK(eps_close(a, a, 1e-12));
  CHECK_FALSE(eps_close(a, b, 0.5 - 0.4));
  CHECK(eps_close(a, c, 0.1));
  std::vector<InterimCurve> other{step_curve(0.5, {0, 0.2, 0.4})};
  try {
    eps_close(a, other, 0.1);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("pool adjacent violators") {
  auto two = pool_adjacent_violators(step_curve(1, {0, 0.8, 0.2}, {0, 0.5, 0.5}));
  REQUIRE(two.size() == 1);
  CHECK(two[0].value == doctest::Approx(0.5));
  CHECK(two[0].first == 1);
  CHECK(two[0].last == 2);

  auto three = pool_adjacent_violators(step_curve(1, {0, 0.1, 0.9, 0.3}, {0, 0.5, 0.25, 0.25}));
  REQUIRE(three.size() == 2);
  CHECK(three[0].value == doctest::Approx(0.1));
  CHECK(three[1].value == doctest::Approx(0.6));

  auto mono = pool_adjacent_violators(step_curve(1, {0, 0.1, 0.2, 0.3}, {0, 1, 1, 1}));
  CHECK(mono.size() == 3);
}

TEST_CASE("monotonized wrapper realizes the pooled curve") {
  auto prior = std::make_shared<const ProductPrior>(
      ProductPrior::iid(ValueDistribution::discrete({{1, 0.25}, {2, 0.25}, {3, 0.5}}), 3));
  Discretization g(0.5, prior->v_max());
  auto base = std::make_shared<const Argmin>();
  const auto raw = exact_interim_curve(*base, *prior, g);
  CHECK_FALSE(raw[0].monotone());
  auto wrapped = pava_monotonize(base, prior, raw);
  for (const auto& c : wrapped->pooled()) CHECK(c.monotone());
  const auto realized = exact_interim_curve(*wrapped, *prior, g);
  CHECK(max_abs_difference(realized, wrapped->pooled()) < 1e-9);
  // Pooled values are mass-weighted averages of the raw curve.
  for (std::size_t i = 0; i < 3; ++i) {
    for (const auto& b : wrapped->partition()[i]) {
      double num = 0, den = 0;
      for (std::size_t k = b.first; k <= b.last; ++k) {
        num += raw[i].mass(k) * raw[i].value(k);
        den += raw[i].mass(k);
      }
      CHECK(b.value == doctest::Approx(num / den));
    }
  }

  auto mono_base = std::make_shared<const Argmax>();
  auto identity = pava_monotonize(mono_base, prior, exact_interim_curve(*mono_base, *prior, g));
  CHECK(identity->identity_partition());
  CHECK(identity->traits().deterministic);
}

TEST_CASE("blatant monotonization") {
  CHECK(blatant_gamma(0.01, 0.1) == doctest::Approx(0.2));
  Discretization g(0.1, 1.0);
  auto none = std::make_shared<const ServeNone>();
  BlatantMonotonized full(none, g, 1.0);
  auto d = full.distribution(ValuationProfile{0.3});
  double served = 0;
  for (const auto& [o, q] : d)
    if (o.served.contains(0)) served += q;
  CHECK(served == doctest::Approx(0.3));

  auto argmax = std::make_shared<const Argmax>();
  BlatantMonotonized zero(argmax, g, 0.0);
  const ValuationProfile v{0.2, 0.7};
  auto dz = zero.distribution(v);
  REQUIRE(dz.size() == 1);
  CHECK(dz[0].value.served == AgentSet(2, {1}));
  CHECK_THROWS_AS(BlatantMonotonized(argmax, g, 1.5), Error);
  CHECK_THROWS_AS(BlatantMonotonized(argmax, Discretization(0.5, 4), 0.5), Error);

  // The realized curve carries the 1/n factor.
  auto prior = ProductPrior::iid(ValueDistribution::discrete({{0.2, 0.5}, {0.6, 0.5}}), 2);
  auto argmin = std::make_shared<const Argmin>();
  const double gamma = 0.3;
  const auto base = exact_interim_curve(*argmin, prior, g);
  const auto realized = exact_interim_curve(BlatantMonotonized(argmin, g, gamma), prior, g);
  const auto predicted = blatant_interim_curve(base, gamma, true);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < g.size(); ++k)
      if (realized[i].present(k)) CHECK(realized[i].value(k) == doctest::Approx(predicted[i].value(k)));
}

TEST_CASE("blatant correction removes bounded dips") {
  RandomStream rng(17, Purpose::Test);
  const double eps = 0.01, delta = 0.1, gamma = blatant_gamma(eps, delta);
  Discretization g(delta, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    for (bool per_agent : {false, true}) {
      const std::size_t n = per_agent ? 3 : 1;
      const double max_dip = per_agent ? 2 * eps / double(n) : 2 * eps;
      CurveSet curves;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(g.size());
        x[0] = rng.uniform(0.3, 0.6);
        for (std::size_t k = 1; k < x.size(); ++k)
          x[k] = std::clamp(x[k - 1] + rng.uniform(-max_dip, 2 * max_dip), 0.0, 1.0);
        curves.emplace_back(g, x, std::vector<double>(g.size(), 1.0), Provenance{});
      }
      for (const auto& c : blatant_interim_curve(curves, gamma, per_agent)) CHECK(c.monotone());
    }
  }
}

TEST_CASE("truncated payments") {
  auto ones = step_curve(1, {1, 1, 1, 1, 1});
  CHECK(truncated_interim_payment(ones, 4, 1) == doctest::Approx(1.0));
  auto step = step_curve(1, {0.5, 0.5, 0.5, 1, 1});
  CHECK(truncated_interim_payment(step, 4, 1) == doctest::Approx(1.5));
  CHECK(truncated_interim_payment(step, 0.5, 1) == 0.0);
  auto bad = step_curve(1, {0.5, 0.9, 0.2});
  try {
    truncated_interim_payment(bad, 2, 0);
    FAIL("expected NonMonotoneCurve");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonMonotoneCurve);
  }
  // Partial cells against numeric integration.
  auto f = step_curve(0.5, {0, 0.1, 0.3, 0.3, 0.7, 0.8, 1.0});
  auto x = [&](double y) { return f.at(y); };
  for (double v : {0.7, 1.3, 2.2, 2.9})
    for (double t : {0.0, 0.35, 1.1})
      CHECK(truncated_interim_payment(f, v, t) == doctest::Approx(oracle::payment(x, v, t)).epsilon(1e-5));
}

TEST_CASE("sampled payments") {
  RandomStream rng(23, Purpose::Test);
  auto ones = step_curve(1, {1, 1, 1, 1, 1});
  for (int k = 0; k < 100; ++k) CHECK(sampled_payment(ones, 4, 0, rng) == 0.0);
  auto jump = step_curve(1, {0, 0, 0, 1, 1});
  auto step = step_curve(1, {0.5, 0.5, 0.5, 1, 1});
  double s1 = 0, s2 = 0;
  for (int k = 0; k < 100000; ++k) {
    const double a = sampled_payment(jump, 4, 0, rng), b = sampled_payment(step, 4, 1, rng);
    CHECK(a >= 0);
    CHECK(b >= 0);
    s1 += a;
    s2 += b;
  }
  CHECK(std::abs(s1 / 1e5 - 2.0) < 0.05);
  CHECK(std::abs(s2 / 1e5 - 1.5) < 0.05);
}

TEST_CASE("curves csv") {
  std::ostringstream os;
  write_curves_csv(os, {step_curve(1, {0, 1})});
  CHECK(os.str() == "agent,cell,lower_edge,upper_edge,mass,value,provenance\n0,0,0,0,1,0,exact\n0,1,0,1,1,1,exact\n");
}
