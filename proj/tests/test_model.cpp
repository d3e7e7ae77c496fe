#include <cmath>
#include <numeric>

#include "costrec/algorithm.hpp"
#include "costrec/cost.hpp"
#include "costrec/distribution.hpp"
#include "costrec/error.hpp"
#include "costrec/rng.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace costrec;

TEST_CASE("philox known answers") {
  using P = Philox4x32;
  CHECK(P::apply({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(P::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        P::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(P::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        P::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are pure functions of their key") {
  RandomStream a(7, Purpose::Test, 1, 2, 3), b(7, Purpose::Test, 1, 2, 3), c(7, Purpose::Estimation, 1, 2, 3);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    differs = differs || x != c.next_u32();
  }
  CHECK(differs);
  RandomStream u(1, Purpose::Test);
  for (int k = 0; k < 10000; ++k) {
    const double x = u.uniform();
    CHECK((x > 0.0 && x < 1.0));
  }
}

TEST_CASE("social cost and welfare") {
  const ValuationProfile v{0.3, 0.7};
  const auto pe = CostFunction::public_excludable(1.0);
  CHECK(social_cost(AgentSet(2), v, pe) == doctest::Approx(1.0));
  CHECK(social_cost(AgentSet::all(2), v, pe) == doctest::Approx(1.0));
  CHECK(social_cost(AgentSet(2, {0}), v, CostFunction::additive({0.2, 0.5})) == doctest::Approx(0.9));
  CHECK(social_welfare(AgentSet(2), v) == 0.0);
  CHECK(social_welfare(AgentSet(2, {1}), v) == doctest::Approx(0.7));
  CHECK(social_welfare(AgentSet::all(2), ValuationProfile{1, 4}) == doctest::Approx(5.0));
}

TEST_CASE("social cost identity on random inputs") {
  RandomStream rng(3, Purpose::Test);
  const auto cost = CostFunction::cardinality({0, 1, 1.5, 1.8, 2.0});
  for (int r = 0; r < 500; ++r) {
    std::vector<double> vals(4);
    for (auto& x : vals) x = rng.uniform(0, 3);
    const ValuationProfile v(vals);
    const AgentSet s = AgentSet::from_mask(4, rng.below(16));
    CHECK(social_cost(s, v, cost) == doctest::Approx(v.total() - social_welfare(s, v) + cost(s)));
  }
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(ValuationProfile({1.0, -0.5}), Error);
  CHECK_THROWS_AS(ValuationProfile({1.0, NAN}), Error);
}

TEST_CASE("equal revenue inverse cdf") {
  const double h = 16, s = 0.25;
  const auto er = ValueDistribution::equal_revenue(h, s);
  CHECK(er.quantile(1.0 / h + 1e-12) == doctest::Approx(s * 1.0).epsilon(1e-9));
  CHECK(er.quantile(1.0 - 1e-12) == doctest::Approx(s * h).epsilon(1e-6));
  CHECK(er.quantile(0.5 / h) == 0.0);
  CHECK(er.mean() == doctest::Approx(s * std::log(h)));
}

TEST_CASE("equal revenue sampler statistics") {
  const double h = 16;
  const auto er = ValueDistribution::equal_revenue(h, 1.0);
  RandomStream rng(11, Purpose::Test);
  const int n = 1'000'000;
  int zeros = 0;
  double nonzero_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x = er.sample(rng);
    if (x == 0.0)
      ++zeros;
    else
      nonzero_sum += x;
  }
  const double p = 1.0 / h;
  CHECK(std::abs(zeros / double(n) - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
  const double nonzero_mean = nonzero_sum / (n - zeros);
  CHECK(nonzero_mean == doctest::Approx(std::log(h) / (1.0 - 1.0 / h)).epsilon(0.02));
}

TEST_CASE("discrete sampler mean") {
  const auto d = ValueDistribution::discrete({{1, 0.5}, {4, 0.5}});
  RandomStream rng(5, Purpose::Test);
  double s = 0;
  for (int k = 0; k < 1'000'000; ++k) s += d.sample(rng);
  CHECK(std::abs(s / 1e6 - 2.5) < 0.01);
}

TEST_CASE("conditional sampling") {
  RandomStream rng(9, Purpose::Test);
  const auto d = ValueDistribution::discrete({{1, 0.5}, {4, 0.5}});
  for (int k = 0; k < 100; ++k) CHECK(d.conditional_sample({0.5, 1.5}, rng) == 1.0);
  const auto u = ValueDistribution::uniform(0, 1);
  double s = 0;
  for (int k = 0; k < 100000; ++k) {
    const double x = u.conditional_sample({0.2, 0.4}, rng);
    CHECK((x > 0.2 && x <= 0.4));
    s += x;
  }
  CHECK(s / 100000 == doctest::Approx(0.3).epsilon(0.01));
  const auto one = ValueDistribution::discrete({{1, 1.0}});
  try {
    one.conditional_sample({2, 3}, rng);
    FAIL("expected ZeroMassInterval");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroMassInterval);
  }
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(ValueDistribution::discrete({{1, 0.5}, {2, 0.4}}), Error);
  CHECK_THROWS_AS(ValueDistribution::discrete({{2, 0.5}, {1, 0.5}}), Error);
  CHECK_THROWS_AS(ValueDistribution::uniform(2, 1), Error);
  CHECK_THROWS_AS(ProductPrior(std::vector<ValueDistribution>{}), Error);
}

TEST_CASE("support enumeration") {
  const auto d = ValueDistribution::discrete({{1, 0.5}, {4, 0.5}});
  auto two = enumerate_support(ProductPrior::iid(d, 2));
  CHECK(two.size() == 4);
  for (const auto& p : two) CHECK(p.probability == doctest::Approx(0.25));

  auto single = enumerate_support(ProductPrior::iid(ValueDistribution::discrete({{2, 1.0}}), 1));
  REQUIRE(single.size() == 1);
  CHECK(single[0].value == ValuationProfile{2});
  CHECK(single[0].probability == 1.0);

  ProductPrior mixed({ValueDistribution::discrete({{1, 0.3}, {2, 0.7}}),
                      ValueDistribution::discrete({{1, 0.2}, {2, 0.3}, {3, 0.5}}),
                      ValueDistribution::discrete({{1, 0.9}, {5, 0.1}})});
  auto all = enumerate_support(mixed);
  CHECK(all.size() == 12);
  double total = 0;
  for (const auto& p : all) total += p.probability;
  CHECK(std::abs(total - 1.0) < 1e-9);

  oracle::Marginals m = {{{1, 0.3}, {2, 0.7}}, {{1, 0.2}, {2, 0.3}, {3, 0.5}}, {{1, 0.9}, {5, 0.1}}};
  auto ref = oracle::profiles(m);
  double lib_mean = 0, ref_mean = 0;
  for (const auto& p : all) lib_mean += p.probability * p.value.total();
  for (const auto& p : ref) ref_mean += p.prob * (p.v[0] + p.v[1] + p.v[2]);
  CHECK(lib_mean == doctest::Approx(ref_mean).epsilon(1e-12));

  try {
    enumerate_support(ProductPrior::iid(ValueDistribution::uniform(1, 2), 2));
    FAIL("expected NotDiscrete");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotDiscrete);
  }
  try {
    enumerate_support(ProductPrior::iid(d, 21), 1'000'000);
    FAIL("expected SupportTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupportTooLarge);
  }
}

TEST_CASE("monte carlo agrees with enumeration") {
  ProductPrior prior({ValueDistribution::discrete({{1, 0.3}, {2, 0.7}}),
                      ValueDistribution::discrete({{1, 0.2}, {3, 0.8}})});
  double exact = 0;
  for (const auto& p : enumerate_support(prior)) exact += p.probability * std::max(p.value[0], p.value[1]);
  RandomStream rng(2, Purpose::Test);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int k = 0; k < n; ++k) {
    const auto v = prior.sample(rng);
    const double x = std::max(v[0], v[1]);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) <= 3 * se);
}

TEST_CASE("prior derived quantities") {
  ProductPrior p({ValueDistribution::discrete({{0, 0.5}, {2, 0.5}}), ValueDistribution::discrete({{1, 0.5}, {8, 0.5}})});
  CHECK(p.v_min() == 1.0);
  CHECK(p.v_max() == 8.0);
  CHECK(p.h() == 8.0);
  CHECK_THROWS_AS(ProductPrior::iid(ValueDistribution::discrete({{0, 1.0}}), 2), Error);
}

TEST_CASE("cost monotonicity") {
  CHECK(check_cost_monotone(CostFunction::public_excludable(1), 3).ok());
  CHECK(check_cost_monotone(CostFunction::additive({0.2, 0.5}), 2).ok());
  // C({1}) = 2, C({1,2}) = 1.
  auto bad = check_cost_monotone(CostFunction::explicit_table(2, {0, 2, 0.5, 1}), 2);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].first == AgentSet(2, {0}));
  CHECK(bad.violations[0].second == AgentSet(2, {0, 1}));
  CHECK_FALSE(check_cost_monotone(CostFunction::explicit_table(1, {1, 1}), 1).ok());
  for (std::size_t n = 1; n <= 10; ++n) {
    std::vector<double> g(n + 1), add(n), table(std::size_t{1} << n);
    for (std::size_t k = 0; k <= n; ++k) g[k] = std::sqrt(double(k));
    for (std::size_t i = 0; i < n; ++i) add[i] = 0.1 * double(i + 1);
    for (std::size_t m = 0; m < table.size(); ++m) table[m] = std::log1p(double(__builtin_popcountll(m)));
    CHECK(check_cost_monotone(CostFunction::public_excludable(2), n).ok());
    CHECK(check_cost_monotone(CostFunction::additive(add), n).ok());
    CHECK(check_cost_monotone(CostFunction::cardinality(g), n).ok());
    CHECK(check_cost_monotone(CostFunction::explicit_table(n, table), n).ok());
  }
}

TEST_CASE("built-in algorithms") {
  RandomStream rng(1, Purpose::Test);
  const ValuationProfile v{1, 4, 4};
  CHECK(Argmax().run(v, rng).served == AgentSet(3, {1}));
  CHECK(Argmin().run(v, rng).served == AgentSet(3, {0}));
  CHECK(ServeAll().run(v, rng).served == AgentSet::all(3));
  CHECK(ServeNone().run(v, rng).served.empty());
  CHECK(ValueThreshold(4).run(v, rng).served == AgentSet(3, {1, 2}));
  // Public good of cost 5 against total value 9: serve everyone.
  CHECK(SocialCostOptimal(CostFunction::public_excludable(5)).run(v, rng).served == AgentSet::all(3));
  CHECK(SocialCostOptimal(CostFunction::public_excludable(10)).run(v, rng).served.empty());
}
