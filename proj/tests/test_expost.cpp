#include "costrec/audit.hpp"
#include "costrec/error.hpp"
#include "costrec/expost_reduction.hpp"
#include "doctest.h"

using namespace costrec;

TEST_CASE("zero-one reduction") {
  const auto pe1 = CostFunction::public_excludable(1);
  auto r = reduce_zero_one(AgentSet::all(3), ValuationProfile{1, 1, 0}, pe1);
  CHECK(r.served == AgentSet(3, {0, 1}));
  CHECK(r.payments == std::vector<double>{1, 1, 0});
  CHECK(r.revenue() >= pe1(r.served));

  auto z = reduce_zero_one(AgentSet::all(2), ValuationProfile{0, 0}, pe1);
  CHECK(z.served.empty());
  CHECK(z.revenue() == 0.0);

  auto no = reduce_zero_one(AgentSet::all(2), ValuationProfile{1, 0}, CostFunction::public_excludable(2));
  CHECK(no.served.empty());

  try {
    reduce_zero_one(AgentSet::all(2), ValuationProfile{0.5, 1}, pe1);
    FAIL("expected NonBinaryValuation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonBinaryValuation);
  }
}

TEST_CASE("powers-of-two reduction") {
  const ValuationProfile v{1, 4, 4};
  auto a = reduce_powers_of_two(AgentSet::all(3), v, CostFunction::public_excludable(1), 1, 4);
  CHECK(a.served == AgentSet::all(3));
  CHECK(a.payments == std::vector<double>{1, 1, 1});
  auto b = reduce_powers_of_two(AgentSet::all(3), v, CostFunction::public_excludable(5), 1, 4);
  CHECK(b.served == AgentSet(3, {1, 2}));
  CHECK(b.payments == std::vector<double>{0, 4, 4});
  auto c = reduce_powers_of_two(AgentSet(3), v, CostFunction::public_excludable(5), 1, 4);
  CHECK(c.served.empty());
  CHECK(c.revenue() == 0.0);
  auto d = reduce_powers_of_two(AgentSet::all(3), v, CostFunction::public_excludable(100), 1, 4);
  CHECK(d.served.empty());
}

TEST_CASE("support-list reduction") {
  auto a = reduce_support_list(AgentSet::all(3), ValuationProfile{1, 4, 4}, CostFunction::public_excludable(5),
                               SupportList({1, 4}));
  CHECK(a.served == AgentSet(3, {1, 2}));
  CHECK(a.payments == std::vector<double>{0, 4, 4});
  auto b = reduce_support_list(AgentSet::all(3), ValuationProfile{2, 3, 5}, CostFunction::public_excludable(6),
                               SupportList({2, 3, 5}));
  CHECK(b.served == AgentSet::all(3));
  CHECK(b.payments == std::vector<double>{2, 2, 2});
  auto c = reduce_support_list(AgentSet::all(2), ValuationProfile{3, 3}, CostFunction::public_excludable(7),
                               SupportList({3}));
  CHECK(c.served.empty());
  try {
    reduce_support_list(AgentSet::all(2), ValuationProfile{3, 2}, CostFunction::public_excludable(7), SupportList({3}));
    FAIL("expected ValueOutsideSupport");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValueOutsideSupport);
  }
}

TEST_CASE("support list of powers reproduces the powers-of-two reduction") {
  const auto cost = CostFunction::cardinality({0, 3, 5, 6});
  const auto support = SupportList::powers_of_two(1, 4);
  for_each_profile(uniform_grid(3, {1, 2, 4}), kDefaultSupportCap, [&](const ValuationProfile& v) {
    for (std::uint64_t mask = 0; mask < 8; ++mask) {
      const AgentSet s = AgentSet::from_mask(3, mask);
      auto p = reduce_powers_of_two(s, v, cost, 1, 4);
      auto q = reduce_support_list(s, v, cost, support);
      CHECK(p.served == q.served);
      CHECK(p.payments == q.payments);
    }
  });
}

TEST_CASE("threshold-price reduction refuses unsuitable bases") {
  const auto pe = CostFunction::public_excludable(1);
  CHECK_THROWS_AS(ThresholdPriceReduction::powers_of_two(std::make_shared<const Argmin>(), pe, 1, 4), Error);
  try {
    ThresholdPriceReduction::powers_of_two(std::make_shared<const SocialCostOptimal>(pe), pe, 1, 4);
    FAIL("expected Configuration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Configuration);
  }
  CHECK_NOTHROW(ThresholdPriceReduction::powers_of_two(std::make_shared<const ServeAll>(), pe, 1, 4));
}

TEST_CASE("no-bossiness checker") {
  const ValueGrid grid = uniform_grid(2, {1, 2, 3});
  CHECK(check_no_bossy(ServeAll(), grid).empty());
  FunctionAlgorithm first_or_second("first_or_second", [](const ValuationProfile& v) {
    return v[0] >= 2 ? AgentSet(2, {0}) : AgentSet(2, {1});
  });
  CHECK(check_no_bossy(first_or_second, grid).empty());
  FunctionAlgorithm bossy("bossy", [](const ValuationProfile& v) {
    return v[0] >= 3 ? AgentSet::all(2) : AgentSet(2, {0});
  });
  auto violations = check_no_bossy(bossy, grid);
  REQUIRE_FALSE(violations.empty());
  bool found = false;
  for (const auto& b : violations)
    found = found || (b.agent == 0 && b.value == 2 && b.other_value == 3 && b.profile == ValuationProfile{2, 1});
  CHECK(found);
  CHECK_THROWS_AS(check_no_bossy(ServeAll(), uniform_grid(30, {1, 2})), Error);
}

TEST_CASE("ex-post mechanisms are truthful and recover cost per profile") {
  const auto pe1 = CostFunction::public_excludable(1);
  ZeroOneReduction z(std::make_shared<const ServeAll>(), pe1);
  CHECK(check_expost_truthful(z, binary_grid(3)).pass);
  CHECK(check_profile_cost_recovery(z, binary_grid(3), pe1).pass);

  const auto cost = CostFunction::cardinality({0, 3, 5, 6});
  auto m = ThresholdPriceReduction::powers_of_two(std::make_shared<const ServeAll>(), cost, 1, 4);
  CHECK(check_expost_truthful(m, uniform_grid(3, {1, 2, 4})).pass);
  CHECK(check_profile_cost_recovery(m, uniform_grid(3, {1, 2, 4}), cost).pass);

  PricedAllocation bid(std::make_shared<const ServeAll>(), PricedAllocation::Rule::PayYourBid);
  CHECK_FALSE(check_expost_truthful(bid, uniform_grid(2, {1, 2, 4})).pass);
}

TEST_CASE("level prices below the base's critical bid invite overbidding") {
  // Agent 0 loses to agent 1 under argmax, but reporting 4 wins the tie at level price 1.
  const auto cost = CostFunction::additive({0.5, 1.25});
  auto m = ThresholdPriceReduction::powers_of_two(std::make_shared<const Argmax>(), cost, 1, 4);
  RandomStream rng(0, Purpose::Test);
  auto truth = m.run(ValuationProfile{2, 4}, rng);
  auto lie = m.run(ValuationProfile{4, 4}, rng);
  CHECK_FALSE(truth.served.contains(0));
  CHECK(lie.served == AgentSet(2, {0}));
  CHECK(lie.payments[0] == 1.0);
  CHECK_FALSE(check_expost_truthful(m, uniform_grid(2, {1, 2, 4})).pass);
}
