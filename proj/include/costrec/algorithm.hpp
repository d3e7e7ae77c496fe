#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "costrec/cost.hpp"
#include "costrec/model.hpp"
#include "costrec/rng.hpp"

namespace costrec {

struct AlgorithmTraits {
  bool deterministic = true;
  bool truthful = false;
  bool no_bossy = false;
  /// Permutation-equivariant: relabelling agents relabels the served set.
  bool anonymous = false;
};

/// Black-box allocation rule: profile (plus randomness) to a served set.
class AllocationAlgorithm {
 public:
  virtual ~AllocationAlgorithm() = default;

  virtual std::string name() const = 0;
  virtual AlgorithmTraits traits() const = 0;
  virtual ServiceOutcome run(const ValuationProfile& v, RandomStream& rng) const = 0;
  /// Exact output distribution at v. Algorithms whose randomness is not finite
  /// throw NotDiscrete.
  virtual std::vector<Weighted<ServiceOutcome>> distribution(const ValuationProfile& v) const = 0;
};

using AlgorithmPtr = std::shared_ptr<const AllocationAlgorithm>;

class DeterministicAlgorithm : public AllocationAlgorithm {
 public:
  virtual ServiceOutcome serve(const ValuationProfile& v) const = 0;

  ServiceOutcome run(const ValuationProfile& v, RandomStream&) const final { return serve(v); }
  std::vector<Weighted<ServiceOutcome>> distribution(const ValuationProfile& v) const final {
    return {{serve(v), 1.0}};
  }
};

class ServeAll final : public DeterministicAlgorithm {
 public:
  std::string name() const override { return "serve_all"; }
  AlgorithmTraits traits() const override { return {true, true, true, true}; }
  ServiceOutcome serve(const ValuationProfile& v) const override { return {AgentSet::all(v.size())}; }
};

class ServeNone final : public DeterministicAlgorithm {
 public:
  std::string name() const override { return "serve_none"; }
  AlgorithmTraits traits() const override { return {true, true, true, true}; }
  ServiceOutcome serve(const ValuationProfile& v) const override { return {AgentSet(v.size())}; }
};

/// Serves the single highest-value agent; ties go to the lower index.
class Argmax final : public DeterministicAlgorithm {
 public:
  std::string name() const override { return "argmax"; }
  AlgorithmTraits traits() const override { return {true, true, true, false}; }
  ServiceOutcome serve(const ValuationProfile& v) const override;
};

/// Serves the single lowest-value agent (ties to the lower index). Its interim
/// allocation is decreasing, which makes it a fixture for monotonization.
class Argmin final : public DeterministicAlgorithm {
 public:
  std::string name() const override { return "argmin"; }
  AlgorithmTraits traits() const override { return {true, false, false, false}; }
  ServiceOutcome serve(const ValuationProfile& v) const override;
};

/// Serves every agent whose value is at least `cutoff`.
class ValueThreshold final : public DeterministicAlgorithm {
 public:
  explicit ValueThreshold(double cutoff) : cutoff_(cutoff) {}
  std::string name() const override;
  AlgorithmTraits traits() const override { return {true, true, true, true}; }
  ServiceOutcome serve(const ValuationProfile& v) const override;

 private:
  double cutoff_;
};

/// Exact social-cost minimizer by subset enumeration (n <= 20). Ties keep the
/// first minimizing mask in increasing mask order.
class SocialCostOptimal final : public DeterministicAlgorithm {
 public:
  explicit SocialCostOptimal(CostFunction cost) : cost_(std::move(cost)) {}
  std::string name() const override { return "optimal"; }
  AlgorithmTraits traits() const override { return {true, false, false, false}; }
  ServiceOutcome serve(const ValuationProfile& v) const override;

 private:
  CostFunction cost_;
};

/// Wraps an arbitrary deterministic rule.
class FunctionAlgorithm final : public DeterministicAlgorithm {
 public:
  using Rule = std::function<AgentSet(const ValuationProfile&)>;
  FunctionAlgorithm(std::string name, Rule rule, AlgorithmTraits traits = {})
      : name_(std::move(name)), rule_(std::move(rule)), traits_(traits) {}
  std::string name() const override { return name_; }
  AlgorithmTraits traits() const override { return traits_; }
  ServiceOutcome serve(const ValuationProfile& v) const override { return {rule_(v)}; }

 private:
  std::string name_;
  Rule rule_;
  AlgorithmTraits traits_;
};

/// Allocation plus payments.
class Mechanism {
 public:
  virtual ~Mechanism() = default;

  virtual std::string name() const = 0;
  virtual MechanismResult run(const ValuationProfile& v, RandomStream& rng) const = 0;
  /// Exact distribution over served sets. Where payments are sampled, each entry
  /// carries the conditional expected payment.
  virtual std::vector<Weighted<MechanismResult>> distribution(const ValuationProfile& v) const = 0;
};

using MechanismPtr = std::shared_ptr<const Mechanism>;

/// Runs an allocation algorithm and prices every served agent by a fixed rule.
/// Used for baselines and for deliberately broken audit fixtures.
class PricedAllocation final : public Mechanism {
 public:
  enum class Rule { Zero, Flat, PayYourBid };

  PricedAllocation(AlgorithmPtr base, Rule rule, double price = 0.0);
  std::string name() const override;
  MechanismResult run(const ValuationProfile& v, RandomStream& rng) const override;
  std::vector<Weighted<MechanismResult>> distribution(const ValuationProfile& v) const override;

 private:
  MechanismResult priced(const ValuationProfile& v, const AgentSet& served) const;
  AlgorithmPtr base_;
  Rule rule_;
  double price_;
};

}  // namespace costrec
