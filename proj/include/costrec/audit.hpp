#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "costrec/bic_reduction.hpp"
#include "costrec/expost_reduction.hpp"
#include "costrec/pipeline.hpp"

namespace costrec {

struct AuditReport {
  std::string name;
  bool pass = true;
  /// Informational reports never fail a suite.
  bool informational = false;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<std::pair<std::string, std::string>> notes;
  std::optional<std::uint64_t> seed;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst = 0.0;
  std::string worst_violation;

  AuditReport& measure(std::string key, double value);
  AuditReport& tolerance(std::string key, double value);
  AuditReport& note(std::string key, std::string value);
  double get(const std::string& key) const;
};

/// Pass iff every report passes or is informational.
bool all_pass(const std::vector<AuditReport>& reports) noexcept;

std::string reports_json(const std::vector<AuditReport>& reports);
void write_reports_csv(std::ostream& out, const std::vector<AuditReport>& reports);

AuditReport check_interim_monotone(const CurveSet& curves);

/// Exact interim allocation and payment of a mechanism at a report, by enumeration.
struct InterimOutcome {
  double allocation = 0.0;
  double payment = 0.0;
};
InterimOutcome exact_interim_outcome(const Mechanism& mech, const ProductPrior& prior, std::size_t agent,
                                     double report, std::size_t cap = kDefaultSupportCap);

/// Every (i, v_i, v_i') over the support: no misreport gains more than tol in interim utility.
AuditReport check_bic_on_grid(const Mechanism& mech, const ProductPrior& prior, double tol = 1e-9,
                              std::size_t cap = kDefaultSupportCap);

/// Every profile of the grid and unilateral deviation within it: no gain above tol.
AuditReport check_expost_truthful(const Mechanism& mech, const ValueGrid& grid, double tol = 1e-9,
                                  std::size_t cap = kDefaultSupportCap);

/// Exact mode: E[sum p] >= E[C] - tol. Sampled mode: mean(sum p - C) + 3 SE >= 0.
/// Also reports the fraction of profiles recovering their own cost.
AuditReport check_cost_recovery(const Mechanism& mech, const ProfileSource& source, const CostFunction& cost,
                                double tol = 1e-9, unsigned jobs = 1);

/// Per-profile cost recovery over a grid (ex-post mechanisms), zero tolerance.
AuditReport check_profile_cost_recovery(const Mechanism& mech, const ValueGrid& grid, const CostFunction& cost,
                                        std::size_t cap = kDefaultSupportCap);

struct SocialCostRatio {
  Moment mechanism;
  Moment base;
  double ratio = 1.0;
};

/// Both expectations over the same source (common random numbers when sampled).
SocialCostRatio social_cost_ratio(const Mechanism& mech, const AllocationAlgorithm& base, const ProfileSource& source,
                                  const CostFunction& cost, unsigned jobs = 1);

/// 3 + 2(1 + floor(log2 h)).
double log_h_constant(double h) noexcept;
double harmonic_number(std::size_t r) noexcept;

/// E[SC(mech)] <= (3 + 2(1 + floor(log2 h))) E[SC(base)].
AuditReport check_log_h_approximation(const Mechanism& mech, const AllocationAlgorithm& base,
                                      const ProfileSource& source, const CostFunction& cost, double tol = 1e-9,
                                      unsigned jobs = 1);

/// E[sum of values excluded by threshold T] <= (1 + 2 H_n) E[C(S)] + n delta.
AuditReport check_log_n_approximation(const AllocationAlgorithm& alg, const ProfileSource& source,
                                      const CostFunction& cost, double threshold, double delta, double tol = 1e-9,
                                      unsigned jobs = 1);

struct HarmonicResult {
  double lhs = 0.0;
  double bound = 0.0;
  bool pass = true;
};

/// sum_j a_j / (sum_{t >= j} a_t) against 2 H_{sum floor(a_j)}. EntryBelowOne for a_j < 1.
HarmonicResult harmonic_inequality(const std::vector<double>& a);

/// Random vectors of length 1..max_len with entries uniform on [lo, hi].
AuditReport harmonic_sweep(std::size_t vectors, std::size_t max_len, double lo, double hi, std::uint64_t seed);

struct LowerBoundConfig {
  double h = 16.0;
  std::size_t agents = 1024;
  std::size_t samples = 100'000;
  std::uint64_t seed = 1;
  BicSelector selector = BicSelector::Combined;
  /// Grid width; 0 uses v_min of the prior.
  double delta = 0.0;
  double epsilon = 0.1;
  std::optional<double> epsilon0;
  unsigned jobs = 1;
};

struct LowerBoundResult {
  AuditReport calibration;
  AuditReport floor;
  AuditReport nonempty;
  AuditReport baseline;
  BayesianReduction reduction;
};

/// Equal-revenue instance with a public excludable good of cost 1.
LowerBoundResult lower_bound_experiment(const LowerBoundConfig& config);

}  // namespace costrec
