#pragma once

// Experiment configuration: YAML with sections instance / reduction / mode /
// output (and sweep for the sweep subcommand). Unknown keys are fatal.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "costrec/algorithm.hpp"
#include "costrec/cost.hpp"
#include "costrec/distribution.hpp"
#include "costrec/expectation.hpp"

namespace costrec {

/// Config problem, with the offending field and its 1-based line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, int line, const std::string& message);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

struct PriorSpec {
  enum class Kind { Discrete, Uniform, EqualRevenue, Geometric };
  Kind kind = Kind::Discrete;
  std::vector<Atom> atoms;
  double lo = 0.0;
  double hi = 1.0;
  double h = 2.0;
  double scale = 1.0;
  /// Geometric: values scale 2^j for j <= floor(log2 h), weights ratio^j.
  double ratio = 0.5;
};

struct CostSpec {
  enum class Kind { PublicExcludable, Additive, Cardinality, ExplicitTable };
  Kind kind = Kind::PublicExcludable;
  double value = 1.0;
  std::vector<double> values;
};

struct AlgorithmSpec {
  std::string kind = "serve_all";
  double cutoff = 0.0;
};

enum class ReductionKind { LogH, LogN, Combined, ExpostZeroOne, ExpostPow2, ExpostSupport, FlatPrice, PayYourBid };

std::string to_string(ReductionKind kind);

struct ExperimentConfig {
  // instance
  std::size_t agents = 2;
  /// One prior shared by every agent, or one per agent.
  std::vector<PriorSpec> priors;
  CostSpec cost;
  AlgorithmSpec algorithm;
  // reduction
  ReductionKind reduction = ReductionKind::LogH;
  bool sampled_payments = false;
  double delta = 0.5;
  double epsilon = 0.1;
  std::optional<double> epsilon0;
  double price = 5.0;
  std::vector<double> support;
  // mode
  Mode mode = Mode::Exact;
  std::size_t curve_samples = 0;
  std::size_t cost_samples = 0;
  std::size_t eval_samples = 100'000;
  std::uint64_t seed = 1;
  std::size_t support_cap = kDefaultSupportCap;
  // output
  std::string out_dir = "out";
  std::size_t profile_rows = 1000;
  // sweep
  std::vector<double> sweep_h;
  std::vector<std::size_t> sweep_agents;
  std::vector<double> sweep_delta;
  std::vector<double> sweep_epsilon;
  bool sweep_given = false;

  /// FNV-1a 64 of the source text, hex.
  std::string hash;
};

ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& bytes);

std::shared_ptr<const ProductPrior> build_prior(const ExperimentConfig& c);
CostFunction build_cost(const ExperimentConfig& c);
AlgorithmPtr build_algorithm(const ExperimentConfig& c, const CostFunction& cost);

/// Applies an h value to the prior families that carry one.
void set_prior_h(ExperimentConfig& c, double h);

}  // namespace costrec
