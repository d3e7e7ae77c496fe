#include "costrec/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "costrec/error.hpp"

namespace costrec {

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}: {}", line, field, message)
                                  : fmt::format("{}: {}", field, message)),
      field_(std::move(field)),
      line_(line) {}

std::string to_string(ReductionKind kind) {
  switch (kind) {
    case ReductionKind::LogH: return "log_h";
    case ReductionKind::LogN: return "log_n";
    case ReductionKind::Combined: return "combined";
    case ReductionKind::ExpostZeroOne: return "expost_01";
    case ReductionKind::ExpostPow2: return "expost_pow2";
    case ReductionKind::ExpostSupport: return "expost_support";
    case ReductionKind::FlatPrice: return "flat_price";
    case ReductionKind::PayYourBid: return "pay_your_bid";
  }
  return "?";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

class Reader {
 public:
  Reader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ConfigError(path_, line_of(node_), "expected a mapping");
  }

  /// Rejects keys that were never asked for.
  void finish(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) throw ConfigError(field(key), line_of(kv.first), "unknown key");
    }
  }

  bool has(const char* key) const { return static_cast<bool>(node_[key]); }
  YAML::Node get(const char* key) const { return node_[key]; }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T scalar(const char* key, T fallback) const {
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    return convert<T>(n, field(key));
  }

  template <class T>
  static T convert(const YAML::Node& n, const std::string& name) {
    if (!n.IsScalar()) throw ConfigError(name, line_of(n), "expected a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(name, line_of(n), "cannot parse '" + n.Scalar() + "'");
    }
  }

  template <class T>
  std::vector<T> list(const char* key) const {
    const YAML::Node n = node_[key];
    std::vector<T> out;
    if (!n) return out;
    if (!n.IsSequence()) throw ConfigError(field(key), line_of(n), "expected a list");
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(convert<T>(n[i], fmt::format("{}[{}]", field(key), i)));
    return out;
  }

  int line(const char* key) const { return node_[key] ? line_of(node_[key]) : line_of(node_); }

 private:
  YAML::Node node_;
  std::string path_;
};

void check(bool ok, const Reader& r, const char* key, const std::string& message) {
  if (!ok) throw ConfigError(r.field(key), r.line(key), message);
}

PriorSpec parse_prior(const YAML::Node& node, const std::string& path) {
  Reader r(node, path);
  PriorSpec p;
  const auto kind = r.scalar<std::string>("kind", "discrete");
  if (kind == "discrete") {
    p.kind = PriorSpec::Kind::Discrete;
    const YAML::Node atoms = r.get("atoms");
    check(atoms && atoms.IsSequence() && atoms.size() > 0, r, "atoms", "expected a nonempty list of [value, probability]");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto name = fmt::format("{}[{}]", r.field("atoms"), i);
      const YAML::Node a = atoms[i];
      if (!a.IsSequence() || a.size() != 2) throw ConfigError(name, line_of(a), "expected [value, probability]");
      p.atoms.push_back({Reader::convert<double>(a[0], name), Reader::convert<double>(a[1], name)});
      if (!(p.atoms.back().value >= 0.0)) throw ConfigError(name, line_of(a), "value must be nonnegative");
      if (!(p.atoms.back().probability >= 0.0)) throw ConfigError(name, line_of(a), "probability must be nonnegative");
    }
    r.finish({"kind", "atoms"});
  } else if (kind == "uniform") {
    p.kind = PriorSpec::Kind::Uniform;
    p.lo = r.scalar<double>("lo", 1.0);
    p.hi = r.scalar<double>("hi", 2.0);
    check(p.lo > 0.0, r, "lo", "must be positive");
    check(p.hi > p.lo, r, "hi", "must exceed lo");
    r.finish({"kind", "lo", "hi"});
  } else if (kind == "equal_revenue" || kind == "geometric") {
    p.kind = kind == "geometric" ? PriorSpec::Kind::Geometric : PriorSpec::Kind::EqualRevenue;
    p.h = r.scalar<double>("h", 16.0);
    p.scale = r.scalar<double>("scale", 1.0);
    check(p.h > 1.0, r, "h", "must exceed 1");
    check(p.scale > 0.0, r, "scale", "must be positive");
    if (p.kind == PriorSpec::Kind::Geometric) {
      p.ratio = r.scalar<double>("ratio", 0.5);
      check(p.ratio > 0.0, r, "ratio", "must be positive");
      r.finish({"kind", "h", "scale", "ratio"});
    } else {
      r.finish({"kind", "h", "scale"});
    }
  } else {
    throw ConfigError(r.field("kind"), r.line("kind"), "unknown prior kind '" + kind + "'");
  }
  return p;
}

CostSpec parse_cost(const YAML::Node& node, std::size_t n) {
  Reader r(node, "instance.cost");
  CostSpec c;
  const auto kind = r.scalar<std::string>("kind", "public_excludable");
  if (kind == "public_excludable") {
    c.kind = CostSpec::Kind::PublicExcludable;
    c.value = r.scalar<double>("value", 1.0);
    check(c.value >= 0.0, r, "value", "must be nonnegative");
    r.finish({"kind", "value"});
    return c;
  }
  c.values = r.list<double>("values");
  for (double x : c.values) check(x >= 0.0 && std::isfinite(x), r, "values", "entries must be finite and nonnegative");
  if (kind == "additive") {
    c.kind = CostSpec::Kind::Additive;
    check(c.values.size() == n, r, "values", fmt::format("expected {} entries", n));
  } else if (kind == "cardinality") {
    c.kind = CostSpec::Kind::Cardinality;
    check(c.values.size() == n + 1, r, "values", fmt::format("expected {} entries", n + 1));
  } else if (kind == "explicit") {
    c.kind = CostSpec::Kind::ExplicitTable;
    check(n <= 20, r, "kind", "explicit tables need at most 20 agents");
    check(c.values.size() == (std::size_t{1} << n), r, "values", fmt::format("expected {} entries", std::size_t{1} << n));
  } else {
    throw ConfigError(r.field("kind"), r.line("kind"), "unknown cost kind '" + kind + "'");
  }
  r.finish({"kind", "values"});
  return c;
}

AlgorithmSpec parse_algorithm(const YAML::Node& node) {
  Reader r(node, "instance.algorithm");
  AlgorithmSpec a;
  a.kind = r.scalar<std::string>("kind", "serve_all");
  static const std::set<std::string> known = {"serve_all", "serve_none", "argmax", "argmin", "value_threshold", "optimal"};
  check(known.count(a.kind) > 0, r, "kind", "unknown algorithm '" + a.kind + "'");
  a.cutoff = r.scalar<double>("cutoff", 0.0);
  check(a.kind == "value_threshold" || !r.has("cutoff"), r, "cutoff", "only value_threshold takes a cutoff");
  r.finish({"kind", "cutoff"});
  return a;
}

ReductionKind parse_reduction_kind(const Reader& r) {
  const auto k = r.scalar<std::string>("kind", "log_h");
  for (auto kind : {ReductionKind::LogH, ReductionKind::LogN, ReductionKind::Combined, ReductionKind::ExpostZeroOne,
                    ReductionKind::ExpostPow2, ReductionKind::ExpostSupport, ReductionKind::FlatPrice,
                    ReductionKind::PayYourBid})
    if (to_string(kind) == k) return kind;
  throw ConfigError(r.field("kind"), r.line("kind"), "unknown reduction '" + k + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin, e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(origin, 0, "empty config");
  Reader top(root, "");
  ExperimentConfig c;
  c.hash = fnv1a_hex(text);

  check(top.has("instance"), top, "instance", "section is required");
  {
    Reader r(top.get("instance"), "instance");
    c.agents = r.scalar<std::size_t>("agents", 2);
    check(c.agents >= 1, r, "agents", "must be at least 1");
    check(r.has("prior") != r.has("priors"), r, "prior", "give exactly one of prior or priors");
    if (r.has("prior")) {
      c.priors.push_back(parse_prior(r.get("prior"), "instance.prior"));
    } else {
      const YAML::Node list = r.get("priors");
      check(list.IsSequence() && list.size() == c.agents, r, "priors", fmt::format("expected {} entries", c.agents));
      for (std::size_t i = 0; i < list.size(); ++i) c.priors.push_back(parse_prior(list[i], fmt::format("instance.priors[{}]", i)));
    }
    if (r.has("cost")) c.cost = parse_cost(r.get("cost"), c.agents);
    if (r.has("algorithm")) c.algorithm = parse_algorithm(r.get("algorithm"));
    r.finish({"agents", "prior", "priors", "cost", "algorithm"});
  }
  if (top.has("reduction")) {
    Reader r(top.get("reduction"), "reduction");
    c.reduction = parse_reduction_kind(r);
    const auto payments = r.scalar<std::string>("payments", "closed_form");
    check(payments == "closed_form" || payments == "sampled", r, "payments", "expected closed_form or sampled");
    c.sampled_payments = payments == "sampled";
    c.delta = r.scalar<double>("delta", c.delta);
    check(c.delta > 0.0 && std::isfinite(c.delta), r, "delta", "must be positive");
    c.epsilon = r.scalar<double>("epsilon", c.epsilon);
    check(c.epsilon > 0.0 && c.epsilon < 1.0, r, "epsilon", "must lie in (0, 1)");
    if (r.has("epsilon0")) {
      c.epsilon0 = r.scalar<double>("epsilon0", 0.0);
      check(*c.epsilon0 >= 0.0, r, "epsilon0", "must be nonnegative");
    }
    c.price = r.scalar<double>("price", c.price);
    check(c.price >= 0.0, r, "price", "must be nonnegative");
    c.support = r.list<double>("support");
    check(c.reduction != ReductionKind::ExpostSupport || !c.support.empty(), r, "support",
          "expost_support needs a support list");
    for (std::size_t i = 0; i < c.support.size(); ++i)
      check(c.support[i] > 0.0 && (i == 0 || c.support[i] > c.support[i - 1]), r, "support",
            "must be positive and strictly increasing");
    r.finish({"kind", "payments", "delta", "epsilon", "epsilon0", "price", "support"});
  }
  if (top.has("mode")) {
    Reader r(top.get("mode"), "mode");
    const auto kind = r.scalar<std::string>("kind", "exact");
    check(kind == "exact" || kind == "sampled", r, "kind", "expected exact or sampled");
    c.mode = kind == "exact" ? Mode::Exact : Mode::Sampled;
    c.curve_samples = r.scalar<std::size_t>("curve_samples", 0);
    c.cost_samples = r.scalar<std::size_t>("cost_samples", 0);
    c.eval_samples = r.scalar<std::size_t>("eval_samples", c.eval_samples);
    check(c.eval_samples >= 1, r, "eval_samples", "must be at least 1");
    c.seed = r.scalar<std::uint64_t>("seed", c.seed);
    c.support_cap = r.scalar<std::size_t>("support_cap", c.support_cap);
    check(c.support_cap >= 1, r, "support_cap", "must be at least 1");
    r.finish({"kind", "curve_samples", "cost_samples", "eval_samples", "seed", "support_cap"});
  }
  if (top.has("output")) {
    Reader r(top.get("output"), "output");
    c.out_dir = r.scalar<std::string>("dir", c.out_dir);
    c.profile_rows = r.scalar<std::size_t>("profile_rows", c.profile_rows);
    r.finish({"dir", "profile_rows"});
  }
  if (top.has("sweep")) {
    Reader r(top.get("sweep"), "sweep");
    c.sweep_given = true;
    c.sweep_h = r.list<double>("h");
    for (double h : c.sweep_h) check(h > 1.0, r, "h", "entries must exceed 1");
    c.sweep_agents = r.list<std::size_t>("agents");
    for (auto n : c.sweep_agents) check(n >= 1, r, "agents", "entries must be at least 1");
    c.sweep_delta = r.list<double>("delta");
    for (double d : c.sweep_delta) check(d > 0.0, r, "delta", "entries must be positive");
    c.sweep_epsilon = r.list<double>("epsilon");
    for (double e : c.sweep_epsilon) check(e > 0.0 && e < 1.0, r, "epsilon", "entries must lie in (0, 1)");
    r.finish({"h", "agents", "delta", "epsilon"});
  }
  top.finish({"instance", "reduction", "mode", "output", "sweep"});
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

ValueDistribution build_distribution(const PriorSpec& p, const std::string& field) {
  try {
    switch (p.kind) {
      case PriorSpec::Kind::Discrete: return ValueDistribution::discrete(p.atoms);
      case PriorSpec::Kind::Uniform: return ValueDistribution::uniform(p.lo, p.hi);
      case PriorSpec::Kind::EqualRevenue: return ValueDistribution::equal_revenue(p.h, p.scale);
      case PriorSpec::Kind::Geometric: {
        std::vector<Atom> atoms;
        const int top = static_cast<int>(std::floor(std::log2(p.h) + 1e-9));
        double w = 1.0, total = 0.0;
        for (int j = 0; j <= top; ++j, w *= p.ratio) {
          atoms.push_back({p.scale * std::ldexp(1.0, j), w});
          total += w;
        }
        for (auto& a : atoms) a.probability /= total;
        return ValueDistribution::discrete(std::move(atoms));
      }
    }
  } catch (const Error& e) {
    throw ConfigError(field, 0, e.what());
  }
  throw ConfigError(field, 0, "unknown prior");
}

}  // namespace

std::shared_ptr<const ProductPrior> build_prior(const ExperimentConfig& c) {
  if (c.priors.size() == 1)
    return std::make_shared<const ProductPrior>(
        ProductPrior::iid(build_distribution(c.priors[0], "instance.prior"), c.agents));
  std::vector<ValueDistribution> dists;
  for (std::size_t i = 0; i < c.priors.size(); ++i)
    dists.push_back(build_distribution(c.priors[i], fmt::format("instance.priors[{}]", i)));
  return std::make_shared<const ProductPrior>(std::move(dists));
}

CostFunction build_cost(const ExperimentConfig& c) {
  try {
    switch (c.cost.kind) {
      case CostSpec::Kind::PublicExcludable: return CostFunction::public_excludable(c.cost.value);
      case CostSpec::Kind::Additive: return CostFunction::additive(c.cost.values);
      case CostSpec::Kind::Cardinality: return CostFunction::cardinality(c.cost.values);
      case CostSpec::Kind::ExplicitTable: return CostFunction::explicit_table(c.agents, c.cost.values);
    }
  } catch (const Error& e) {
    throw ConfigError("instance.cost", 0, e.what());
  }
  throw ConfigError("instance.cost", 0, "unknown cost");
}

AlgorithmPtr build_algorithm(const ExperimentConfig& c, const CostFunction& cost) {
  const auto& k = c.algorithm.kind;
  if (k == "serve_all") return std::make_shared<const ServeAll>();
  if (k == "serve_none") return std::make_shared<const ServeNone>();
  if (k == "argmax") return std::make_shared<const Argmax>();
  if (k == "argmin") return std::make_shared<const Argmin>();
  if (k == "value_threshold") return std::make_shared<const ValueThreshold>(c.algorithm.cutoff);
  if (k == "optimal") {
    if (c.agents > 20) throw ConfigError("instance.algorithm.kind", 0, "optimal needs at most 20 agents");
    return std::make_shared<const SocialCostOptimal>(cost);
  }
  throw ConfigError("instance.algorithm.kind", 0, "unknown algorithm '" + k + "'");
}

void set_prior_h(ExperimentConfig& c, double h) {
  for (auto& p : c.priors) {
    if (p.kind != PriorSpec::Kind::EqualRevenue && p.kind != PriorSpec::Kind::Geometric)
      throw ConfigError("sweep.h", 0, "only equal_revenue and geometric priors carry h");
    p.h = h;
  }
}

}  // namespace costrec
