#pragma once

// Brute-force reference computations used as test oracles. They share no code
// with the library beyond plain value types.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

struct Atom {
  double value;
  double prob;
};

using Marginals = std::vector<std::vector<Atom>>;
using Rule = std::function<std::vector<bool>(const std::vector<double>&)>;

struct Profile {
  std::vector<double> v;
  double prob;
};

inline void expand(const Marginals& m, std::size_t i, std::vector<double>& cur, double p, std::vector<Profile>& out) {
  if (i == m.size()) {
    out.push_back({cur, p});
    return;
  }
  for (const auto& a : m[i]) {
    cur.push_back(a.value);
    expand(m, i + 1, cur, p * a.prob, out);
    cur.pop_back();
  }
}

inline std::vector<Profile> profiles(const Marginals& m) {
  std::vector<Profile> out;
  std::vector<double> cur;
  expand(m, 0, cur, 1.0, out);
  return out;
}

/// Pr[rule serves i | v_i = value].
inline double interim(const Rule& rule, const Marginals& m, std::size_t i, double value) {
  Marginals pinned = m;
  pinned[i] = {{value, 1.0}};
  double x = 0.0;
  for (const auto& p : profiles(pinned))
    if (rule(p.v)[i]) x += p.prob;
  return x;
}

/// Midpoint-rule integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b, int steps = 200000) {
  if (b <= a) return 0.0;
  const double h = (b - a) / steps;
  double s = 0.0;
  for (int k = 0; k < steps; ++k) s += f(a + (k + 0.5) * h);
  return s * h;
}

/// Myerson payment truncated at t, by numeric integration.
inline double payment(const std::function<double(double)>& x, double v, double t) {
  if (v < t) return 0.0;
  return v * x(v) - integrate(x, t, v);
}

inline double harmonic(std::size_t r) {
  double s = 0.0;
  for (std::size_t i = 1; i <= r; ++i) s += 1.0 / static_cast<double>(i);
  return s;
}

}  // namespace oracle
