#pragma once

// Expectations over the prior, either by exact enumeration of a discrete
// support or by Monte Carlo over counter-keyed samples. Both paths reduce in a
// fixed chunk order so results are bit-identical for any job count.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "costrec/distribution.hpp"
#include "costrec/parallel.hpp"
#include "costrec/rng.hpp"

namespace costrec {

enum class Mode { Exact, Sampled };

std::string_view to_string(Mode mode) noexcept;

struct Moment {
  double mean = 0.0;
  double standard_error = 0.0;
};

class ProfileSource {
 public:
  static ProfileSource exact(std::shared_ptr<const ProductPrior> prior, std::size_t cap = kDefaultSupportCap);
  static ProfileSource sampled(std::shared_ptr<const ProductPrior> prior, std::size_t samples, std::uint64_t seed,
                               Purpose purpose = Purpose::CostSampling);

  Mode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return size_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Purpose purpose() const noexcept { return purpose_; }
  const ProductPrior& prior() const noexcept { return *prior_; }
  const std::shared_ptr<const ProductPrior>& prior_ptr() const noexcept { return prior_; }

  ValuationProfile profile(std::size_t index) const;
  /// Probability of an enumerated profile; 1 for samples (averaging happens in expect()).
  double weight(std::size_t index) const noexcept { return mode_ == Mode::Exact ? exact_[index].probability : 1.0; }
  /// Randomness handed to the evaluated object for this profile.
  RandomStream stream(std::size_t index) const noexcept {
    return RandomStream(seed_, purpose_, static_cast<std::uint32_t>(index), 1, static_cast<std::uint32_t>(index >> 32));
  }

 private:
  ProfileSource() = default;
  Mode mode_ = Mode::Exact;
  std::shared_ptr<const ProductPrior> prior_;
  std::vector<Weighted<ValuationProfile>> exact_;
  std::size_t size_ = 0;
  std::uint64_t seed_ = 0;
  Purpose purpose_ = Purpose::CostSampling;
};

namespace detail {

inline constexpr std::size_t kReductionChunk = 256;

inline std::vector<Moment> finish(const std::vector<std::vector<double>>& partials, std::size_t dims, Mode mode,
                                  std::size_t count) {
  std::vector<double> sum(dims, 0.0), sum_sq(dims, 0.0);
  for (const auto& p : partials) {
    for (std::size_t d = 0; d < dims; ++d) {
      sum[d] += p[d];
      sum_sq[d] += p[dims + d];
    }
  }
  std::vector<Moment> out(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    if (mode == Mode::Exact) {
      out[d].mean = sum[d];
      continue;
    }
    const double n = static_cast<double>(count);
    out[d].mean = sum[d] / n;
    if (count > 1) {
      const double var = std::max(0.0, (sum_sq[d] - sum[d] * sum[d] / n) / (n - 1.0));
      out[d].standard_error = std::sqrt(var / n);
    }
  }
  return out;
}

}  // namespace detail

/// E[f(v, outcome)] where `obj` is an algorithm or a mechanism. In exact mode
/// the object's exact output distribution is enumerated at every profile; in
/// sampled mode the object is run once per sample. f writes `dims` values.
template <class Object, class Fn>
std::vector<Moment> expect(const Object& obj, const ProfileSource& source, std::size_t dims, Fn&& f,
                           unsigned jobs = 1) {
  const std::size_t count = source.size();
  const std::size_t chunks = (count + detail::kReductionChunk - 1) / detail::kReductionChunk;
  std::vector<std::vector<double>> partials(chunks, std::vector<double>(2 * dims, 0.0));
  parallel_for(chunks, jobs, [&](std::size_t c) {
    auto& acc = partials[c];
    std::vector<double> out(dims);
    const std::size_t end = std::min(count, (c + 1) * detail::kReductionChunk);
    for (std::size_t idx = c * detail::kReductionChunk; idx < end; ++idx) {
      const ValuationProfile v = source.profile(idx);
      if (source.mode() == Mode::Exact) {
        const double w = source.weight(idx);
        for (const auto& [outcome, q] : obj.distribution(v)) {
          std::fill(out.begin(), out.end(), 0.0);
          f(v, outcome, std::span<double>(out));
          for (std::size_t d = 0; d < dims; ++d) acc[d] += w * q * out[d];
        }
      } else {
        RandomStream rng = source.stream(idx);
        std::fill(out.begin(), out.end(), 0.0);
        f(v, obj.run(v, rng), std::span<double>(out));
        for (std::size_t d = 0; d < dims; ++d) {
          acc[d] += out[d];
          acc[dims + d] += out[d] * out[d];
        }
      }
    }
  });
  return detail::finish(partials, dims, source.mode(), count);
}

/// E[f(v)] over the profiles alone.
template <class Fn>
std::vector<Moment> expect_profiles(const ProfileSource& source, std::size_t dims, Fn&& f, unsigned jobs = 1) {
  const std::size_t count = source.size();
  const std::size_t chunks = (count + detail::kReductionChunk - 1) / detail::kReductionChunk;
  std::vector<std::vector<double>> partials(chunks, std::vector<double>(2 * dims, 0.0));
  parallel_for(chunks, jobs, [&](std::size_t c) {
    auto& acc = partials[c];
    std::vector<double> out(dims);
    const std::size_t end = std::min(count, (c + 1) * detail::kReductionChunk);
    for (std::size_t idx = c * detail::kReductionChunk; idx < end; ++idx) {
      const ValuationProfile v = source.profile(idx);
      const double w = source.weight(idx);
      std::fill(out.begin(), out.end(), 0.0);
      f(v, std::span<double>(out));
      for (std::size_t d = 0; d < dims; ++d) {
        acc[d] += w * out[d];
        acc[dims + d] += w * out[d] * out[d];
      }
    }
  });
  return detail::finish(partials, dims, source.mode(), count);
}

}  // namespace costrec
