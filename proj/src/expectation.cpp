#include "costrec/expectation.hpp"

#include <cstdlib>
#include <algorithm>
#include <string>
#include <thread>

#include "costrec/error.hpp"

namespace costrec {

unsigned default_jobs() {
  if (const char* env = std::getenv("COSTREC_JOBS")) {
    try {
      const long jobs = std::stol(env);
      if (jobs > 0) return static_cast<unsigned>(jobs);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string_view to_string(Mode mode) noexcept { return mode == Mode::Exact ? "exact" : "sampled"; }

ProfileSource ProfileSource::exact(std::shared_ptr<const ProductPrior> prior, std::size_t cap) {
  require(prior != nullptr, ErrorCode::InvalidArgument, "profile source needs a prior");
  ProfileSource s;
  s.mode_ = Mode::Exact;
  s.exact_ = enumerate_support(*prior, cap);
  s.size_ = s.exact_.size();
  s.prior_ = std::move(prior);
  return s;
}

ProfileSource ProfileSource::sampled(std::shared_ptr<const ProductPrior> prior, std::size_t samples,
                                     std::uint64_t seed, Purpose purpose) {
  require(prior != nullptr, ErrorCode::InvalidArgument, "profile source needs a prior");
  require(samples >= 1, ErrorCode::InvalidArgument, "sampled source needs at least one sample");
  ProfileSource s;
  s.mode_ = Mode::Sampled;
  s.prior_ = std::move(prior);
  s.size_ = samples;
  s.seed_ = seed;
  s.purpose_ = purpose;
  return s;
}

ValuationProfile ProfileSource::profile(std::size_t index) const {
  if (mode_ == Mode::Exact) return exact_[index].value;
  RandomStream rng(seed_, purpose_, static_cast<std::uint32_t>(index), 0, static_cast<std::uint32_t>(index >> 32));
  return prior_->sample(rng);
}

}  // namespace costrec
