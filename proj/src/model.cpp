#include "costrec/model.hpp"

#include <numeric>

#include "costrec/error.hpp"

namespace costrec {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroMassInterval: return "ZeroMassInterval";
    case ErrorCode::NotDiscrete: return "NotDiscrete";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonMonotoneCurve: return "NonMonotoneCurve";
    case ErrorCode::GammaOutOfRange: return "GammaOutOfRange";
    case ErrorCode::ZeroInterimServed: return "ZeroInterimServed";
    case ErrorCode::NonBinaryValuation: return "NonBinaryValuation";
    case ErrorCode::ValueOutsideSupport: return "ValueOutsideSupport";
    case ErrorCode::EntryBelowOne: return "EntryBelowOne";
    case ErrorCode::Configuration: return "Configuration";
    case ErrorCode::Incompatible: return "Incompatible";
  }
  return "Unknown";
}

AgentSet::AgentSet(std::size_t n, std::initializer_list<std::size_t> members) : bits_(n) {
  for (auto i : members) {
    require(i < n, ErrorCode::InvalidArgument, "agent index out of range");
    bits_.set(i);
  }
}

AgentSet AgentSet::all(std::size_t n) {
  AgentSet s(n);
  s.bits_.set();
  return s;
}

AgentSet AgentSet::from_mask(std::size_t n, std::uint64_t mask) {
  require(n <= 64, ErrorCode::InvalidArgument, "mask sets need at most 64 agents");
  AgentSet s(n);
  for (std::size_t i = 0; i < n; ++i)
    if ((mask >> i) & 1u) s.bits_.set(i);
  return s;
}

std::vector<std::size_t> AgentSet::members() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for_each([&](std::size_t i) { out.push_back(i); });
  return out;
}

std::uint64_t AgentSet::mask() const {
  require(bits_.size() <= 64, ErrorCode::InvalidArgument, "mask needs at most 64 agents");
  std::uint64_t m = 0;
  for_each([&](std::size_t i) { m |= std::uint64_t{1} << i; });
  return m;
}

std::string AgentSet::to_string() const {
  std::string out = "{";
  bool first = true;
  for_each([&](std::size_t i) {
    if (!first) out += ' ';
    out += std::to_string(i);
    first = false;
  });
  return out + "}";
}

ValuationProfile::ValuationProfile(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument, "values must be finite and >= 0");
}

double ValuationProfile::total() const noexcept { return std::accumulate(values_.begin(), values_.end(), 0.0); }

ValuationProfile ValuationProfile::with(std::size_t i, double value) const {
  require(i < values_.size(), ErrorCode::InvalidArgument, "agent index out of range");
  require(std::isfinite(value) && value >= 0.0, ErrorCode::InvalidArgument, "values must be finite and >= 0");
  ValuationProfile copy = *this;
  copy.values_[i] = value;
  return copy;
}

double MechanismResult::revenue() const noexcept {
  return std::accumulate(payments.begin(), payments.end(), 0.0);
}

}  // namespace costrec
