#pragma once

#include <fmt/format.h>

#include "costrec/error.hpp"

namespace costrec {

template <class F>
void for_each_profile(const ValueGrid& grid, std::size_t cap, F&& f) {
  const std::size_t total = grid_size(grid);
  require(total <= cap, ErrorCode::SupportTooLarge, fmt::format("grid of {} profiles exceeds cap {}", total, cap));
  const std::size_t n = grid.size();
  for (const auto& g : grid)
    if (g.empty()) return;
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> values(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) values[i] = grid[i][idx[i]];
    f(ValuationProfile(values));
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == grid[pos].size()) idx[pos++] = 0;
    if (pos == n) break;
  }
}

}  // namespace costrec
