#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "twk/error.hpp"

namespace twk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sakoe-Chiba band: only cells with |i - j| <= halfwidth are admissible.
using Corridor = std::optional<std::size_t>;

/// Edit costs indexed by 1-based positions i in A and j in B. Index 0 stands
/// for the empty prefix; a cost may be +inf to forbid the operation there.
template <class C>
concept EditCosts = requires(const C& c, std::size_t i, std::size_t j) {
  { c.deletion(i, j) } -> std::convertible_to<double>;
  { c.match(i, j) } -> std::convertible_to<double>;
  { c.insertion(i, j) } -> std::convertible_to<double>;
};

/// Type-erased cost triple, for callers that build costs at run time.
struct EditCostTriple {
  std::function<double(std::size_t, std::size_t)> delete_cost;
  std::function<double(std::size_t, std::size_t)> match_cost;
  std::function<double(std::size_t, std::size_t)> insert_cost;

  double deletion(std::size_t i, std::size_t j) const { return delete_cost(i, j); }
  double match(std::size_t i, std::size_t j) const { return match_cost(i, j); }
  double insertion(std::size_t i, std::size_t j) const { return insert_cost(i, j); }
};

namespace detail {

inline void check_corridor(std::size_t n, std::size_t m, const Corridor& corridor) {
  if (!corridor) return;
  if (*corridor == 0) throw error(errc::invalid_params, "corridor halfwidth must be >= 1");
  const std::size_t gap = n > m ? n - m : m - n;
  if (gap > *corridor) {
    throw error(errc::corridor_too_narrow, "length difference " + std::to_string(gap) +
                                               " exceeds corridor halfwidth " + std::to_string(*corridor));
  }
}

inline bool in_band(std::size_t i, std::size_t j, const Corridor& corridor) {
  if (!corridor) return true;
  return (i > j ? i - j : j - i) <= *corridor;
}

}  // namespace detail

/// Minimum-cost edit recursion
///   D(i,j) = min{ D(i-1,j) + del(i,j), D(i-1,j-1) + match(i,j), D(i,j-1) + ins(i,j) }
/// with D(0,0) = 0. Row 0 and column 0 accumulate insertions and deletions, so a
/// policy that wants anchored starts returns +inf there. Two rolling rows.
template <EditCosts Costs>
double edit_distance_dp(std::size_t n, std::size_t m, const Costs& costs, const Corridor& corridor = {}) {
  detail::check_corridor(n, m, corridor);

  std::vector<double> prev(m + 1, kInf);
  std::vector<double> curr(m + 1, kInf);

  prev[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    if (!detail::in_band(0, j, corridor)) break;
    prev[j] = prev[j - 1] + costs.insertion(0, j);
  }

  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(curr.begin(), curr.end(), kInf);
    const std::size_t jlo = corridor && i > *corridor ? i - *corridor : 0;
    const std::size_t jhi = corridor ? std::min(m, i + *corridor) : m;
    for (std::size_t j = jlo; j <= jhi; ++j) {
      double best = prev[j] + costs.deletion(i, j);
      if (j > 0) {
        best = std::min(best, prev[j - 1] + costs.match(i, j));
        best = std::min(best, curr[j - 1] + costs.insertion(i, j));
      }
      curr[j] = best;
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

}  // namespace twk
