#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "twk/edit_dp.hpp"

namespace twk {

/// One recursion branch maps the predecessor value K to scale * K + offset.
/// A multiplicative local kernel value k is {k, 0}; an additive one is {1, k}.
struct Affine {
  double scale = 1.0;
  double offset = 0.0;
};

template <class B>
concept BranchWeights = requires(const B& b, std::size_t i, std::size_t j) {
  { b.deletion(i, j) } -> std::same_as<Affine>;
  { b.match(i, j) } -> std::same_as<Affine>;
  { b.insertion(i, j) } -> std::same_as<Affine>;
};

/// Local kernel values per edit operation (same indexing as EditCosts).
template <class K>
concept LocalKernel = EditCosts<K>;

enum class Star { add, multiply };

template <LocalKernel K>
struct StarBranches {
  const K& kernel;
  Star star;

  Affine wrap(double k) const { return star == Star::multiply ? Affine{k, 0.0} : Affine{1.0, k}; }
  Affine deletion(std::size_t i, std::size_t j) const { return wrap(kernel.deletion(i, j)); }
  Affine match(std::size_t i, std::size_t j) const { return wrap(kernel.match(i, j)); }
  Affine insertion(std::size_t i, std::size_t j) const { return wrap(kernel.insertion(i, j)); }
};

/// K(0,0) = xi and, for every other admissible cell,
///   K(i,j) = normalizer * sum over the existing predecessors of branch(K(pred)).
/// Predecessors with a negative index, or outside the corridor, are absent.
template <BranchWeights B>
double summative_recursion(std::size_t n, std::size_t m, const B& branches, double xi, double normalizer = 1.0,
                           const Corridor& corridor = {}) {
  detail::check_corridor(n, m, corridor);

  std::vector<double> prev(m + 1, 0.0);
  std::vector<double> curr(m + 1, 0.0);
  const auto apply = [](Affine w, double k) { return w.scale * k + w.offset; };

  prev[0] = xi;
  for (std::size_t j = 1; j <= m; ++j) {
    if (!detail::in_band(0, j, corridor)) break;
    prev[j] = normalizer * apply(branches.insertion(0, j), prev[j - 1]);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(curr.begin(), curr.end(), 0.0);
    const std::size_t jlo = corridor && i > *corridor ? i - *corridor : 0;
    const std::size_t jhi = corridor ? std::min(m, i + *corridor) : m;
    for (std::size_t j = jlo; j <= jhi; ++j) {
      // prev[j] is 0 outside the band of row i-1, which is exactly "absent".
      double sum = detail::in_band(i - 1, j, corridor) ? apply(branches.deletion(i, j), prev[j]) : 0.0;
      if (j > 0) {
        if (detail::in_band(i - 1, j - 1, corridor)) sum += apply(branches.match(i, j), prev[j - 1]);
        if (j - 1 >= jlo) sum += apply(branches.insertion(i, j), curr[j - 1]);
      }
      curr[j] = normalizer * sum;
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

/// Summative time-warp kernel with the local kernel combined by `star`.
template <LocalKernel K>
double stwk_recursion(std::size_t n, std::size_t m, const K& local_kernel, Star star, double xi,
                      double normalizer = 1.0, const Corridor& corridor = {}) {
  return summative_recursion(n, m, StarBranches<K>{local_kernel, star}, xi, normalizer, corridor);
}

namespace detail {

inline double log_add(double x, double y) {
  if (x == -kInf) return y;
  if (y == -kInf) return x;
  return x > y ? x + std::log1p(std::exp(y - x)) : y + std::log1p(std::exp(x - y));
}

}  // namespace detail

/// Log of the multiplicative recursion whose local kernel is exp(-nu_prime * cost).
/// Works directly with -nu_prime * cost, so long series do not underflow.
/// Returns -inf when no admissible editing sequence exists.
template <EditCosts Costs>
double log_exponentiated_recursion(std::size_t n, std::size_t m, const Costs& costs, double nu_prime, double xi,
                                   double normalizer, const Corridor& corridor = {}) {
  detail::check_corridor(n, m, corridor);
  const double log_c = std::log(normalizer);
  const auto term = [&](double log_k, double cost) {
    if (log_k == -kInf || cost == kInf) return -kInf;
    return log_k - nu_prime * cost;
  };

  std::vector<double> prev(m + 1, -kInf);
  std::vector<double> curr(m + 1, -kInf);
  prev[0] = std::log(xi);
  for (std::size_t j = 1; j <= m; ++j) {
    if (!detail::in_band(0, j, corridor)) break;
    const double t = term(prev[j - 1], costs.insertion(0, j));
    prev[j] = t == -kInf ? -kInf : log_c + t;
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(curr.begin(), curr.end(), -kInf);
    const std::size_t jlo = corridor && i > *corridor ? i - *corridor : 0;
    const std::size_t jhi = corridor ? std::min(m, i + *corridor) : m;
    for (std::size_t j = jlo; j <= jhi; ++j) {
      double acc = term(prev[j], costs.deletion(i, j));
      if (j > 0) {
        acc = detail::log_add(acc, term(prev[j - 1], costs.match(i, j)));
        acc = detail::log_add(acc, term(curr[j - 1], costs.insertion(i, j)));
      }
      curr[j] = acc == -kInf ? -kInf : log_c + acc;
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

/// Exhaustive evaluation of the same quantity as summative_recursion, by
/// enumerating editing sequences instead of sharing sub-results.
///
/// Walking back from (n, m), every complete editing sequence gamma contributes
///   xi * prod_k (normalizer * scale_k)
/// and every pair (edit e, continuation after e) contributes
///   normalizer * offset_e * prod over the continuation of (normalizer * scale).
/// For a purely multiplicative local kernel this is the classical
/// sum over gamma of xi * prod(local kernel values), with the normalizer
/// raised to the number of edits in gamma.
template <BranchWeights B>
double path_sum_oracle(std::size_t n, std::size_t m, const B& branches, double xi, double normalizer = 1.0) {
  constexpr std::size_t kMaxLength = 6;
  if (n > kMaxLength || m > kMaxLength) {
    throw error(errc::too_large, "path enumeration is limited to lengths <= 6");
  }
  double total = 0.0;
  // `suffix` is the product of normalizer * scale over the edits already walked.
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double suffix) {
    if (i == 0 && j == 0) {
      total += xi * suffix;
      return;
    }
    const auto step = [&](Affine w, std::size_t pi, std::size_t pj) {
      total += normalizer * w.offset * suffix;
      walk(pi, pj, suffix * normalizer * w.scale);
    };
    if (i > 0) step(branches.deletion(i, j), i - 1, j);
    if (i > 0 && j > 0) step(branches.match(i, j), i - 1, j - 1);
    if (j > 0) step(branches.insertion(i, j), i, j - 1);
  };
  walk(n, m, 1.0);
  return total;
}

template <LocalKernel K>
double path_sum_oracle(std::size_t n, std::size_t m, const K& local_kernel, Star star, double xi,
                       double normalizer = 1.0) {
  return path_sum_oracle(n, m, StarBranches<K>{local_kernel, star}, xi, normalizer);
}

}  // namespace twk
