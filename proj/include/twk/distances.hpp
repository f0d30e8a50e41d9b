#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "twk/edit_dp.hpp"
#include "twk/timeseries.hpp"

namespace twk {

/// How the DP treats row/column 0.
///  - anchored: the first samples of both series are always matched; gap costs
///    against the empty prefix are +inf. Reproduces the published ERP/TWED
///    counter-example matrices.
///  - open: row/column 0 accumulate gap costs from the empty series.
enum class Boundary { anchored, open };

inline Boundary parse_boundary(const std::string& s) {
  if (s == "anchored") return Boundary::anchored;
  if (s == "open") return Boundary::open;
  throw error(errc::invalid_params, "unknown boundary '" + s + "'");
}

inline const char* to_string(Boundary b) { return b == Boundary::anchored ? "anchored" : "open"; }

struct CostParams {
  Norm norm = Norm::l1;
  std::vector<double> g;  // ERP gap value; empty means the zero vector
  double lambda = 0.0;    // TWED gap penalty
  double nu = 0.0;        // TWED stiffness
  Corridor corridor;
  Boundary boundary = Boundary::anchored;

  void validate() const {
    if (!(lambda >= 0.0)) throw error(errc::invalid_params, "lambda must be >= 0");
    if (!(nu >= 0.0)) throw error(errc::invalid_params, "nu must be >= 0");
    if (corridor && *corridor == 0) throw error(errc::invalid_params, "corridor halfwidth must be >= 1");
  }
};

// --- Cost policies. They are shared with the exponentiated kernels. ---

/// Unit insert/delete, 0/1 substitution.
template <class Seq>
struct LevenshteinCosts {
  const Seq& a;
  const Seq& b;

  double deletion(std::size_t, std::size_t) const { return 1.0; }
  double insertion(std::size_t, std::size_t) const { return 1.0; }
  double match(std::size_t i, std::size_t j) const { return a[i - 1] == b[j - 1] ? 0.0 : 1.0; }
};

/// Value-equality Levenshtein over time series (timestamps ignored).
struct SeriesLevenshteinCosts {
  const TimeSeries& a;
  const TimeSeries& b;

  double deletion(std::size_t, std::size_t) const { return 1.0; }
  double insertion(std::size_t, std::size_t) const { return 1.0; }
  double match(std::size_t i, std::size_t j) const {
    auto x = a.value(i - 1);
    auto y = b.value(j - 1);
    return std::equal(x.begin(), x.end(), y.begin(), y.end()) ? 0.0 : 1.0;
  }
};

/// All three operations cost d(a_i, b_j); nothing aligns against the empty prefix.
struct DtwCosts {
  const TimeSeries& a;
  const TimeSeries& b;
  Norm norm;

  double local(std::size_t i, std::size_t j) const {
    if (i == 0 || j == 0) return kInf;
    return lp_norm_dist(a.value(i - 1), b.value(j - 1), norm);
  }
  double deletion(std::size_t i, std::size_t j) const { return local(i, j); }
  double match(std::size_t i, std::size_t j) const { return local(i, j); }
  double insertion(std::size_t i, std::size_t j) const { return local(i, j); }
};

struct ErpCosts {
  const TimeSeries& a;
  const TimeSeries& b;
  std::span<const double> g;
  Norm norm;
  Boundary boundary;

  double deletion(std::size_t i, std::size_t j) const {
    if (boundary == Boundary::anchored && j == 0) return kInf;
    return lp_norm_dist(a.value(i - 1), g, norm);
  }
  double insertion(std::size_t i, std::size_t j) const {
    if (boundary == Boundary::anchored && i == 0) return kInf;
    return lp_norm_dist(g, b.value(j - 1), norm);
  }
  double match(std::size_t i, std::size_t j) const {
    return lp_norm_dist(a.value(i - 1), b.value(j - 1), norm);
  }
};

/// TWED costs. Sample 0 of either series is the virtual (zero vector, t = 0).
struct TwedCosts {
  const TimeSeries& a;
  const TimeSeries& b;
  Norm norm;
  double lambda;
  double nu;
  Boundary boundary;
  std::vector<double> zero = std::vector<double>(a.empty() ? b.dim() : a.dim(), 0.0);

  std::span<const double> av(std::size_t i) const { return i == 0 ? std::span<const double>(zero) : a.value(i - 1); }
  std::span<const double> bv(std::size_t j) const { return j == 0 ? std::span<const double>(zero) : b.value(j - 1); }
  double at(std::size_t i) const { return i == 0 ? 0.0 : a.time(i - 1); }
  double bt(std::size_t j) const { return j == 0 ? 0.0 : b.time(j - 1); }

  // d(X, Y) = d_LP(x, y) + nu * |t_x - t_y|
  double sample_dist(std::span<const double> x, double tx, std::span<const double> y, double ty) const {
    return lp_norm_dist(x, y, norm) + nu * std::abs(tx - ty);
  }

  double deletion(std::size_t i, std::size_t j) const {
    if (boundary == Boundary::anchored && j == 0) return kInf;
    return sample_dist(av(i), at(i), av(i - 1), at(i - 1)) + lambda;
  }
  double insertion(std::size_t i, std::size_t j) const {
    if (boundary == Boundary::anchored && i == 0) return kInf;
    return sample_dist(bv(j), bt(j), bv(j - 1), bt(j - 1)) + lambda;
  }
  double match(std::size_t i, std::size_t j) const {
    return sample_dist(av(i), at(i), bv(j), bt(j)) + sample_dist(av(i - 1), at(i - 1), bv(j - 1), bt(j - 1));
  }
};

namespace detail {

inline void require_nonempty(const TimeSeries& a, const TimeSeries& b, const char* who) {
  if (a.empty() || b.empty()) throw error(errc::empty_series, std::string(who) + " requires non-empty series");
}

inline void require_same_dim(const TimeSeries& a, const TimeSeries& b) {
  if (!a.empty() && !b.empty() && a.dim() != b.dim()) {
    throw error(errc::dimension_mismatch, "series have sample dimensions " + std::to_string(a.dim()) + " and " +
                                              std::to_string(b.dim()));
  }
}

inline std::vector<double> gap_value(const CostParams& p, std::size_t dim) {
  if (p.g.empty()) return std::vector<double>(dim, 0.0);
  if (p.g.size() == 1 && dim > 1) return std::vector<double>(dim, p.g[0]);
  if (p.g.size() != dim) throw error(errc::dimension_mismatch, "ERP g has the wrong dimension");
  return p.g;
}

inline std::size_t series_dim(const TimeSeries& a, const TimeSeries& b) { return a.empty() ? b.dim() : a.dim(); }

}  // namespace detail

// --- Distances ---

template <class Seq>
double levenshtein(const Seq& a, const Seq& b, const Corridor& corridor = {}) {
  return edit_distance_dp(a.size(), b.size(), LevenshteinCosts<Seq>{a, b}, corridor);
}

inline double levenshtein(const TimeSeries& a, const TimeSeries& b, const Corridor& corridor = {}) {
  detail::require_same_dim(a, b);
  return edit_distance_dp(a.size(), b.size(), SeriesLevenshteinCosts{a, b}, corridor);
}

/// DTW; timestamps are ignored.
inline double dtw(const TimeSeries& a, const TimeSeries& b, const CostParams& params = {}) {
  params.validate();
  detail::require_nonempty(a, b, "dtw");
  detail::require_same_dim(a, b);
  return edit_distance_dp(a.size(), b.size(), DtwCosts{a, b, params.norm}, params.corridor);
}

/// ERP; timestamps are ignored. With an empty argument the all-gap path is the
/// only editing sequence regardless of the boundary convention.
inline double erp(const TimeSeries& a, const TimeSeries& b, const CostParams& params = {}) {
  params.validate();
  detail::require_same_dim(a, b);
  const auto g = detail::gap_value(params, detail::series_dim(a, b));
  const Boundary boundary = (a.empty() || b.empty()) ? Boundary::open : params.boundary;
  return edit_distance_dp(a.size(), b.size(), ErpCosts{a, b, g, params.norm, boundary}, params.corridor);
}

inline double twed(const TimeSeries& a, const TimeSeries& b, const CostParams& params = {}) {
  params.validate();
  detail::require_nonempty(a, b, "twed");
  detail::require_same_dim(a, b);
  return edit_distance_dp(a.size(), b.size(), TwedCosts{a, b, params.norm, params.lambda, params.nu, params.boundary},
                          params.corridor);
}

/// Lock-step Euclidean distance (the nu -> infinity limit of the TWIP2 distance).
inline double euclidean(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size()) throw error(errc::length_mismatch, "euclidean distance needs equal lengths");
  detail::require_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) {
    const double d = a.values()[k] - b.values()[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace twk
