#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "twk/gram.hpp"
#include "twk/kernels.hpp"

namespace twk {

enum class DistanceFamily { lev, dtw, erp, twed, ed, twip1, twip2 };

inline const char* to_string(DistanceFamily f) {
  switch (f) {
    case DistanceFamily::lev: return "lev";
    case DistanceFamily::dtw: return "dtw";
    case DistanceFamily::erp: return "erp";
    case DistanceFamily::twed: return "twed";
    case DistanceFamily::ed: return "ed";
    case DistanceFamily::twip1: return "twip1";
    case DistanceFamily::twip2: return "twip2";
  }
  return "?";
}

inline DistanceFamily parse_distance_family(const std::string& s) {
  for (auto f : {DistanceFamily::lev, DistanceFamily::dtw, DistanceFamily::erp, DistanceFamily::twed,
                 DistanceFamily::ed, DistanceFamily::twip1, DistanceFamily::twip2}) {
    if (s == to_string(f)) return f;
  }
  throw error(errc::invalid_params, "unknown distance '" + s + "'");
}

struct DistanceId {
  DistanceFamily family = DistanceFamily::dtw;
  CostParams params;
  double twip_nu = 1.0;  // stiffness of the twip1/twip2 induced distances
};

inline double distance_value(const DistanceId& id, const TimeSeries& a, const TimeSeries& b) {
  switch (id.family) {
    case DistanceFamily::lev: return levenshtein(a, b, id.params.corridor);
    case DistanceFamily::dtw: return dtw(a, b, id.params);
    case DistanceFamily::erp: return erp(a, b, id.params);
    case DistanceFamily::twed: return twed(a, b, id.params);
    case DistanceFamily::ed: return euclidean(a, b);
    case DistanceFamily::twip1: return twip_distance(a, b, id.twip_nu, 1, id.params.corridor);
    case DistanceFamily::twip2: return twip_distance(a, b, id.twip_nu, 2, id.params.corridor);
  }
  return 0.0;
}

/// Either an elastic distance or a kernel.
using Measure = std::variant<DistanceId, KernelId>;

inline bool is_distance(const Measure& m) { return std::holds_alternative<DistanceId>(m); }

inline std::string measure_name(const Measure& m) {
  return std::visit([](const auto& id) { return std::string(to_string(id.family)); }, m);
}

inline nlohmann::json cost_params_json(const CostParams& p) {
  nlohmann::json j{{"norm", to_string(p.norm)}, {"boundary", to_string(p.boundary)}};
  if (!p.g.empty()) j["g"] = p.g;
  j["lambda"] = p.lambda;
  j["nu"] = p.nu;
  if (p.corridor) j["corridor"] = *p.corridor;
  return j;
}

/// Only the parameters that the family actually reads.
inline nlohmann::json measure_params_json(const Measure& m) {
  if (const auto* d = std::get_if<DistanceId>(&m)) {
    nlohmann::json j = nlohmann::json::object();
    switch (d->family) {
      case DistanceFamily::dtw: j["norm"] = to_string(d->params.norm); break;
      case DistanceFamily::erp:
        j["norm"] = to_string(d->params.norm);
        j["g"] = d->params.g.empty() ? std::vector<double>{0.0} : d->params.g;
        j["boundary"] = to_string(d->params.boundary);
        break;
      case DistanceFamily::twed:
        j["norm"] = to_string(d->params.norm);
        j["nu"] = d->params.nu;
        j["lambda"] = d->params.lambda;
        j["boundary"] = to_string(d->params.boundary);
        break;
      case DistanceFamily::twip1:
      case DistanceFamily::twip2: j["nu"] = d->twip_nu; break;
      default: break;
    }
    if (d->params.corridor) j["corridor"] = *d->params.corridor;
    return j;
  }
  const auto& k = std::get<KernelId>(m);
  nlohmann::json j = nlohmann::json::object();
  if (is_multiplicative(k.family)) {
    j["nu_prime"] = k.params.nu_prime;
    j["xi"] = k.xi();
    if (k.family != KernelFamily::stwk_lev) j["base"] = cost_params_json(k.params.base);
  } else if (k.family != KernelFamily::euclid_dot) {
    j["nu"] = k.params.nu;
  }
  if (k.params.corridor) j["corridor"] = *k.params.corridor;
  return j;
}

/// Value of a measure evaluated on one pair: the distance, or the raw kernel.
inline double measure_value(const Measure& m, const TimeSeries& a, const TimeSeries& b) {
  if (const auto* d = std::get_if<DistanceId>(&m)) return distance_value(*d, a, b);
  return kernel_value(std::get<KernelId>(m), a, b);
}

// --- Dissimilarities for the RBF wrapping ---
//
// A distance is used as is. A kernel k induces
//   d^2(a, b) = k(a,a) + k(b,b) - 2 k(a,b).
// The exponentiated STWK values span hundreds of orders of magnitude, so they
// are first cosine-normalised in log space: k~ = k(a,b) / sqrt(k(a,a) k(b,b)),
// d^2 = 2 - 2 k~.

/// Per-item self value used by the squared dissimilarity: log k(a,a) for the
/// exponentiated kernels, k(a,a) for the others, unused for distances.
inline double self_term(const Measure& m, const TimeSeries& a) {
  const auto* k = std::get_if<KernelId>(&m);
  if (!k) return 0.0;
  if (is_multiplicative(k->family)) return log_stwk_me(a, a, *k);
  return kernel_value(*k, a, a);
}

inline double squared_dissimilarity(const Measure& m, const TimeSeries& a, const TimeSeries& b, double self_a,
                                    double self_b) {
  if (const auto* d = std::get_if<DistanceId>(&m)) {
    const double v = distance_value(*d, a, b);
    return v * v;
  }
  const auto& k = std::get<KernelId>(m);
  if (is_multiplicative(k.family)) {
    const double log_cos = log_stwk_me(a, b, k) - 0.5 * (self_a + self_b);
    return std::max(0.0, 2.0 - 2.0 * std::exp(std::min(0.0, log_cos)));
  }
  return std::max(0.0, self_a + self_b - 2.0 * kernel_value(k, a, b));
}

inline double squared_dissimilarity(const Measure& m, const TimeSeries& a, const TimeSeries& b) {
  return squared_dissimilarity(m, a, b, self_term(m, a), self_term(m, b));
}

/// Value used directly as an SVM kernel: the raw kernel, except for the
/// exponentiated STWK which is cosine-normalised (see above).
inline double normalized_kernel(const Measure& m, const TimeSeries& a, const TimeSeries& b, double self_a,
                                double self_b) {
  const auto* k = std::get_if<KernelId>(&m);
  if (!k) throw error(errc::invalid_params, "direct kernel mode needs a kernel, not a distance");
  if (is_multiplicative(k->family)) return std::exp(std::min(0.0, log_stwk_me(a, b, *k) - 0.5 * (self_a + self_b)));
  return kernel_value(*k, a, b);
}

namespace detail {

inline std::vector<double> self_terms(const Measure& m, const std::vector<TimeSeries>& items, unsigned threads) {
  std::vector<double> out(items.size(), 0.0);
  if (is_distance(m)) return out;
  parallel_for(items.size(), threads, [&](std::size_t i) { out[i] = self_term(m, items[i]); });
  return out;
}

template <class F>
Matrix cross_matrix(const std::vector<TimeSeries>& rows, const std::vector<TimeSeries>& cols, unsigned threads,
                    F&& cell) {
  Matrix out(rows.size(), cols.size());
  parallel_for(rows.size() * cols.size(), threads, [&](std::size_t k) {
    const std::size_t i = k / cols.size();
    const std::size_t j = k % cols.size();
    try {
      out(i, j) = cell(i, j);
    } catch (const error& e) {
      throw error(e.code(), "items (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
    }
  });
  return out;
}

}  // namespace detail

/// Symmetric n x n matrix of squared dissimilarities.
inline Matrix squared_dissimilarity_matrix(const Measure& m, const std::vector<TimeSeries>& items,
                                           unsigned threads = 1) {
  const auto self = detail::self_terms(m, items, threads);
  std::vector<std::size_t> idx(items.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto g = build_gram(std::span<const std::size_t>(idx),
                      [&](std::size_t i, std::size_t j) {
                        return i == j ? 0.0 : squared_dissimilarity(m, items[i], items[j], self[i], self[j]);
                      },
                      {}, threads);
  return std::move(g.entries);
}

/// rows x cols matrix of squared dissimilarities (e.g. test against train).
inline Matrix squared_dissimilarity_matrix(const Measure& m, const std::vector<TimeSeries>& rows,
                                           const std::vector<TimeSeries>& cols, unsigned threads = 1) {
  const auto self_r = detail::self_terms(m, rows, threads);
  const auto self_c = detail::self_terms(m, cols, threads);
  return detail::cross_matrix(rows, cols, threads, [&](std::size_t i, std::size_t j) {
    return squared_dissimilarity(m, rows[i], cols[j], self_r[i], self_c[j]);
  });
}

inline Matrix normalized_kernel_matrix(const Measure& m, const std::vector<TimeSeries>& rows,
                                       const std::vector<TimeSeries>& cols, unsigned threads = 1) {
  const auto self_r = detail::self_terms(m, rows, threads);
  const auto self_c = detail::self_terms(m, cols, threads);
  return detail::cross_matrix(rows, cols, threads, [&](std::size_t i, std::size_t j) {
    return normalized_kernel(m, rows[i], cols[j], self_r[i], self_c[j]);
  });
}

/// rows x cols matrix of plain distances (1-NN).
inline Matrix distance_matrix(const Measure& m, const std::vector<TimeSeries>& rows,
                              const std::vector<TimeSeries>& cols, unsigned threads = 1) {
  if (const auto* d = std::get_if<DistanceId>(&m)) {
    return detail::cross_matrix(rows, cols, threads,
                                [&](std::size_t i, std::size_t j) { return distance_value(*d, rows[i], cols[j]); });
  }
  Matrix sq = squared_dissimilarity_matrix(m, rows, cols, threads);
  for (std::size_t i = 0; i < sq.rows(); ++i)
    for (std::size_t j = 0; j < sq.cols(); ++j) sq(i, j) = std::sqrt(sq(i, j));
  return sq;
}

inline Matrix distance_matrix(const Measure& m, const std::vector<TimeSeries>& items, unsigned threads = 1) {
  Matrix sq = is_distance(m) ? Matrix() : squared_dissimilarity_matrix(m, items, threads);
  if (const auto* d = std::get_if<DistanceId>(&m)) {
    std::vector<std::size_t> idx(items.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto g = build_gram(std::span<const std::size_t>(idx),
                        [&](std::size_t i, std::size_t j) { return distance_value(*d, items[i], items[j]); }, {},
                        threads);
    return std::move(g.entries);
  }
  for (std::size_t i = 0; i < sq.rows(); ++i)
    for (std::size_t j = 0; j < sq.cols(); ++j) sq(i, j) = std::sqrt(sq(i, j));
  return sq;
}

}  // namespace twk
