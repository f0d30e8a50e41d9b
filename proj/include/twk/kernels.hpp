#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "twk/distances.hpp"
#include "twk/summative.hpp"

namespace twk {

enum class KernelFamily { stwk_lev, stwk_dtw, stwk_erp, stwk_twed, twip1, twip2, euclid_dot };

inline const char* to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::stwk_lev: return "stwk_lev";
    case KernelFamily::stwk_dtw: return "stwk_dtw";
    case KernelFamily::stwk_erp: return "stwk_erp";
    case KernelFamily::stwk_twed: return "stwk_twed";
    case KernelFamily::twip1: return "twip1";
    case KernelFamily::twip2: return "twip2";
    case KernelFamily::euclid_dot: return "euclid_dot";
  }
  return "?";
}

inline KernelFamily parse_kernel_family(const std::string& s) {
  for (auto f : {KernelFamily::stwk_lev, KernelFamily::stwk_dtw, KernelFamily::stwk_erp, KernelFamily::stwk_twed,
                 KernelFamily::twip1, KernelFamily::twip2, KernelFamily::euclid_dot}) {
    if (s == to_string(f)) return f;
  }
  throw error(errc::invalid_params, "unknown kernel family '" + s + "'");
}

inline bool is_multiplicative(KernelFamily f) {
  return f == KernelFamily::stwk_lev || f == KernelFamily::stwk_dtw || f == KernelFamily::stwk_erp ||
         f == KernelFamily::stwk_twed;
}

struct KernelParams {
  double nu_prime = 1.0;     // stiffness of the exponentiated local kernels
  double nu = 0.0;           // TWIP stiffness
  std::optional<double> xi;  // <Omega, Omega>; defaults to 1 (multiplicative) or 0 (additive)
  CostParams base;           // costs of the underlying elastic distance
  Corridor corridor;
  bool log_domain = false;   // evaluate the multiplicative recursion in log space
};

struct KernelId {
  KernelFamily family = KernelFamily::stwk_dtw;
  KernelParams params;

  double xi() const { return params.xi.value_or(is_multiplicative(family) ? 1.0 : 0.0); }

  void validate() const {
    params.base.validate();
    if (params.corridor && *params.corridor == 0) throw error(errc::invalid_params, "corridor halfwidth must be >= 1");
    if (is_multiplicative(family)) {
      if (!(params.nu_prime > 0.0)) throw error(errc::invalid_params, "nu' must be > 0");
      if (!(xi() > 0.0)) throw error(errc::invalid_params, "multiplicative kernels need xi > 0");
    } else if (family != KernelFamily::euclid_dot) {
      if (!(params.nu >= 0.0)) throw error(errc::invalid_params, "TWIP nu must be >= 0");
      if (xi() != 0.0) throw error(errc::invalid_params, "TWIP requires xi = 0");
    }
  }
};

/// exp(-nu' * cost) for each operation of an edit-cost policy.
template <EditCosts Costs>
struct ExponentiatedCosts {
  const Costs& costs;
  double nu_prime;

  static double expo(double nu_prime, double c) { return c == kInf ? 0.0 : std::exp(-nu_prime * c); }
  double deletion(std::size_t i, std::size_t j) const { return expo(nu_prime, costs.deletion(i, j)); }
  double match(std::size_t i, std::size_t j) const { return expo(nu_prime, costs.match(i, j)); }
  double insertion(std::size_t i, std::size_t j) const { return expo(nu_prime, costs.insertion(i, j)); }
};

inline constexpr double kThird = 1.0 / 3.0;

namespace detail {

template <EditCosts Costs>
double exponentiated(std::size_t n, std::size_t m, const Costs& costs, const KernelId& id, bool log_result) {
  const auto& p = id.params;
  const Corridor corridor = p.corridor ? p.corridor : p.base.corridor;
  if (p.log_domain || log_result) {
    const double lv = log_exponentiated_recursion(n, m, costs, p.nu_prime, id.xi(), kThird, corridor);
    return log_result ? lv : std::exp(lv);
  }
  const double v =
      stwk_recursion(n, m, ExponentiatedCosts<Costs>{costs, p.nu_prime}, Star::multiply, id.xi(), kThird, corridor);
  return log_result ? std::log(v) : v;
}

template <class F>
double dispatch_series_costs(const TimeSeries& a, const TimeSeries& b, const KernelId& id, F&& run) {
  const auto& base = id.params.base;
  require_same_dim(a, b);
  switch (id.family) {
    case KernelFamily::stwk_lev: return run(SeriesLevenshteinCosts{a, b});
    case KernelFamily::stwk_dtw: return run(DtwCosts{a, b, base.norm});
    case KernelFamily::stwk_erp: {
      const auto g = gap_value(base, series_dim(a, b));
      const Boundary boundary = (a.empty() || b.empty()) ? Boundary::open : base.boundary;
      return run(ErpCosts{a, b, g, base.norm, boundary});
    }
    case KernelFamily::stwk_twed:
      return run(TwedCosts{a, b, base.norm, base.lambda, base.nu, base.boundary});
    default: break;
  }
  throw error(errc::invalid_params, std::string("not a multiplicative family: ") + to_string(id.family));
}

}  // namespace detail

/// Multiplicative exponentiated STWK:
///   K(i,j) = 1/3 * [ K(i-1,j) e^{-nu' G_del} + K(i-1,j-1) e^{-nu' G_match} + K(i,j-1) e^{-nu' G_ins} ],
/// K(0,0) = xi, with G the costs of the family's elastic distance.
inline double stwk_me(const TimeSeries& a, const TimeSeries& b, const KernelId& id) {
  id.validate();
  return detail::dispatch_series_costs(a, b, id, [&](const auto& costs) {
    return detail::exponentiated(a.size(), b.size(), costs, id, false);
  });
}

/// log of stwk_me, always computed in log space.
inline double log_stwk_me(const TimeSeries& a, const TimeSeries& b, const KernelId& id) {
  id.validate();
  return detail::dispatch_series_costs(a, b, id, [&](const auto& costs) {
    return detail::exponentiated(a.size(), b.size(), costs, id, true);
  });
}

/// STWK over symbol strings with Levenshtein costs.
template <class Seq>
double stwk_lev(const Seq& a, const Seq& b, double nu_prime, double xi = 1.0, const Corridor& corridor = {}) {
  if (!(nu_prime > 0.0) || !(xi > 0.0)) throw error(errc::invalid_params, "stwk_lev needs nu' > 0 and xi > 0");
  LevenshteinCosts<Seq> costs{a, b};
  return stwk_recursion(a.size(), b.size(), ExponentiatedCosts<LevenshteinCosts<Seq>>{costs, nu_prime},
                        Star::multiply, xi, kThird, corridor);
}

/// Branch weights of the time-warp inner products. Gaps carry no additive
/// term; they are scaled by `gap_weight` (1 for TWIP1, e^{-nu} for TWIP2).
/// A match adds e^{-nu |t_a - t_b|} * <a(i), b(j)>.
struct TwipBranches {
  const TimeSeries& a;
  const TimeSeries& b;
  double nu;
  double gap_weight;

  Affine deletion(std::size_t, std::size_t) const { return {gap_weight, 0.0}; }
  Affine insertion(std::size_t, std::size_t) const { return {gap_weight, 0.0}; }
  Affine match(std::size_t i, std::size_t j) const {
    auto x = a.value(i - 1);
    auto y = b.value(j - 1);
    double dot = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dot += x[k] * y[k];
    if (dot == 0.0) return {1.0, 0.0};
    return {1.0, std::exp(-nu * std::abs(a.time(i - 1) - b.time(j - 1))) * dot};
  }
};

inline double twip(const TimeSeries& a, const TimeSeries& b, double nu, int variant, const Corridor& corridor = {}) {
  if (!(nu >= 0.0)) throw error(errc::invalid_params, "TWIP nu must be >= 0");
  if (variant != 1 && variant != 2) throw error(errc::invalid_params, "TWIP variant must be 1 or 2");
  detail::require_same_dim(a, b);
  const double gap = variant == 1 ? 1.0 : std::exp(-nu);
  const double normalizer = variant == 1 ? kThird : 1.0 / (1.0 + 2.0 * gap);
  return summative_recursion(a.size(), b.size(), TwipBranches{a, b, nu, gap}, 0.0, normalizer, corridor);
}

inline double twip1(const TimeSeries& a, const TimeSeries& b, double nu, const Corridor& corridor = {}) {
  return twip(a, b, nu, 1, corridor);
}

inline double twip2(const TimeSeries& a, const TimeSeries& b, double nu, const Corridor& corridor = {}) {
  return twip(a, b, nu, 2, corridor);
}

/// Norm of A (+) (-1 (x) B) induced by a TWIP; defined on a shared timestamp grid.
inline double twip_distance(const TimeSeries& a, const TimeSeries& b, double nu, int variant,
                            const Corridor& corridor = {}) {
  const TimeSeries diff = add(a, scale(-1.0, b));
  const double sq = twip(diff, diff, nu, variant, corridor);
  return std::sqrt(std::max(0.0, sq));
}

/// Lock-step dot product (the K_ed baseline).
inline double euclid_dot(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size()) throw error(errc::length_mismatch, "euclid_dot needs equal lengths");
  detail::require_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values().size(); ++k) acc += a.values()[k] * b.values()[k];
  return acc;
}

/// Raw kernel value for any family.
inline double kernel_value(const KernelId& id, const TimeSeries& a, const TimeSeries& b) {
  id.validate();
  const Corridor corridor = id.params.corridor ? id.params.corridor : id.params.base.corridor;
  switch (id.family) {
    case KernelFamily::twip1: return twip1(a, b, id.params.nu, corridor);
    case KernelFamily::twip2: return twip2(a, b, id.params.nu, corridor);
    case KernelFamily::euclid_dot: return euclid_dot(a, b);
    default: return stwk_me(a, b, id);
  }
}

}  // namespace twk
