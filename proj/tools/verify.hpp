#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twk/twk.hpp"

namespace twk::cli {

struct CheckResult {
  bool pass = false;
  std::string expected;
  std::string actual;
};

struct Check {
  std::string group;
  std::string name;
  std::function<CheckResult()> run;
};

inline std::string num(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

inline CheckResult near(double actual, double expected, double tol) {
  return {std::abs(actual - expected) <= tol, num(expected) + " +- " + num(tol), num(actual)};
}

inline CheckResult exact_matrix(const Matrix& actual, const Matrix& expected) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < expected.rows(); ++i)
    for (std::size_t j = 0; j < expected.cols(); ++j) bad += actual(i, j) != expected(i, j) ? 1 : 0;
  const std::size_t n = expected.rows() * expected.cols();
  return {bad == 0 && actual.rows() == expected.rows(), std::to_string(n) + " equal entries",
          std::to_string(n - bad) + " equal entries"};
}

template <class Item, class F>
Matrix gram_of(const std::vector<Item>& items, F&& f) {
  return build_gram(items, std::forward<F>(f)).entries;
}

inline Matrix fixture_twed() {
  CostParams p;
  p.nu = 1.0;
  p.lambda = 0.0;
  return gram_of(counterexample_fixtures().short_series, [&](const TimeSeries& a, const TimeSeries& b) { return twed(a, b, p); });
}

inline Matrix fixture_erp() {
  CostParams p;
  p.g = {0.0};
  return gram_of(counterexample_fixtures().short_series, [&](const TimeSeries& a, const TimeSeries& b) { return erp(a, b, p); });
}

inline Matrix fixture_dtw(Norm norm) {
  CostParams p;
  p.norm = norm;
  return gram_of(counterexample_fixtures().dtw_series, [&](const TimeSeries& a, const TimeSeries& b) { return dtw(a, b, p); });
}

inline CheckResult spectrum_matches(const Matrix& m, std::vector<double> published) {
  std::sort(published.begin(), published.end(), std::greater<>());
  const auto got = definiteness_report(m).normalized_eigenvalues();
  double worst = 0.0;
  for (std::size_t k = 0; k < published.size(); ++k) worst = std::max(worst, std::abs(got[k] - published[k]));
  return {worst <= 0.006, "published spectrum within 0.006", "max deviation " + num(worst)};
}

inline std::vector<Check> all_checks() {
  std::vector<Check> c;
  const auto lev_matrix = [] {
    return gram_of(counterexample_fixtures().lev_strings,
                   [](const std::string& a, const std::string& b) { return levenshtein(a, b); });
  };

  c.push_back({"fixtures", "M_lev entries", [&] { return exact_matrix(lev_matrix(), published_m_lev()); }});
  c.push_back({"fixtures", "M_lev C form = 2/3", [&] {
                 const std::vector<double> v{1, 1, -2.0 / 3, -2.0 / 3, -2.0 / 3};
                 return near(quadratic_form(lev_matrix(), v), 2.0 / 3, 1e-12);
               }});
  c.push_back({"fixtures", "M_lev D form = -4/3", [&] {
                 const std::vector<double> v{1.0 / 3, 2.0 / 3, 1.0 / 3, -2.0 / 3, -2.0 / 3};
                 return near(quadratic_form(lev_matrix(), v), -4.0 / 3, 1e-12);
               }});
  c.push_back({"fixtures", "M_erp entries", [] { return exact_matrix(fixture_erp(), published_m_erp()); }});
  c.push_back({"fixtures", "M_erp #Pev in {2,3}", [] {
                 const auto r = definiteness_report(fixture_erp());
                 const bool third_small = r.pev_count < 3 || r.eigenvalues[2] < 1e-12 * r.scale;
                 return CheckResult{(r.pev_count == 2 || r.pev_count == 3) && third_small, "2 or 3",
                                    std::to_string(r.pev_count)};
               }});
  c.push_back({"fixtures", "M_erp normalised spectrum",
               [] { return spectrum_matches(fixture_erp(), published_erp_spectrum()); }});
  c.push_back({"fixtures", "M_twed entries", [] { return exact_matrix(fixture_twed(), published_m_twed()); }});
  c.push_back({"fixtures", "M_twed #Pev = 2", [] {
                 const auto r = definiteness_report(fixture_twed());
                 return CheckResult{r.pev_count == 2, "2", std::to_string(r.pev_count)};
               }});
  c.push_back({"fixtures", "M_twed normalised spectrum",
               [] { return spectrum_matches(fixture_twed(), published_twed_spectrum()); }});
  c.push_back({"fixtures", "M_dtw (printed) C form = 2/32", [] {
                 const std::vector<double> v{0.25, -0.375, -0.125, 0.25};
                 return near(quadratic_form(published_m_dtw(), v), 2.0 / 32, 1e-12);
               }});
  c.push_back({"fixtures", "M_dtw (printed) D form = -1/2", [] {
                 const std::vector<double> v{-0.25, -0.25, 0.25, 0.25};
                 return near(quadratic_form(published_m_dtw(), v), -0.5, 1e-12);
               }});
  c.push_back({"fixtures", "DTW (squared L2) zero-sum witness", [] {
                 const auto w = indefiniteness_witness_search(fixture_dtw(Norm::l2_squared), 10000);
                 return CheckResult{w.has_value(), "witness pair",
                                    w ? "forms " + num(w->positive_form) + " / " + num(w->negative_form) : "none"};
               }});

  const auto [fa, fb] = shifted_pulse_pair();
  c.push_back({"pulses", "twip1(A,B,nu=0.1) = .459", [=] { return near(twip1(fa, fb, 0.1), 0.459, 1e-3); }});
  c.push_back({"pulses", "twip2(A,B,nu=0.1) = .475", [=] { return near(twip2(fa, fb, 0.1), 0.475, 1e-3); }});
  c.push_back({"pulses", "twip1(A,B,nu=100) ~ 0", [=] { return near(twip1(fa, fb, 100.0), 0.0, 1e-6); }});
  c.push_back({"pulses", "twip2(A,B,nu=100) ~ 0", [=] { return near(twip2(fa, fb, 100.0), 0.0, 1e-6); }});
  c.push_back({"pulses", "<A,B> = 0", [=] { return near(euclid_dot(fa, fb), 0.0, 0.0); }});

  c.push_back({"oracle", "recursion = path enumeration (p,q <= 4)", [] {
                 std::mt19937_64 rng(7);
                 std::uniform_real_distribution<double> u(0.05, 1.0);
                 struct Table {
                   std::vector<double> del, mat, ins;
                   std::size_t w;
                   double deletion(std::size_t i, std::size_t j) const { return del[i * w + j]; }
                   double match(std::size_t i, std::size_t j) const { return mat[i * w + j]; }
                   double insertion(std::size_t i, std::size_t j) const { return ins[i * w + j]; }
                 };
                 double worst = 0.0;
                 for (int trial = 0; trial < 50; ++trial) {
                   Table t{std::vector<double>(25), std::vector<double>(25), std::vector<double>(25), 5};
                   for (auto* v : {&t.del, &t.mat, &t.ins})
                     for (double& x : *v) x = u(rng);
                   for (Star star : {Star::multiply, Star::add})
                     for (std::size_t p = 0; p <= 4; ++p)
                       for (std::size_t q = 0; q <= 4; ++q) {
                         const double xi = star == Star::multiply ? 1.0 : 0.0;
                         const double r = stwk_recursion(p, q, t, star, xi, kThird);
                         const double o = path_sum_oracle(p, q, t, star, xi, kThird);
                         if (r != o) worst = std::max(worst, std::abs(r - o) / std::max(std::abs(o), 1e-300));
                       }
                 }
                 return CheckResult{worst <= 1e-12, "relative error <= 1e-12", num(worst)};
               }});
  c.push_back({"oracle", "log-domain = direct STWK", [] {
                 const auto f = counterexample_fixtures();
                 KernelId id{KernelFamily::stwk_twed, {}};
                 id.params.base.nu = 0.5;
                 double worst = 0.0;
                 for (const auto& a : f.short_series)
                   for (const auto& b : f.dtw_series) {
                     const double d = stwk_me(a, b, id);
                     worst = std::max(worst, std::abs(std::exp(log_stwk_me(a, b, id)) - d) / d);
                   }
                 return CheckResult{worst <= 1e-12, "relative error <= 1e-12", num(worst)};
               }});

  c.push_back({"delta-p", "{3,1,-4} -> 25%", [] {
                 return near(spectrum_report({3, 1, -4}, 0.0).delta_p, 25.0, 0.0);
               }});
  c.push_back({"delta-p", "single positive eigenvalue -> 0%", [] {
                 return near(spectrum_report({5, -1, -2}, 0.0).delta_p, 0.0, 0.0);
               }});
  return c;
}

}  // namespace twk::cli
