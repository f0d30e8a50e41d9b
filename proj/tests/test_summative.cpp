#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "twk/datasets.hpp"
#include "twk/gram.hpp"
#include "twk/kernels.hpp"

using namespace twk;
using Catch::Approx;

namespace {

struct RandomLocal {
  std::vector<double> del, mat, ins;
  double deletion(std::size_t i, std::size_t j) const { return del[i * 5 + j]; }
  double match(std::size_t i, std::size_t j) const { return mat[i * 5 + j]; }
  double insertion(std::size_t i, std::size_t j) const { return ins[i * 5 + j]; }
};

RandomLocal random_local(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.5);
  RandomLocal k{std::vector<double>(25), std::vector<double>(25), std::vector<double>(25)};
  for (auto* v : {&k.del, &k.mat, &k.ins})
    for (double& x : *v) x = u(rng);
  return k;
}

/// Forward enumeration of editing sequences: sum over gamma of xi * prod(c * k).
double multiplicative_path_sum(std::size_t n, std::size_t m, const RandomLocal& k, double xi, double c) {
  double total = 0.0;
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double w) {
    if (i == n && j == m) {
      total += xi * w;
      return;
    }
    if (i < n) walk(i + 1, j, w * c * k.deletion(i + 1, j));
    if (i < n && j < m) walk(i + 1, j + 1, w * c * k.match(i + 1, j + 1));
    if (j < m) walk(i, j + 1, w * c * k.insertion(i, j + 1));
  };
  walk(0, 0, 1.0);
  return total;
}

/// TWIP recursion written out on a full table.
double twip_table(const TimeSeries& a, const TimeSeries& b, double nu, int variant) {
  const double gap = variant == 1 ? 1.0 : std::exp(-nu);
  const double c = variant == 1 ? 1.0 / 3.0 : 1.0 / (1.0 + 2.0 * gap);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<double>> K(n + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      double s = 0.0;
      if (i > 0) s += gap * K[i - 1][j];
      if (j > 0) s += gap * K[i][j - 1];
      if (i > 0 && j > 0) {
        s += K[i - 1][j - 1] +
             std::exp(-nu * std::abs(a.time(i - 1) - b.time(j - 1))) * a.values()[i - 1] * b.values()[j - 1];
      }
      K[i][j] = c * s;
    }
  return K[n][m];
}

KernelId stwk(KernelFamily f, double nu_prime) {
  KernelId id{f, {}};
  id.params.nu_prime = nu_prime;
  id.params.base.nu = 0.1;
  id.params.base.lambda = 0.5;
  return id;
}

const KernelFamily kStwkFamilies[] = {KernelFamily::stwk_lev, KernelFamily::stwk_dtw, KernelFamily::stwk_erp,
                                      KernelFamily::stwk_twed};

}  // namespace

TEST_CASE("summative recursion boundary cases", "[summative]") {
  std::mt19937_64 rng(1);
  const auto k = random_local(rng);
  CHECK(stwk_recursion(0, 0, k, Star::multiply, 1.0, kThird) == 1.0);
  CHECK(stwk_recursion(0, 0, k, Star::add, 0.25, kThird) == 0.25);
  CHECK(stwk_recursion(1, 0, k, Star::multiply, 1.0, kThird) == Approx(kThird * k.deletion(1, 0)).epsilon(1e-15));
  CHECK(stwk_recursion(0, 1, k, Star::add, 0.0, kThird) == Approx(kThird * k.insertion(0, 1)).epsilon(1e-15));
  CHECK(path_sum_oracle(0, 0, k, Star::add, 0.5) == 0.5);
  CHECK(path_sum_oracle(3, 0, k, Star::multiply, 1.0) ==
        Approx(k.deletion(1, 0) * k.deletion(2, 0) * k.deletion(3, 0)).epsilon(1e-14));
  CHECK_THROWS_AS(path_sum_oracle(7, 1, k, Star::add, 0.0), error);
}

TEST_CASE("recursion equals path enumeration", "[summative][oracle]") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto k = random_local(rng);
    for (std::size_t p = 0; p <= 4; ++p)
      for (std::size_t q = 0; q <= 4; ++q) {
        for (Star star : {Star::multiply, Star::add}) {
          const double xi = star == Star::multiply ? 1.0 : 0.3;
          const double r = stwk_recursion(p, q, k, star, xi, kThird);
          CHECK(r == Approx(path_sum_oracle(p, q, k, star, xi, kThird)).epsilon(1e-12));
        }
        // The classical form of the multiplicative case, enumerated forwards.
        CHECK(stwk_recursion(p, q, k, Star::multiply, 1.0, kThird) ==
              Approx(multiplicative_path_sum(p, q, k, 1.0, kThird)).epsilon(1e-12));
      }
  }
}

TEST_CASE("TWIP branches match the enumeration", "[summative][oracle]") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = oracle::random_series(rng, oracle::random_length(rng, 0, 4));
    const auto b = oracle::random_series(rng, oracle::random_length(rng, 0, 4));
    for (double nu : {0.0, 0.1, 2.0}) {
      const double gap = std::exp(-nu);
      const TwipBranches br{a, b, nu, gap};
      const double c = 1.0 / (1.0 + 2.0 * gap);
      CHECK(summative_recursion(a.size(), b.size(), br, 0.0, c) ==
            Approx(path_sum_oracle(a.size(), b.size(), br, 0.0, c)).margin(1e-13));
      CHECK(twip2(a, b, nu) == Approx(twip_table(a, b, nu, 2)).margin(1e-13));
      CHECK(twip1(a, b, nu) == Approx(twip_table(a, b, nu, 1)).margin(1e-13));
    }
  }
}

TEST_CASE("exponentiated STWK basics", "[summative][stwk]") {
  for (KernelFamily f : kStwkFamilies) {
    INFO(to_string(f));
    const auto id = stwk(f, 1.0);
    CHECK(stwk_me(TimeSeries(), TimeSeries(), id) == 1.0);
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 100; ++trial) {
      const auto a = oracle::random_series(rng, oracle::random_length(rng, 1, 8));
      const auto b = oracle::random_series(rng, oracle::random_length(rng, 1, 8));
      const double ab = stwk_me(a, b, id);
      CHECK(ab > 0.0);
      CHECK(ab == Approx(stwk_me(b, a, id)).epsilon(1e-12));
    }
  }
  CHECK(stwk_lev(std::string(), std::string(), 1.0) == 1.0);
  CHECK(stwk_lev(std::string("ab"), std::string("ba"), 0.5) == stwk_lev(std::string("ba"), std::string("ab"), 0.5));

  KernelId bad = stwk(KernelFamily::stwk_dtw, 0.0);
  CHECK_THROWS_AS(stwk_me(TimeSeries::univariate({1.0}), TimeSeries::univariate({1.0}), bad), error);
  bad = stwk(KernelFamily::stwk_dtw, 1.0);
  bad.params.xi = 0.0;
  CHECK_THROWS_AS(stwk_me(TimeSeries::univariate({1.0}), TimeSeries::univariate({1.0}), bad), error);
}

TEST_CASE("exponentiated STWK Gram matrices are PSD", "[summative][stwk][property]") {
  std::mt19937_64 rng(41);
  for (KernelFamily f : kStwkFamilies) {
    INFO(to_string(f));
    for (double nu_prime : {0.1, 1.0, 10.0}) {
      std::vector<TimeSeries> items;
      for (int i = 0; i < 10; ++i) items.push_back(oracle::random_series(rng, oracle::random_length(rng, 1, 8)));
      const auto id = stwk(f, nu_prime);
      const auto g = build_gram(items, [&](const TimeSeries& a, const TimeSeries& b) { return stwk_me(a, b, id); });
      const auto r = definiteness_report(g);
      CHECK(r.min_eigenvalue() >= -1e-9 * g.entries.max_abs());
    }
  }
}

TEST_CASE("log domain agrees with the direct recursion", "[summative][stwk]") {
  std::mt19937_64 rng(42);
  for (KernelFamily f : kStwkFamilies) {
    const auto id = stwk(f, 0.7);
    auto log_id = id;
    log_id.params.log_domain = true;
    for (int trial = 0; trial < 40; ++trial) {
      const auto a = oracle::random_series(rng, oracle::random_length(rng, 1, 10));
      const auto b = oracle::random_series(rng, oracle::random_length(rng, 1, 10));
      const double direct = stwk_me(a, b, id);
      CHECK(std::exp(log_stwk_me(a, b, id)) == Approx(direct).epsilon(1e-12));
      CHECK(stwk_me(a, b, log_id) == Approx(direct).epsilon(1e-12));
    }
  }

  SECTION("long series underflow directly but not in log space") {
    const auto a = oracle::random_series(rng, 2000);
    const auto b = oracle::random_series(rng, 2000);
    const auto id = stwk(KernelFamily::stwk_dtw, 1.0);
    CHECK(stwk_me(a, b, id) == 0.0);
    const double l = log_stwk_me(a, b, id);
    CHECK(std::isfinite(l));
    CHECK(l < -700.0);
  }
}

TEST_CASE("larger stiffness concentrates on the best path", "[summative][stwk][property]") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_series(rng, oracle::random_length(rng, 1, 6));
    const auto b = oracle::random_series(rng, oracle::random_length(rng, 1, 6));
    const double best = dtw(a, b);
    double prev = std::numeric_limits<double>::infinity();
    for (double nu_prime : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 1e4}) {
      const double f = -log_stwk_me(a, b, stwk(KernelFamily::stwk_dtw, nu_prime)) / nu_prime;
      CHECK(f <= prev * (1.0 + 1e-12));
      CHECK(f >= best - 1e-9);
      prev = f;
    }
    CHECK(prev == Approx(best).margin(0.02));
  }
}

TEST_CASE("kernel corridor consistency", "[summative][stwk]") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = oracle::random_length(rng, 1, 8);
    const std::size_t m = oracle::random_length(rng, 1, 8);
    const auto a = oracle::random_series(rng, n);
    const auto b = oracle::random_series(rng, m);
    for (KernelFamily f : kStwkFamilies) {
      auto id = stwk(f, 0.5);
      const double free = stwk_me(a, b, id);
      id.params.corridor = std::max(n, m);
      CHECK(stwk_me(a, b, id) == free);
    }
    CHECK(twip2(a, b, 0.3, std::max(n, m)) == twip2(a, b, 0.3));
  }
}

TEST_CASE("TWIP inner products", "[summative][twip]") {
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto [fa, fb] = shifted_pulse_pair();
  CHECK(twip1(fa, zeros_like(fb), 0.1) == 0.0);
  CHECK(twip2(fa, zeros_like(fb), 0.1) == 0.0);

  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = oracle::random_length(rng, 1, 10);
    const auto a = oracle::random_series(rng, len);
    const auto b = oracle::random_series(rng, len);
    const auto c = oracle::random_series(rng, oracle::random_length(rng, 1, 10));
    const double alpha = u(rng);
    for (int variant : {1, 2}) {
      const double nu = 0.3;
      CHECK(twip(a, c, nu, variant) == Approx(twip(c, a, nu, variant)).margin(1e-12));
      CHECK(twip(add(scale(alpha, a), b), c, nu, variant) ==
            Approx(alpha * twip(a, c, nu, variant) + twip(b, c, nu, variant)).margin(1e-9));
    }
  }

  SECTION("euclidean limit") {
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t len = oracle::random_length(rng, 1, 20);
      const auto a = oracle::random_series(rng, len);
      const auto b = oracle::random_series(rng, len);
      CHECK(std::abs(twip2(a, b, 100.0) - euclid_dot(a, b)) <= 1e-6);
      CHECK(std::abs(twip_distance(a, b, 100.0, 2) - euclidean(a, b)) <= 1e-6);
    }
  }

  SECTION("induced distance") {
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t len = oracle::random_length(rng, 1, 10);
      const auto a = oracle::random_series(rng, len);
      const auto b = oracle::random_series(rng, len);
      const auto c = oracle::random_series(rng, len);
      for (int variant : {1, 2}) {
        CHECK(twip_distance(a, a, 0.5, variant) == 0.0);
        CHECK(twip_distance(a, c, 0.5, variant) <=
              twip_distance(a, b, 0.5, variant) + twip_distance(b, c, 0.5, variant) + 1e-9);
      }
    }
    CHECK_THROWS_AS(twip_distance(fa, TimeSeries::univariate({1.0}), 0.5, 2), error);
  }

  SECTION("Gram matrices are PSD, also across lengths") {
    for (int variant : {1, 2}) {
      for (double nu : {1e-3, 0.1, 10.0}) {
        std::vector<TimeSeries> items;
        for (int i = 0; i < 12; ++i) items.push_back(oracle::random_series(rng, oracle::random_length(rng, 1, 12)));
        const auto g = build_gram(items, [&](const TimeSeries& a, const TimeSeries& b) { return twip(a, b, nu, variant); });
        CHECK(definiteness_report(g).min_eigenvalue() >= -1e-9 * g.entries.max_abs());
      }
    }
  }

  CHECK_THROWS_AS(twip(fa, fb, -1.0, 1), error);
  CHECK_THROWS_AS(twip(fa, fb, 1.0, 3), error);
}

TEST_CASE("kernel_value dispatch", "[summative]") {
  const auto [fa, fb] = shifted_pulse_pair();
  KernelId id{KernelFamily::euclid_dot, {}};
  CHECK(kernel_value(id, fa, fb) == 0.0);
  id.family = KernelFamily::twip2;
  id.params.nu = 0.1;
  CHECK(kernel_value(id, fa, fb) == twip2(fa, fb, 0.1));
  id.params.xi = 1.0;
  CHECK_THROWS_AS(kernel_value(id, fa, fb), error);
  CHECK(parse_kernel_family("stwk_erp") == KernelFamily::stwk_erp);
  CHECK_THROWS_AS(parse_kernel_family("rbf"), error);
}
