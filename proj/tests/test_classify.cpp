#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "twk/classify.hpp"
#include "twk/datasets.hpp"

using namespace twk;
using Catch::Approx;

namespace {

Matrix linear_kernel(const std::vector<std::vector<double>>& x) {
  Matrix k(x.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) k(i, j) = std::inner_product(x[i].begin(), x[i].end(), x[j].begin(), 0.0);
  return k;
}

Matrix gaussian_kernel(const std::vector<std::vector<double>>& x, double sigma2) {
  Matrix k(x.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t t = 0; t < x[i].size(); ++t) d2 += (x[i][t] - x[j][t]) * (x[i][t] - x[j][t]);
      k(i, j) = std::exp(-d2 / (2.0 * sigma2));
    }
  return k;
}

double decision_at(const Matrix& k, std::span<const int> y, const SmoResult& r, std::size_t row) {
  double s = r.bias;
  for (std::size_t i = 0; i < y.size(); ++i) s += r.alpha[i] * y[i] * k(row, i);
  return s;
}

DistanceId twed_id(double nu, double lambda) {
  DistanceId d{DistanceFamily::twed, {}};
  d.params.nu = nu;
  d.params.lambda = lambda;
  return d;
}

}  // namespace

TEST_CASE("error rates and rounding", "[classify]") {
  const std::vector<int> p{0, 1, 1, 2};
  const std::vector<int> t{0, 1, 2, 2};
  CHECK(error_rate(p, t) == 25.0);
  CHECK(error_rate(t, t) == 0.0);
  CHECK(round2(3.33333) == 3.33);
  CHECK(round2(66.666666) == 66.67);
  const std::vector<int> shorter{0};
  CHECK_THROWS_AS(error_rate(shorter, t), error);
  const auto counts = class_counts(t, 3);
  CHECK(counts == std::vector<std::size_t>{1, 1, 2});
}

TEST_CASE("rbf kernel", "[classify][svm]") {
  CHECK(rbf_kernel(0.0, 1.0) == 1.0);
  CHECK(rbf_kernel(2.0, 2.0) == Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(rbf_kernel(1.0, 0.5) == Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(rbf_kernel(1.0, 0.0), error);
  const Matrix sq = Matrix::from_rows({{0, 4}, {4, 0}});
  const Matrix k = rbf_from_squared(sq, 2.0);
  CHECK(k(0, 0) == 1.0);
  CHECK(k(0, 1) == Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("SMO on small problems with known solutions", "[classify][svm]") {
  SmoOptions tight;
  tight.tol = 1e-10;

  SECTION("two orthogonal points") {
    const Matrix k = Matrix::identity(2);
    const std::vector<int> y{1, -1};
    const auto r = smo_train_binary(k, y, 100.0, tight);
    CHECK(r.converged);
    CHECK(r.alpha[0] == Approx(1.0).margin(1e-9));
    CHECK(r.alpha[1] == Approx(1.0).margin(1e-9));
    CHECK(r.bias == Approx(0.0).margin(1e-9));
    CHECK(r.objective == Approx(1.0).margin(1e-9));

    const auto capped = smo_train_binary(k, y, 0.5, tight);
    CHECK(capped.alpha[0] == 0.5);
    CHECK(capped.alpha[1] == 0.5);
  }

  SECTION("hard margin on a line") {
    // Separating function f(x) = x with margin points +-1.
    const std::vector<std::vector<double>> x{{-2}, {-1}, {1}, {2}};
    const std::vector<int> y{-1, -1, 1, 1};
    const Matrix k = linear_kernel(x);
    const auto r = smo_train_binary(k, y, 1e3, tight);
    CHECK(r.converged);
    CHECK(r.alpha[0] == Approx(0.0).margin(1e-9));
    CHECK(r.alpha[1] == Approx(0.5).margin(1e-9));
    CHECK(r.alpha[2] == Approx(0.5).margin(1e-9));
    CHECK(r.alpha[3] == Approx(0.0).margin(1e-9));
    for (std::size_t i = 0; i < 4; ++i) CHECK(decision_at(k, y, r, i) == Approx(x[i][0]).margin(1e-8));
  }

  SECTION("XOR needs the gaussian kernel") {
    const std::vector<std::vector<double>> x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    const std::vector<int> y{1, 1, -1, -1};
    const Matrix k = gaussian_kernel(x, 0.25);
    const auto r = smo_train_binary(k, y, 10.0);
    CHECK(r.converged);
    for (std::size_t i = 0; i < 4; ++i) CHECK(decision_at(k, y, r, i) * y[i] > 0.0);
  }

  SECTION("degenerate inputs") {
    const Matrix k = Matrix::identity(2);
    const std::vector<int> bad{1, 0};
    CHECK_THROWS_AS(smo_train_binary(k, bad, 1.0), error);
    const std::vector<int> y{1, -1};
    CHECK_THROWS_AS(smo_train_binary(k, y, 0.0), error);
  }
}

TEST_CASE("SMO solutions satisfy the KKT conditions", "[classify][svm][property]") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal(0.0, 1.0);
  SmoOptions opt;
  opt.tol = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + static_cast<std::size_t>(trial);
    std::vector<std::vector<double>> x(n, std::vector<double>(2));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i % 2 == 0 ? 1 : -1;
      x[i][0] = normal(rng) + 0.8 * y[i];
      x[i][1] = normal(rng);
    }
    const double C = trial % 2 == 0 ? 1.0 : 10.0;
    const Matrix k = gaussian_kernel(x, 1.0);
    const auto r = smo_train_binary(k, y, C, opt);
    REQUIRE(r.converged);
    CHECK(r.objective_monotone);
    CHECK(r.kkt_gap <= opt.tol);

    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(r.alpha[i] >= 0.0);
      CHECK(r.alpha[i] <= C);
      balance += r.alpha[i] * y[i];
      const double margin = y[i] * decision_at(k, y, r, i);
      if (r.alpha[i] == 0.0) CHECK(margin >= 1.0 - 1e-5);
      else if (r.alpha[i] == C) CHECK(margin <= 1.0 + 1e-5);
      else CHECK(margin == Approx(1.0).margin(1e-5));
    }
    CHECK(std::abs(balance) < 1e-9);
  }
}

TEST_CASE("one-vs-one multiclass", "[classify][svm]") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> normal(0.0, 0.3);
  std::vector<std::vector<double>> x;
  std::vector<int> labels;
  const double centers[4][2] = {{0, 0}, {4, 0}, {0, 4}, {4, 4}};
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 6; ++i) {
      x.push_back({centers[c][0] + normal(rng), centers[c][1] + normal(rng)});
      labels.push_back(c);
    }
  const Matrix k = gaussian_kernel(x, 2.0);
  const auto model = svm_train(k, labels, 4, 10.0, 2.0);
  CHECK(model.machines.size() == 6);
  CHECK(model.converged());
  CHECK(svm_predict(model, k) == labels);

  std::vector<int> three(labels.begin(), labels.begin() + 18);
  Matrix k3(18, 18);
  for (std::size_t i = 0; i < 18; ++i)
    for (std::size_t j = 0; j < 18; ++j) k3(i, j) = k(i, j);
  CHECK(svm_train(k3, three, 4, 1.0).machines.size() == 3);

  const auto j = to_json(model);
  CHECK(j["machines"].size() == 6);
  CHECK(j["num_classes"] == 4);

  const std::vector<int> single(5, 1);
  CHECK_THROWS_AS(svm_train(Matrix::identity(5), single, 2, 1.0), error);
}

TEST_CASE("vote ties go to the lowest class", "[classify][svm]") {
  // 0 beats 1, 2 beats 0, 1 beats 2: one vote each.
  SvmModel model;
  model.num_classes = 3;
  model.machines.push_back({0, 1, {}, {}, 1.0});
  model.machines.push_back({0, 2, {}, {}, -1.0});
  model.machines.push_back({1, 2, {}, {}, 1.0});
  CHECK(svm_predict(model, Matrix(1, 4)) == std::vector<int>{0});
  model.machines[0].bias = -1.0;  // now 1 has two votes
  CHECK(svm_predict(model, Matrix(1, 4)) == std::vector<int>{1});
}

TEST_CASE("1-NN", "[classify][knn]") {
  const Matrix d = Matrix::from_rows({{3, 1, 1}, {0, 5, 2}});
  const std::vector<int> lab{7, 8, 9};
  CHECK(argmin_row(d, 0) == 1);
  CHECK(argmin_row(d, 1) == 0);
  CHECK(argmin_row(d, 1, 0) == 2);
  CHECK(knn1_predict(d, lab) == std::vector<int>{8, 7});

  const Matrix sq = Matrix::from_rows({{0, 1, 5}, {1, 0, 5}, {5, 5, 0}});
  const std::vector<int> loo_labels{0, 0, 1};
  CHECK(loo_error(sq, loo_labels) == Approx(100.0 / 3.0));
  CHECK(loo_error(Matrix(1, 1), std::vector<int>{0}) == 0.0);

  SECTION("matches a linear scan with the reference DTW") {
    std::mt19937_64 rng(23);
    LabeledDataset train;
    for (int i = 0; i < 15; ++i) {
      train.items.push_back(oracle::random_series(rng, oracle::random_length(rng, 3, 12)));
      train.labels.push_back(i % 3);
    }
    const Measure dtw_m = DistanceId{DistanceFamily::dtw, {}};
    for (int q = 0; q < 20; ++q) {
      const auto query = oracle::random_series(rng, oracle::random_length(rng, 3, 12));
      std::size_t best = 0;
      double best_d = oracle::inf;
      for (std::size_t i = 0; i < train.size(); ++i) {
        const double dd = oracle::dtw_full(query.values(), train.items[i].values());
        if (dd < best_d) {
          best_d = dd;
          best = i;
        }
      }
      CHECK(knn1_classify(train, query, dtw_m) == train.labels[best]);
    }
    CHECK_THROWS_AS(knn1_classify(LabeledDataset{}, train.items[0], dtw_m), error);
  }
}

TEST_CASE("grid specification", "[classify][grid]") {
  const auto g = GridSpec::defaults();
  CHECK(g.C.size() == 16);
  CHECK(g.C.front() == 1.0 / 32.0);
  CHECK(g.C.back() == 1024.0);
  CHECK(g.sigma2.size() == 16);
  CHECK(g.nu.size() == 6);
  CHECK(g.lambda == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(g.g.size() == 601);
  CHECK(g.g.front() == -3.0);
  CHECK(g.g.back() == 3.0);
  CHECK(g.nu_prime.size() == 8);
  CHECK(g.nu_prime.front() == Approx(1e5));
  CHECK(g.nu_prime.back() == Approx(0.01));
  CHECK(g.twip_nu.size() == 8);

  const auto custom = GridSpec::from_json(nlohmann::json::parse(R"({"C": [1, 2], "nu": [0.5]})"));
  CHECK(custom.C == std::vector<double>{1, 2});
  CHECK(custom.nu == std::vector<double>{0.5});
  CHECK(custom.sigma2 == g.sigma2);
  CHECK(GridSpec::from_json(custom.to_json()).C == custom.C);

  CHECK_THROWS_AS(GridSpec::from_json(nlohmann::json::parse(R"({"gamma": [1]})")), error);
  CHECK_THROWS_AS(GridSpec::from_json(nlohmann::json::parse(R"({"C": "big"})")), error);
  CHECK_THROWS_AS(GridSpec::from_json(nlohmann::json::parse(R"({"C": []})")), error);
  CHECK_THROWS_AS(GridSpec::from_json(nlohmann::json::parse("[1, 2]")), error);

  CHECK(expand_measure_grid(DistanceId{DistanceFamily::twed, {}}, g).size() == 30);
  CHECK(expand_measure_grid(DistanceId{DistanceFamily::erp, {}}, g).size() == 601);
  CHECK(expand_measure_grid(DistanceId{DistanceFamily::dtw, {}}, g).size() == 1);
  CHECK(expand_measure_grid(KernelId{KernelFamily::stwk_twed, {}}, g).size() == 8);
  CHECK(expand_measure_grid(KernelId{KernelFamily::twip2, {}}, g).size() == 8);
}

TEST_CASE("LOO meta-parameter search", "[classify][loo]") {
  const auto train = synth_gaussian_classes(2, 6, 20, 0.0, 5);
  GridSpec grid = GridSpec::defaults();
  grid.nu = {1e-3, 1e-1, 1.0};
  grid.lambda = {0.0, 0.5, 1.0};

  const auto r = loo_metaparam_search(train, twed_id(1.0, 1.0), grid);
  REQUIRE(r.point_errors.size() == 9);
  const bool all_equal = std::all_of(r.point_errors.begin(), r.point_errors.end(),
                                     [&](double e) { return e == r.point_errors.front(); });
  REQUIRE(all_equal);
  const auto& best = std::get<DistanceId>(r.best);
  CHECK(best.params.nu == 1.0);
  CHECK(best.params.lambda == 1.0);

  SECTION("lower error wins over the tie rule") {
    LabeledDataset tiny;
    tiny.items = {TimeSeries::univariate({0, 0, 0}), TimeSeries::univariate({0, 0, 0.1}),
                  TimeSeries::univariate({5, 5, 5}), TimeSeries::univariate({5, 5, 5.2})};
    tiny.labels = {0, 0, 1, 1};
    const auto t = loo_metaparam_search(tiny, DistanceId{DistanceFamily::dtw, {}}, grid);
    CHECK(t.error == 0.0);
    CHECK_FALSE(t.degenerate);
  }

  SECTION("fewer than two items is degenerate") {
    LabeledDataset one;
    one.items = {TimeSeries::univariate({1, 2})};
    one.labels = {0};
    const auto t = loo_metaparam_search(one, twed_id(1.0, 1.0), grid);
    CHECK(t.degenerate);
  }
}

TEST_CASE("stratified folds", "[classify][cv]") {
  std::vector<int> labels;
  for (int i = 0; i < 23; ++i) labels.push_back(i % 3);
  for (int i = 0; i < 4; ++i) labels.push_back(1);
  const auto f = stratified_folds(labels, 3, 5, 20110101);
  CHECK(fold_count(f) == 5);
  CHECK(stratified_folds(labels, 3, 5, 20110101) == f);
  CHECK(stratified_folds(labels, 3, 5, 7) != f);

  for (int c = 0; c < 3; ++c) {
    std::vector<std::size_t> per_fold(5, 0);
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) ++per_fold[f[i]];
    const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
    CHECK(*hi - *lo <= 1);
  }

  const std::vector<int> small{0, 0, 0, 0, 1, 1, 1};
  CHECK(fold_count(stratified_folds(small, 2, 5, 1)) == 3);
  const std::vector<int> tiny{0, 1, 1, 1};
  CHECK(fold_count(stratified_folds(tiny, 2, 5, 1)) == 2);
}

TEST_CASE("cross-validated SVM", "[classify][cv]") {
  const auto train = synth_gaussian_classes(2, 8, 16, 0.05, 31);
  const auto test = synth_gaussian_classes(2, 8, 16, 0.05, 32, "test");
  GridSpec grid = GridSpec::defaults();
  grid.C = {0.5, 8.0};
  grid.sigma2 = {4.0, 16.0};
  CvOptions opt;
  const Measure m = DistanceId{DistanceFamily::dtw, {}};
  const auto r = crossval_grid_search(train, m, grid, opt);
  CHECK(r.evaluated == 4);
  CHECK(r.folds == 5);
  CHECK(r.cv_error == 0.0);
  // Every grid point separates this set, so the smallest C and sigma^2 win.
  CHECK(r.C == 0.5);
  CHECK(r.sigma2 == 4.0);
  CHECK(crossval_grid_search(train, m, grid, opt).C == r.C);

  const auto run = svm_fit_predict({m, KernelMode::rbf, r.C, r.sigma2}, train, test);
  CHECK(error_rate(run.train_pred, train.labels) == 0.0);
  CHECK(error_rate(run.test_pred, test.labels) == 0.0);

  SECTION("direct kernel mode") {
    KernelId k{KernelFamily::stwk_dtw, {}};
    GridSpec kg = grid;
    kg.nu_prime = {0.1, 1.0};
    CvOptions dopt;
    dopt.mode = KernelMode::direct;
    const auto dr = crossval_grid_search(train, k, kg, dopt);
    CHECK(dr.evaluated == 4);
    const auto drun = svm_fit_predict({dr.best, KernelMode::direct, dr.C, 1.0}, train, test);
    CHECK(drun.test_pred.size() == test.size());
    CHECK_THROWS_AS(crossval_grid_search(train, m, grid, dopt), error);
  }
  CHECK(parse_kernel_mode("direct") == KernelMode::direct);
  CHECK_THROWS_AS(parse_kernel_mode("poly"), error);
}
