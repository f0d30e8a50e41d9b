#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "twk/measure.hpp"

namespace twk {

struct LabeledDataset {
  std::vector<TimeSeries> items;
  std::vector<int> labels;                // dense class ids 0..K-1
  std::vector<std::string> label_names;   // label_names[id] is the label as written in the source
  std::string split = "train";

  std::size_t size() const noexcept { return items.size(); }
  std::size_t num_classes() const {
    int top = -1;
    for (int l : labels) top = std::max(top, l);
    return std::max<std::size_t>(label_names.size(), static_cast<std::size_t>(top + 1));
  }

  void validate() const {
    if (items.size() != labels.size()) throw error(errc::length_mismatch, "items and labels differ in count");
    for (int l : labels)
      if (l < 0) throw error(errc::invalid_params, "class ids must be >= 0");
  }
};

inline std::vector<std::size_t> class_counts(std::span<const int> labels, std::size_t k) {
  std::vector<std::size_t> c(k, 0);
  for (int l : labels) ++c[static_cast<std::size_t>(l)];
  return c;
}

/// 100 * misclassified / total.
inline double error_rate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw error(errc::length_mismatch, "prediction/label counts differ");
  if (truth.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(truth.size());
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

// --- Grids ---

struct GridSpec {
  std::vector<double> C;
  std::vector<double> sigma2;
  std::vector<double> nu;        // TWED stiffness
  std::vector<double> lambda;    // TWED gap penalty
  std::vector<double> g;         // ERP gap value (1-D)
  std::vector<double> nu_prime;  // exponentiated STWK stiffness
  std::vector<double> twip_nu;   // TWIP stiffness

  static std::vector<double> powers(double base, int lo, int hi) {
    std::vector<double> v;
    for (int e = lo; e <= hi; ++e) v.push_back(std::pow(base, e));
    return v;
  }

  static GridSpec defaults() {
    GridSpec s;
    s.C = powers(2.0, -5, 10);
    s.sigma2 = powers(2.0, -5, 10);
    s.nu = powers(10.0, -5, 0);
    s.lambda = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int k = -300; k <= 300; ++k) s.g.push_back(k / 100.0);
    for (double inv : powers(10.0, -5, 2)) s.nu_prime.push_back(1.0 / inv);
    for (int e = 2; e >= -5; --e) s.twip_nu.push_back(std::pow(10.0, e));
    return s;
  }

  /// Keys present in `j` replace the defaults; unknown keys are rejected.
  static GridSpec from_json(const nlohmann::json& j) {
    GridSpec s = defaults();
    if (!j.is_object()) throw error(errc::parse_error, "grid must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      std::vector<double>* slot = nullptr;
      if (key == "C") slot = &s.C;
      else if (key == "sigma2") slot = &s.sigma2;
      else if (key == "nu") slot = &s.nu;
      else if (key == "lambda") slot = &s.lambda;
      else if (key == "g") slot = &s.g;
      else if (key == "nu_prime") slot = &s.nu_prime;
      else if (key == "twip_nu") slot = &s.twip_nu;
      else throw error(errc::parse_error, "unknown grid key '" + key + "'");
      try {
        *slot = value.get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        throw error(errc::parse_error, "grid key '" + key + "' must be an array of numbers");
      }
      if (slot->empty()) throw error(errc::invalid_params, "grid key '" + key + "' is empty");
    }
    return s;
  }

  nlohmann::json to_json() const {
    return {{"C", C}, {"sigma2", sigma2}, {"nu", nu}, {"lambda", lambda},
            {"g", g}, {"nu_prime", nu_prime}, {"twip_nu", twip_nu}};
  }
};

/// Grid points of the meta-parameters the measure family reads; the remaining
/// parameters are copied from `base`.
inline std::vector<Measure> expand_measure_grid(const Measure& base, const GridSpec& grid) {
  std::vector<Measure> out;
  if (const auto* d = std::get_if<DistanceId>(&base)) {
    switch (d->family) {
      case DistanceFamily::erp:
        for (double g : grid.g) {
          DistanceId p = *d;
          p.params.g = {g};
          out.emplace_back(p);
        }
        break;
      case DistanceFamily::twed:
        for (double nu : grid.nu)
          for (double lambda : grid.lambda) {
            DistanceId p = *d;
            p.params.nu = nu;
            p.params.lambda = lambda;
            out.emplace_back(p);
          }
        break;
      case DistanceFamily::twip1:
      case DistanceFamily::twip2:
        for (double nu : grid.twip_nu) {
          DistanceId p = *d;
          p.twip_nu = nu;
          out.emplace_back(p);
        }
        break;
      default: out.push_back(base);
    }
    return out;
  }
  const auto& k = std::get<KernelId>(base);
  if (is_multiplicative(k.family)) {
    for (double np : grid.nu_prime) {
      KernelId p = k;
      p.params.nu_prime = np;
      out.emplace_back(p);
    }
  } else if (k.family == KernelFamily::twip1 || k.family == KernelFamily::twip2) {
    for (double nu : grid.twip_nu) {
      KernelId p = k;
      p.params.nu = nu;
      out.emplace_back(p);
    }
  } else {
    out.push_back(base);
  }
  return out;
}

// --- 1-NN ---

/// Index of the smallest entry; the first one wins ties. `skip` excludes one column.
inline std::size_t argmin_row(const Matrix& d, std::size_t row, std::optional<std::size_t> skip = {}) {
  std::size_t best = d.cols();
  for (std::size_t j = 0; j < d.cols(); ++j) {
    if (skip && *skip == j) continue;
    if (best == d.cols() || d(row, j) < d(row, best)) best = j;
  }
  return best;
}

inline int knn1_classify(const LabeledDataset& train, const TimeSeries& query, const Measure& measure) {
  if (train.size() == 0) throw error(errc::invalid_params, "1-NN needs a non-empty training set");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double d = std::get_if<DistanceId>(&measure) ? distance_value(std::get<DistanceId>(measure), query, train.items[i])
                                                       : std::sqrt(squared_dissimilarity(measure, query, train.items[i]));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return train.labels[best];
}

/// Predictions from a (queries x train) distance matrix.
inline std::vector<int> knn1_predict(const Matrix& d, std::span<const int> train_labels) {
  std::vector<int> out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) out[i] = train_labels[argmin_row(d, i)];
  return out;
}

/// Leave-one-out 1-NN error (percent) from a square train distance matrix.
inline double loo_error(const Matrix& d, std::span<const int> labels) {
  if (d.rows() < 2) return 0.0;
  std::vector<int> pred(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) pred[i] = labels[argmin_row(d, i, i)];
  return error_rate(pred, labels);
}

struct LooResult {
  Measure best;
  double error = 0.0;                // LOO error of `best`, percent
  std::vector<double> point_errors;  // one per grid point, in grid order
  std::vector<Measure> points;
  bool degenerate = false;           // fewer than two training items
};

namespace detail {

/// True when candidate b should replace incumbent a among equal-error points.
inline bool loo_prefers(const Measure& a, const Measure& b) {
  const auto* da = std::get_if<DistanceId>(&a);
  const auto* db = std::get_if<DistanceId>(&b);
  if (da && db && da->family == DistanceFamily::twed) {
    if (db->params.nu != da->params.nu) return db->params.nu > da->params.nu;
    return db->params.lambda > da->params.lambda;
  }
  return false;
}

}  // namespace detail

/// Exhaustive LOO 1-NN scan. Ties: TWED prefers the highest nu, then the highest
/// lambda; every other measure keeps the first grid point.
inline LooResult loo_metaparam_search(const LabeledDataset& train, const Measure& base, const GridSpec& grid,
                                      unsigned threads = 1) {
  train.validate();
  LooResult r{base, 0.0, {}, expand_measure_grid(base, grid), train.size() < 2};
  if (r.degenerate) {
    r.best = r.points.front();
    r.point_errors.assign(r.points.size(), 0.0);
    return r;
  }
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < r.points.size(); ++k) {
    const Matrix d = distance_matrix(r.points[k], train.items, threads);
    const double e = loo_error(d, train.labels);
    r.point_errors.push_back(e);
    if (!best || e < r.point_errors[*best] ||
        (e == r.point_errors[*best] && detail::loo_prefers(r.points[*best], r.points[k]))) {
      best = k;
    }
  }
  r.best = r.points[*best];
  r.error = r.point_errors[*best];
  return r;
}

// --- SVM ---

/// exp(-d^2 / (2 sigma^2))
inline double rbf_kernel(double distance, double sigma2) {
  if (!(sigma2 > 0.0)) throw error(errc::invalid_params, "sigma^2 must be > 0");
  return std::exp(-distance * distance / (2.0 * sigma2));
}

inline Matrix rbf_from_squared(const Matrix& sq, double sigma2) {
  if (!(sigma2 > 0.0)) throw error(errc::invalid_params, "sigma^2 must be > 0");
  Matrix k(sq.rows(), sq.cols());
  for (std::size_t i = 0; i < sq.rows(); ++i)
    for (std::size_t j = 0; j < sq.cols(); ++j) k(i, j) = std::exp(-sq(i, j) / (2.0 * sigma2));
  return k;
}

struct SmoOptions {
  double tol = 1e-3;
  std::size_t max_iterations = 1000000;
};

struct SmoResult {
  std::vector<double> alpha;
  double bias = 0.0;                // decision(x) = sum_i alpha_i y_i K(x_i, x) + bias
  bool converged = false;
  std::size_t iterations = 0;
  double kkt_gap = 0.0;             // final maximal violation
  bool objective_monotone = true;   // dual objective never decreased
  double objective = 0.0;           // sum alpha - 1/2 alpha^T Q alpha
};

/// Dual soft-margin SVM on a precomputed kernel matrix, labels +-1.
/// Working pairs are the maximal violating pair; stops when the gap is <= tol.
inline SmoResult smo_train_binary(const Matrix& k, std::span<const int> y, double C, SmoOptions opt = {}) {
  const std::size_t n = k.rows();
  if (k.cols() != n || y.size() != n) throw error(errc::dimension_mismatch, "kernel matrix and labels disagree");
  if (!(C > 0.0)) throw error(errc::invalid_params, "C must be > 0");
  for (int v : y)
    if (v != 1 && v != -1) throw error(errc::invalid_params, "binary labels must be +1 or -1");

  SmoResult r;
  r.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a^T Q a - e^T a
  const auto yd = [&](std::size_t i) { return static_cast<double>(y[i]); };
  const auto q = [&](std::size_t i, std::size_t j) { return yd(i) * yd(j) * k(i, j); };
  const auto in_up = [&](std::size_t t) { return (y[t] == 1 && r.alpha[t] < C) || (y[t] == -1 && r.alpha[t] > 0.0); };
  const auto in_low = [&](std::size_t t) { return (y[t] == 1 && r.alpha[t] > 0.0) || (y[t] == -1 && r.alpha[t] < C); };
  const auto objective = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += r.alpha[i] - 0.5 * r.alpha[i] * (grad[i] + 1.0);
    return s;
  };

  double prev_obj = 0.0;
  for (;;) {
    std::size_t i = n;
    std::size_t j = n;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -yd(t) * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    r.kkt_gap = (i == n || j == n) ? 0.0 : gmax - gmin;
    if (r.kkt_gap <= opt.tol) {
      r.converged = true;
      break;
    }
    if (r.iterations >= opt.max_iterations) break;
    ++r.iterations;

    // Move along y_i e_i - y_j e_j, clipped to the box.
    double a = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (a <= 0.0) a = 1e-12;
    const double step_free = (gmax - gmin) / a;
    const double cap_i = y[i] == 1 ? C - r.alpha[i] : r.alpha[i];
    const double cap_j = y[j] == 1 ? r.alpha[j] : C - r.alpha[j];
    const double step = std::min({step_free, cap_i, cap_j});
    const double di = yd(i) * step;
    const double dj = -yd(j) * step;
    r.alpha[i] = std::clamp(r.alpha[i] + di, 0.0, C);
    r.alpha[j] = std::clamp(r.alpha[j] + dj, 0.0, C);
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;

    const double obj = objective();
    if (obj < prev_obj - 1e-12 * std::max(1.0, std::abs(prev_obj))) r.objective_monotone = false;
    prev_obj = obj;
  }
  r.objective = objective();

  // rho from the free vectors, or the middle of the interval the bound ones allow.
  double sum = 0.0;
  std::size_t free = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd(t) * grad[t];
    if (r.alpha[t] > 0.0 && r.alpha[t] < C) {
      sum += yg;
      ++free;
    } else if ((r.alpha[t] >= C) == (y[t] == 1)) {
      lb = std::max(lb, yg);
    } else {
      ub = std::min(ub, yg);
    }
  }
  double rho = 0.0;
  if (free > 0) {
    rho = sum / static_cast<double>(free);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = 0.5 * (ub + lb);
  } else {
    rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  }
  r.bias = -rho;
  return r;
}

struct BinaryMachine {
  int positive = 0;  // decision > 0 votes for this class
  int negative = 1;
  std::vector<std::size_t> support;  // indices into the training set
  std::vector<double> coef;          // alpha_i * y_i
  double bias = 0.0;
  bool converged = true;
  std::size_t iterations = 0;

  double decision(std::span<const double> kernel_row) const {
    double s = bias;
    for (std::size_t k = 0; k < support.size(); ++k) s += coef[k] * kernel_row[support[k]];
    return s;
  }
};

struct SvmModel {
  std::vector<BinaryMachine> machines;
  std::size_t num_classes = 0;
  double C = 1.0;
  double sigma2 = 1.0;

  bool converged() const {
    return std::all_of(machines.begin(), machines.end(), [](const auto& m) { return m.converged; });
  }
};

/// One-vs-one over every class pair present in the training labels.
inline SvmModel svm_train(const Matrix& k, std::span<const int> labels, std::size_t num_classes, double C,
                          double sigma2 = 1.0, SmoOptions opt = {}) {
  SvmModel model{{}, num_classes, C, sigma2};
  const auto counts = class_counts(labels, num_classes);
  std::vector<int> present;
  for (std::size_t c = 0; c < num_classes; ++c)
    if (counts[c] > 0) present.push_back(static_cast<int>(c));
  if (present.size() < 2) throw error(errc::invalid_params, "SVM training needs at least two classes");

  for (std::size_t p = 0; p < present.size(); ++p) {
    for (std::size_t q = p + 1; q < present.size(); ++q) {
      const int cp = present[p];
      const int cq = present[q];
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cp || labels[i] == cq) idx.push_back(i);
      Matrix sub(idx.size(), idx.size());
      std::vector<int> y(idx.size());
      for (std::size_t a = 0; a < idx.size(); ++a) {
        y[a] = labels[idx[a]] == cp ? 1 : -1;
        for (std::size_t b = 0; b < idx.size(); ++b) sub(a, b) = k(idx[a], idx[b]);
      }
      const SmoResult s = smo_train_binary(sub, y, C, opt);
      BinaryMachine m{cp, cq, {}, {}, s.bias, s.converged, s.iterations};
      for (std::size_t a = 0; a < idx.size(); ++a) {
        if (s.alpha[a] > 0.0) {
          m.support.push_back(idx[a]);
          m.coef.push_back(s.alpha[a] * y[a]);
        }
      }
      model.machines.push_back(std::move(m));
    }
  }
  return model;
}

/// `k` holds kernel values of the queries (rows) against the training set (columns).
/// Majority vote; ties go to the lowest class id.
inline std::vector<int> svm_predict(const SvmModel& model, const Matrix& k) {
  std::vector<int> out(k.rows());
  std::vector<std::size_t> votes(model.num_classes);
  for (std::size_t r = 0; r < k.rows(); ++r) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto& m : model.machines) ++votes[static_cast<std::size_t>(m.decision(k.row(r)) > 0.0 ? m.positive : m.negative)];
    out[r] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

inline nlohmann::json to_json(const SvmModel& m) {
  nlohmann::json machines = nlohmann::json::array();
  for (const auto& b : m.machines) {
    machines.push_back({{"classes", {b.positive, b.negative}},
                        {"support", b.support},
                        {"coef", b.coef},
                        {"bias", b.bias},
                        {"converged", b.converged},
                        {"iterations", b.iterations}});
  }
  return {{"num_classes", m.num_classes}, {"C", m.C}, {"sigma2", m.sigma2}, {"machines", machines}};
}

// --- Cross-validated grid search ---

/// rbf: K = exp(-d^2 / (2 sigma^2)) over the measure's (induced) dissimilarity.
/// direct: the kernel itself (cosine-normalised for the exponentiated STWK); sigma^2 unused.
enum class KernelMode { rbf, direct };

inline KernelMode parse_kernel_mode(const std::string& s) {
  if (s == "rbf") return KernelMode::rbf;
  if (s == "direct") return KernelMode::direct;
  throw error(errc::invalid_params, "unknown kernel mode '" + s + "'");
}

inline const char* to_string(KernelMode m) { return m == KernelMode::rbf ? "rbf" : "direct"; }

/// Stratified fold assignment. Each class is shuffled (seeded) and dealt out
/// round-robin, the dealer continuing across classes. Folds are reduced to the
/// smallest class count when a class is too small (never below 2).
inline std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t num_classes,
                                                 std::size_t folds, std::uint64_t seed) {
  const auto counts = class_counts(labels, num_classes);
  std::size_t min_count = labels.size();
  for (std::size_t c : counts)
    if (c > 0) min_count = std::min(min_count, c);
  folds = std::max<std::size_t>(2, std::min(folds, min_count));
  folds = std::min(folds, std::max<std::size_t>(labels.size(), 1));

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold_of(labels.size(), 0);
  std::size_t dealer = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == static_cast<int>(c)) members.push_back(i);
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng() % i]);
    for (std::size_t i : members) fold_of[i] = dealer++ % folds;
  }
  return fold_of;
}

inline std::size_t fold_count(std::span<const std::size_t> fold_of) {
  std::size_t k = 0;
  for (std::size_t f : fold_of) k = std::max(k, f + 1);
  return k;
}

struct CvResult {
  Measure best;
  double C = 1.0;
  double sigma2 = 1.0;
  double cv_error = 0.0;  // mean fold error, percent
  std::size_t folds = 0;
  std::size_t evaluated = 0;
  std::size_t nonconverged = 0;  // binary machines that hit the iteration cap
};

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 20110101;
  KernelMode mode = KernelMode::rbf;
  unsigned threads = 1;
  SmoOptions smo;
};

namespace detail {

inline Matrix submatrix(const Matrix& m, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  Matrix s(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) s(a, b) = m(rows[a], cols[b]);
  return s;
}

/// Train-set kernel for one measure grid point: squared dissimilarities in rbf
/// mode, the kernel itself in direct mode.
inline Matrix base_matrix(const Measure& m, const std::vector<TimeSeries>& items, KernelMode mode, unsigned threads) {
  return mode == KernelMode::rbf ? squared_dissimilarity_matrix(m, items, threads)
                                 : normalized_kernel_matrix(m, items, items, threads);
}

}  // namespace detail

/// Exhaustive grid over measure points x C x sigma^2 (sigma^2 only in rbf mode).
/// Ties: smaller C, then smaller sigma^2, then the earlier measure grid point.
inline CvResult crossval_grid_search(const LabeledDataset& train, const Measure& base, const GridSpec& grid,
                                     const CvOptions& opt = {}) {
  train.validate();
  const std::size_t k = train.num_classes();
  const auto fold_of = stratified_folds(train.labels, k, opt.folds, opt.seed);
  const std::size_t folds = fold_count(fold_of);
  std::vector<std::vector<std::size_t>> fold_train(folds), fold_test(folds);
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    for (std::size_t f = 0; f < folds; ++f) (fold_of[i] == f ? fold_test[f] : fold_train[f]).push_back(i);

  const auto points = expand_measure_grid(base, grid);
  const std::vector<double> sigmas = opt.mode == KernelMode::rbf ? grid.sigma2 : std::vector<double>{1.0};

  struct Candidate {
    double error;
    double C;
    double sigma2;
    std::size_t point;
  };
  std::optional<Candidate> best;
  CvResult r{points.front(), 1.0, 1.0, 0.0, folds, 0, 0};

  for (std::size_t p = 0; p < points.size(); ++p) {
    const Matrix bm = detail::base_matrix(points[p], train.items, opt.mode, opt.threads);
    std::vector<Candidate> cands;
    for (double c : grid.C)
      for (double s2 : sigmas) cands.push_back({0.0, c, s2, p});
    std::vector<std::size_t> nonconv(cands.size(), 0);

    parallel_for(cands.size(), opt.threads, [&](std::size_t ci) {
      Candidate& cand = cands[ci];
      const Matrix km = opt.mode == KernelMode::rbf ? rbf_from_squared(bm, cand.sigma2) : bm;
      double err_sum = 0.0;
      for (std::size_t f = 0; f < folds; ++f) {
        std::vector<int> ytr, yte;
        for (std::size_t i : fold_train[f]) ytr.push_back(train.labels[i]);
        for (std::size_t i : fold_test[f]) yte.push_back(train.labels[i]);
        std::vector<int> pred;
        const auto present = class_counts(ytr, k);
        if (std::count_if(present.begin(), present.end(), [](std::size_t c) { return c > 0; }) < 2) {
          pred.assign(yte.size(), ytr.empty() ? 0 : ytr.front());
        } else {
          const SvmModel model =
              svm_train(detail::submatrix(km, fold_train[f], fold_train[f]), ytr, k, cand.C, cand.sigma2, opt.smo);
          if (!model.converged()) ++nonconv[ci];
          pred = svm_predict(model, detail::submatrix(km, fold_test[f], fold_train[f]));
        }
        err_sum += error_rate(pred, yte);
      }
      cand.error = err_sum / static_cast<double>(folds);
    });

    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      const Candidate& c = cands[ci];
      r.nonconverged += nonconv[ci];
      ++r.evaluated;
      const bool better = !best || c.error < best->error ||
                          (c.error == best->error &&
                           (c.C < best->C || (c.C == best->C && c.sigma2 < best->sigma2)));
      if (better) best = c;
    }
  }
  r.best = points[best->point];
  r.C = best->C;
  r.sigma2 = best->sigma2;
  r.cv_error = best->error;
  return r;
}

/// Everything needed to train and apply one SVM configuration.
struct SvmConfig {
  Measure measure;
  KernelMode mode = KernelMode::rbf;
  double C = 1.0;
  double sigma2 = 1.0;
};

struct SvmRun {
  SvmModel model;
  std::vector<int> train_pred;
  std::vector<int> test_pred;
};

inline SvmRun svm_fit_predict(const SvmConfig& cfg, const LabeledDataset& train, const LabeledDataset& test,
                              unsigned threads = 1, SmoOptions opt = {}) {
  const std::size_t k = std::max(train.num_classes(), test.num_classes());
  Matrix ktr, kte;
  if (cfg.mode == KernelMode::rbf) {
    ktr = rbf_from_squared(squared_dissimilarity_matrix(cfg.measure, train.items, threads), cfg.sigma2);
    kte = rbf_from_squared(squared_dissimilarity_matrix(cfg.measure, test.items, train.items, threads), cfg.sigma2);
  } else {
    ktr = normalized_kernel_matrix(cfg.measure, train.items, train.items, threads);
    kte = normalized_kernel_matrix(cfg.measure, test.items, train.items, threads);
  }
  SvmRun run{svm_train(ktr, train.labels, k, cfg.C, cfg.sigma2, opt), {}, {}};
  run.train_pred = svm_predict(run.model, ktr);
  run.test_pred = svm_predict(run.model, kte);
  return run;
}

}  // namespace twk
