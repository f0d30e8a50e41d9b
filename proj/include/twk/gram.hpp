#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "twk/linalg.hpp"
#include "twk/parallel.hpp"

namespace twk {

/// Symmetric matrix of pairwise measure values plus where it came from.
struct GramMatrix {
  Matrix entries;
  std::string measure;             // kernel or distance id, e.g. "twed" or "stwk_dtw"
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> item_ids;
  bool is_distance = false;

  std::size_t size() const noexcept { return entries.rows(); }
};

struct GramMeta {
  std::string measure;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> item_ids;
  bool is_distance = false;
};

/// Evaluates measure(items[i], items[j]) once for every i <= j and mirrors it.
/// Errors are re-raised with the offending item indices attached.
template <class Item, class F>
GramMatrix build_gram(std::span<const Item> items, F&& measure, GramMeta meta = {}, unsigned threads = 1) {
  const std::size_t n = items.size();
  GramMatrix g{Matrix(n, n), std::move(meta.measure), std::move(meta.params), std::move(meta.item_ids),
               meta.is_distance};
  if (g.item_ids.empty()) {
    for (std::size_t i = 0; i < n; ++i) g.item_ids.push_back(std::to_string(i));
  }
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  cells.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) cells.emplace_back(i, j);

  parallel_for(cells.size(), threads, [&](std::size_t k) {
    const auto [i, j] = cells[k];
    try {
      const double v = measure(items[i], items[j]);
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    } catch (const error& e) {
      throw error(e.code(), "items (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
    }
  });
  return g;
}

template <class Item, class F>
GramMatrix build_gram(const std::vector<Item>& items, F&& measure, GramMeta meta = {}, unsigned threads = 1) {
  return build_gram(std::span<const Item>(items), std::forward<F>(measure), std::move(meta), threads);
}

// --- Definiteness diagnostics ---

enum class Verdict { psd, nsd, cpd_candidate, indefinite };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::psd: return "PSD";
    case Verdict::nsd: return "NSD";
    case Verdict::cpd_candidate: return "CPD-candidate";
    case Verdict::indefinite: return "indefinite";
  }
  return "?";
}

struct SpectrumReport {
  std::vector<double> eigenvalues;  // descending
  std::size_t pev_count = 0;        // eigenvalues > tau
  double delta_p = 0.0;             // percent of positive mass beyond the largest eigenvalue
  Verdict verdict = Verdict::indefinite;
  double tau = 0.0;                 // absolute positivity threshold used
  double scale = 1.0;               // max |entry| of the matrix (1 when built from a bare spectrum)

  /// Eigenvalues divided by the largest absolute matrix entry.
  std::vector<double> normalized_eigenvalues() const {
    std::vector<double> out = eigenvalues;
    if (scale > 0.0)
      for (double& v : out) v /= scale;
    return out;
  }

  double min_eigenvalue() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
  double max_eigenvalue() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
};

/// 100 * (sum of positive eigenvalues - largest one) / sum of positive eigenvalues;
/// 0 when at most one eigenvalue exceeds tau.
inline double delta_p_percent(std::span<const double> eigenvalues, double tau) {
  double sum = 0.0;
  double largest = 0.0;
  std::size_t count = 0;
  for (double ev : eigenvalues) {
    if (ev > tau) {
      sum += ev;
      largest = std::max(largest, ev);
      ++count;
    }
  }
  if (count <= 1) return 0.0;
  return 100.0 * (sum - largest) / sum;
}

/// Report from a bare spectrum; without the matrix, "at most one positive
/// eigenvalue" is the CPD-candidate criterion.
inline SpectrumReport spectrum_report(std::vector<double> eigenvalues, double tau) {
  std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
  SpectrumReport r;
  r.eigenvalues = std::move(eigenvalues);
  r.tau = tau;
  for (double ev : r.eigenvalues) r.pev_count += ev > tau ? 1 : 0;
  r.delta_p = delta_p_percent(r.eigenvalues, tau);
  if (r.eigenvalues.empty() || r.min_eigenvalue() >= -tau) {
    r.verdict = Verdict::psd;
  } else if (r.max_eigenvalue() <= tau) {
    r.verdict = Verdict::nsd;
  } else {
    r.verdict = r.pev_count <= 1 ? Verdict::cpd_candidate : Verdict::indefinite;
  }
  return r;
}

/// P G P with P = I - 11^T / n: G restricted to zero-sum coefficient vectors.
inline Matrix zero_sum_projection(const Matrix& g) {
  const std::size_t n = g.rows();
  std::vector<double> row_mean(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row_mean[i] += g(i, j);
    total += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  total /= static_cast<double>(n * n);
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = g(i, j) - row_mean[i] - row_mean[j] + total;
  return p;
}

/// tau_rel scales the positivity threshold by max |entry|.
inline SpectrumReport definiteness_report(const Matrix& g, double tau_rel = 1e-9) {
  const double scale = g.max_abs();
  const double tau = tau_rel * scale;
  SpectrumReport r = spectrum_report(eigenvalues_symmetric(g), tau);
  r.scale = scale > 0.0 ? scale : 1.0;
  if (r.verdict == Verdict::cpd_candidate || r.verdict == Verdict::indefinite) {
    const auto projected = eigenvalues_symmetric(zero_sum_projection(g));
    const bool cond_neg = projected.front() <= tau;
    const bool cond_pos = projected.back() >= -tau;
    r.verdict = (cond_neg || cond_pos) ? Verdict::cpd_candidate : Verdict::indefinite;
  }
  return r;
}

inline SpectrumReport definiteness_report(const GramMatrix& g, double tau_rel = 1e-9) {
  return definiteness_report(g.entries, tau_rel);
}

struct Witness {
  std::vector<double> positive;  // zero-sum, c^T G c > tau
  std::vector<double> negative;  // zero-sum, d^T G d < -tau
  double positive_form = 0.0;
  double negative_form = 0.0;
  std::size_t trials_used = 0;
};

/// Looks for unit-norm zero-sum vectors with forms of both signs. Candidates are
/// the extreme eigenvectors of the zero-sum projection, then `trials` random
/// Gaussian directions. Failure to find a pair proves nothing.
inline std::optional<Witness> indefiniteness_witness_search(const Matrix& g, std::size_t trials,
                                                            std::uint64_t seed = 20110101, double tau_rel = 1e-9) {
  const std::size_t n = g.rows();
  if (n < 2) return std::nullopt;
  const double tau = tau_rel * std::max(g.max_abs(), 1e-300);

  const auto center_normalize = [n](std::vector<double>& c) {
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(n);
    double norm = 0.0;
    for (double& v : c) {
      v -= mean;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) return false;
    for (double& v : c) v /= norm;
    return true;
  };

  Witness w;
  bool have_pos = false;
  bool have_neg = false;
  const auto consider = [&](std::vector<double> c) {
    if (!center_normalize(c)) return;
    const double q = quadratic_form(g, c);
    if (q > tau && (!have_pos || q > w.positive_form)) {
      w.positive = c;
      w.positive_form = q;
      have_pos = true;
    }
    if (q < -tau && (!have_neg || q < w.negative_form)) {
      w.negative = c;
      w.negative_form = q;
      have_neg = true;
    }
  };

  const auto eig = eigen_symmetric(zero_sum_projection(g));
  for (std::size_t k : {std::size_t{0}, n - 1}) {
    std::vector<double> c(n);
    for (std::size_t r = 0; r < n; ++r) c[r] = eig.vectors(r, k);
    consider(std::move(c));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < trials && !(have_pos && have_neg); ++t) {
    std::vector<double> c(n);
    for (double& v : c) v = normal(rng);
    consider(std::move(c));
    w.trials_used = t + 1;
  }
  if (have_pos && have_neg) return w;
  return std::nullopt;
}

// --- Persistence: CSV entries plus a JSON sidecar ---

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_gram_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw error(errc::io_error, "cannot write " + path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline Matrix read_gram_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw error(errc::parse_error, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  Matrix m = Matrix::from_rows(rows);
  if (m.rows() != m.cols()) throw error(errc::dimension_mismatch, path + " is not square");
  return m;
}

inline nlohmann::json sidecar_json(const GramMatrix& g) {
  return {{"kernel", g.measure},
          {"kind", g.is_distance ? "distance" : "kernel"},
          {"params", g.params},
          {"items", g.item_ids},
          {"n", g.size()}};
}

inline void write_gram(const std::string& prefix, const GramMatrix& g) {
  write_gram_csv(prefix + ".csv", g.entries);
  std::ofstream out(prefix + ".json");
  if (!out) throw error(errc::io_error, "cannot write " + prefix + ".json");
  out << sidecar_json(g).dump(2) << '\n';
}

inline GramMatrix read_gram(const std::string& prefix) {
  std::ifstream in(prefix + ".json");
  if (!in) throw error(errc::io_error, "cannot read " + prefix + ".json");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::parse_error, prefix + ".json: " + e.what());
  }
  GramMatrix g;
  g.entries = read_gram_csv(prefix + ".csv");
  g.measure = j.at("kernel").get<std::string>();
  g.params = j.value("params", nlohmann::json::object());
  g.item_ids = j.at("items").get<std::vector<std::string>>();
  g.is_distance = j.value("kind", "kernel") == "distance";
  if (j.at("n").get<std::size_t>() != g.size() || g.item_ids.size() != g.size()) {
    throw error(errc::parse_error, prefix + ": sidecar does not match matrix size");
  }
  return g;
}

inline nlohmann::json report_json(const SpectrumReport& r) {
  return {{"eigenvalues", r.eigenvalues},
          {"normalized_eigenvalues", r.normalized_eigenvalues()},
          {"pev", r.pev_count},
          {"delta_p", r.delta_p},
          {"verdict", to_string(r.verdict)},
          {"tau", r.tau},
          {"scale", r.scale}};
}

}  // namespace twk
