#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "twk/classify.hpp"
#include "twk/gram.hpp"

namespace twk {

// --- UCR text format: one series per line, label first, comma or whitespace separated ---

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace detail

/// `known_labels` seeds the label mapping (pass the training set's names when
/// reading its test set so ids agree); unseen labels are appended.
inline LabeledDataset parse_ucr(std::istream& in, const std::string& source = "<stream>",
                                const std::vector<std::string>& known_labels = {}) {
  LabeledDataset ds;
  ds.label_names = known_labels;
  std::map<std::string, int> ids;
  for (std::size_t k = 0; k < known_labels.size(); ++k) ids[known_labels[k]] = static_cast<int>(k);

  std::string line;
  std::size_t lineno = 0;
  std::size_t length = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw error(errc::parse_error, source + ":" + std::to_string(lineno) + ": no values");

    std::string label = fields[0];
    double numeric_label = 0.0;
    if (detail::parse_double(label, numeric_label) && numeric_label == std::floor(numeric_label) &&
        std::abs(numeric_label) < 1e15) {
      label = std::to_string(static_cast<long long>(numeric_label));  // "1.0000000e+00" and "1" agree
    }
    auto [it, inserted] = ids.emplace(label, static_cast<int>(ds.label_names.size()));
    if (inserted) ds.label_names.push_back(label);

    std::vector<double> values(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (!detail::parse_double(fields[k], values[k - 1])) {
        throw error(errc::parse_error,
                    source + ":" + std::to_string(lineno) + ": not a number '" + fields[k] + "'");
      }
    }
    if (ds.items.empty()) {
      length = values.size();
    } else if (values.size() != length) {
      throw error(errc::ragged_rows, source + ":" + std::to_string(lineno) + ": " + std::to_string(values.size()) +
                                         " values, expected " + std::to_string(length));
    }
    ds.labels.push_back(it->second);
    ds.items.push_back(TimeSeries::univariate(std::move(values)));
  }
  if (ds.items.empty()) throw error(errc::empty_file, source + " has no series");
  return ds;
}

inline LabeledDataset parse_ucr_string(const std::string& text, const std::vector<std::string>& known_labels = {}) {
  std::istringstream in(text);
  return parse_ucr(in, "<string>", known_labels);
}

inline LabeledDataset load_ucr(const std::string& path, const std::vector<std::string>& known_labels = {}) {
  std::ifstream in(path);
  if (!in) throw error(errc::io_error, "cannot read " + path);
  return parse_ucr(in, path, known_labels);
}

/// Space separated, 17 significant digits, so parsing gives back the same doubles.
inline void serialize_ucr(std::ostream& out, const LabeledDataset& ds) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto id = static_cast<std::size_t>(ds.labels[i]);
    out << (id < ds.label_names.size() ? ds.label_names[id] : std::to_string(id));
    for (double v : ds.items[i].values()) out << ' ' << format_double(v);
    out << '\n';
  }
}

inline std::string serialize_ucr(const LabeledDataset& ds) {
  std::ostringstream out;
  serialize_ucr(out, ds);
  return out.str();
}

/// DATASET/DATASET_TRAIN and DATASET/DATASET_TEST under `root`.
inline std::pair<LabeledDataset, LabeledDataset> load_ucr_pair(const std::string& root, const std::string& name) {
  LabeledDataset train = load_ucr(root + "/" + name + "/" + name + "_TRAIN");
  LabeledDataset test = load_ucr(root + "/" + name + "/" + name + "_TEST", train.label_names);
  train.split = "train";
  test.split = "test";
  return {std::move(train), std::move(test)};
}

// --- Published counter-example sets ---

struct CounterexampleSets {
  std::vector<std::string> lev_strings;
  std::vector<TimeSeries> dtw_series;
  std::vector<TimeSeries> short_series;  // the TWED/ERP set, timestamps 1,2,3
  std::vector<std::string> dtw_names;
  std::vector<std::string> short_names;
};

inline TimeSeries series_from_digits(const std::string& digits) {
  std::vector<double> v;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') throw error(errc::parse_error, "not a digit string: " + digits);
    v.push_back(ch - '0');
  }
  return TimeSeries::univariate(std::move(v));
}

inline CounterexampleSets counterexample_fixtures() {
  CounterexampleSets f;
  f.lev_strings = {"abc", "bad", "dab", "adc", "bcd"};
  f.dtw_names = {"01", "012", "0123", "01234"};
  f.short_names = {"010", "012", "103", "301", "032", "123", "023", "003", "302", "321"};
  for (const auto& s : f.dtw_names) f.dtw_series.push_back(series_from_digits(s));
  for (const auto& s : f.short_names) f.short_series.push_back(series_from_digits(s));
  return f;
}

/// Distance matrices as printed with the counter-examples.
inline Matrix published_m_lev() {
  return Matrix::from_rows({{0, 3, 2, 1, 2},
                            {3, 0, 2, 2, 1},
                            {2, 2, 0, 3, 3},
                            {1, 2, 3, 0, 3},
                            {2, 1, 3, 3, 0}});
}

inline Matrix published_m_dtw() {
  return Matrix::from_rows({{0, 1, 2, 3},
                            {1, 0, 0, 0},
                            {2, 0, 0, 0},
                            {3, 0, 0, 0}});
}

inline Matrix published_m_twed() {
  return Matrix::from_rows({{0, 2, 7, 9, 6, 7, 5, 5, 10, 9},
                            {2, 0, 5, 9, 4, 5, 3, 3, 8, 9},
                            {7, 5, 0, 6, 7, 4, 6, 2, 5, 10},
                            {9, 9, 6, 0, 13, 10, 12, 8, 1, 4},
                            {6, 4, 7, 13, 0, 5, 3, 5, 12, 9},
                            {7, 5, 4, 10, 5, 0, 2, 6, 9, 6},
                            {5, 3, 6, 12, 3, 2, 0, 4, 11, 8},
                            {5, 3, 2, 8, 5, 6, 4, 0, 7, 10},
                            {10, 8, 5, 1, 12, 9, 11, 7, 0, 5},
                            {9, 9, 10, 4, 9, 6, 8, 10, 5, 0}});
}

inline Matrix published_m_erp() {
  return Matrix::from_rows({{0, 2, 3, 3, 4, 5, 4, 2, 4, 5},
                            {2, 0, 3, 5, 2, 3, 2, 2, 4, 5},
                            {3, 3, 0, 4, 3, 2, 3, 1, 3, 4},
                            {3, 5, 4, 0, 7, 6, 7, 5, 1, 2},
                            {4, 2, 3, 7, 0, 3, 2, 2, 6, 5},
                            {5, 3, 2, 6, 3, 0, 1, 3, 5, 4},
                            {4, 2, 3, 7, 2, 1, 0, 2, 6, 5},
                            {2, 2, 1, 5, 2, 3, 2, 0, 4, 5},
                            {4, 4, 3, 1, 6, 5, 6, 4, 0, 1},
                            {5, 5, 4, 2, 5, 4, 5, 5, 1, 0}});
}

/// Published spectra of M_twed and M_erp (two decimals).
inline std::vector<double> published_twed_spectrum() {
  return {4.62, 0.04, -2.14, -0.98, -0.72, -0.37, -0.19, -0.17, -0.06, -0.03};
}

inline std::vector<double> published_erp_spectrum() {
  return {4.63, 0.02, 1.39e-17, -2.21, -0.97, -0.56, -0.41, -0.26, -0.17, -0.08};
}

/// Two series whose lock-step dot product vanishes but which overlap after a
/// shift of two samples.
inline std::pair<TimeSeries, TimeSeries> shifted_pulse_pair() {
  return {TimeSeries::univariate({0, 2, 0, 0, 0, 3, 0, 0, 0}),
          TimeSeries::univariate({0, 0, 0, 2, 0, 0, 0, 3, 0})};
}

// --- Synthetic warped sinusoids ---

/// Class c has template sin(2 pi (1 + c/2) u + 0.9 c) on u in [0, 1]. Each
/// item warps the time axis with u -> clamp(u^gamma + shift), gamma in
/// [0.7, 1.4], shift in [-0.08, 0.08], then adds Gaussian noise. Timestamps 1..length.
inline LabeledDataset synth_gaussian_classes(std::size_t classes, std::size_t per_class, std::size_t length,
                                             double noise, std::uint64_t seed, const std::string& split = "train") {
  if (classes == 0 || per_class == 0 || length == 0) throw error(errc::invalid_params, "synthetic counts must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gamma_dist(std::log(0.7), std::log(1.4));
  std::uniform_real_distribution<double> shift_dist(-0.08, 0.08);
  std::normal_distribution<double> normal(0.0, 1.0);

  LabeledDataset ds;
  ds.split = split;
  for (std::size_t c = 0; c < classes; ++c) ds.label_names.push_back(std::to_string(c + 1));
  for (std::size_t k = 0; k < per_class; ++k) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double freq = 1.0 + 0.5 * static_cast<double>(c);
      const double phase = 0.9 * static_cast<double>(c);
      const double gamma = std::exp(gamma_dist(rng));
      const double shift = shift_dist(rng);
      std::vector<double> v(length);
      for (std::size_t t = 0; t < length; ++t) {
        const double u = length == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(length - 1);
        const double w = std::clamp(std::pow(u, gamma) + shift, 0.0, 1.0);
        v[t] = std::sin(2.0 * std::numbers::pi * freq * w + phase) + noise * normal(rng);
      }
      ds.items.push_back(TimeSeries::univariate(std::move(v)));
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  return ds;
}

}  // namespace twk
