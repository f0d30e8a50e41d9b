#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "twk/error.hpp"

namespace twk {

/// Local cost between two sample values. `l2_squared` is the classical DTW
/// cost (sum of squared differences); it is not a norm.
enum class Norm { l1, l2, l2_squared };

inline Norm parse_norm(const std::string& s) {
  if (s == "l1" || s == "L1" || s == "1") return Norm::l1;
  if (s == "l2" || s == "L2" || s == "2") return Norm::l2;
  if (s == "l2sq" || s == "l2_squared") return Norm::l2_squared;
  throw error(errc::invalid_params, "unknown norm '" + s + "'");
}

inline const char* to_string(Norm n) {
  switch (n) {
    case Norm::l1: return "l1";
    case Norm::l2: return "l2";
    case Norm::l2_squared: return "l2sq";
  }
  return "?";
}

inline double lp_norm_dist(std::span<const double> x, std::span<const double> y, Norm p) {
  if (x.size() != y.size()) {
    throw error(errc::dimension_mismatch,
                "vectors of dimension " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  if (x.size() == 1) {
    const double d = x[0] - y[0];
    return p == Norm::l2_squared ? d * d : std::abs(d);
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    acc += p == Norm::l1 ? std::abs(d) : d * d;
  }
  return p == Norm::l2 ? std::sqrt(acc) : acc;
}

struct Sample {
  std::vector<double> value;
  double time = 0.0;
};

/// An ordered sequence of (value vector, timestamp) samples. Values are kept in
/// one flat buffer of size() * dim() doubles. The empty series is valid.
class TimeSeries {
 public:
  TimeSeries() = default;

  TimeSeries(std::size_t dim, std::vector<double> values, std::vector<double> times)
      : dim_(dim), values_(std::move(values)), times_(std::move(times)) {
    if (dim_ == 0) throw error(errc::dimension_mismatch, "sample dimension must be >= 1");
    if (values_.size() != dim_ * times_.size()) {
      throw error(errc::dimension_mismatch, "value buffer does not match dim * length");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
      if (!(times_[i] > times_[i - 1])) {
        throw error(errc::timestamp_mismatch,
                    "timestamps must strictly increase (index " + std::to_string(i) + ")");
      }
    }
  }

  explicit TimeSeries(const std::vector<Sample>& samples) {
    if (samples.empty()) return;
    std::vector<double> values;
    std::vector<double> times;
    const std::size_t dim = samples.front().value.size();
    for (const auto& s : samples) {
      if (s.value.size() != dim) throw error(errc::dimension_mismatch, "ragged sample dimensions");
      values.insert(values.end(), s.value.begin(), s.value.end());
      times.push_back(s.time);
    }
    *this = TimeSeries(dim, std::move(values), std::move(times));
  }

  /// One-dimensional series with timestamps 1..N (sample index as time).
  static TimeSeries univariate(std::vector<double> values) {
    std::vector<double> times(values.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i + 1);
    return TimeSeries(1, std::move(values), std::move(times));
  }

  static TimeSeries univariate(std::vector<double> values, std::vector<double> times) {
    return TimeSeries(1, std::move(values), std::move(times));
  }

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> value(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  double time(std::size_t i) const { return times_[i]; }

  Sample sample(std::size_t i) const {
    auto v = value(i);
    return {std::vector<double>(v.begin(), v.end()), times_[i]};
  }

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& times() const noexcept { return times_; }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::size_t dim_ = 1;
  std::vector<double> values_;
  std::vector<double> times_;
};

/// Discrete tokens compared by equality only (Levenshtein inputs).
using SymbolSequence = std::string;

/// lambda (x) A: values scaled, timestamps kept.
inline TimeSeries scale(double lambda, const TimeSeries& a) {
  std::vector<double> values = a.values();
  for (double& v : values) v *= lambda;
  if (a.empty()) return a;
  return TimeSeries(a.dim(), std::move(values), a.times());
}

/// A (+) B, defined on series sharing one timestamp grid.
inline TimeSeries add(const TimeSeries& a, const TimeSeries& b) {
  if (a.size() != b.size()) {
    throw error(errc::length_mismatch,
                "series of lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  if (a.times() != b.times()) throw error(errc::timestamp_mismatch, "timestamp sequences differ");
  if (a.empty()) return a;
  if (a.dim() != b.dim()) throw error(errc::dimension_mismatch, "sample dimensions differ");
  std::vector<double> values = a.values();
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += b.values()[k];
  return TimeSeries(a.dim(), std::move(values), a.times());
}

inline TimeSeries zeros_like(const TimeSeries& a) { return scale(0.0, a); }

}  // namespace twk
