#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stpn::stats {

inline constexpr double undefined = std::numeric_limits<double>::quiet_NaN();

[[nodiscard]] inline double mean(std::span<const double> xs) {
  if (xs.empty())
    return undefined;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Sample standard deviation (n - 1 denominator).
[[nodiscard]] inline double stddev(std::span<const double> xs) {
  if (xs.size() < 2)
    return xs.empty() ? undefined : 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs)
    ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Nearest-rank percentile, p in [0, 100].
[[nodiscard]] inline double percentile(std::vector<double> xs, double p) {
  if (xs.empty())
    return undefined;
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, xs.size());
  return xs[rank - 1];
}

// Pearson coefficient; NaN when either side has zero variance.
[[nodiscard]] inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2)
    return undefined;
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    return undefined;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Ranks starting at 1, ties share their average rank.
[[nodiscard]] inline std::vector<double> ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]])
      ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      out[order[k]] = r;
    i = j + 1;
  }
  return out;
}

[[nodiscard]] inline double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x), ry = ranks(y);
  return pearson(rx, ry);
}

//==============================================================================

// Labeled matrix of coefficients. Undefined entries (zero variance) are NaN.
struct correlation_matrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> values; // row-major
  std::size_t samples = 0;

  [[nodiscard]] double at(std::size_t row, std::size_t col) const {
    return values[row * col_labels.size() + col];
  }
  [[nodiscard]] bool defined(std::size_t row, std::size_t col) const {
    return !std::isnan(at(row, col));
  }
  [[nodiscard]] std::size_t row_of(const std::string &label) const { return find(row_labels, label); }
  [[nodiscard]] std::size_t col_of(const std::string &label) const { return find(col_labels, label); }
  [[nodiscard]] double at(const std::string &row, const std::string &col) const {
    return at(row_of(row), col_of(col));
  }

  [[nodiscard]] correlation_matrix slice(const std::vector<std::string> &rows,
                                         const std::vector<std::string> &cols) const {
    correlation_matrix out;
    out.row_labels = rows;
    out.col_labels = cols;
    out.samples = samples;
    for (const auto &r : rows)
      for (const auto &c : cols)
        out.values.push_back(at(r, c));
    return out;
  }

private:
  static std::size_t find(const std::vector<std::string> &labels, const std::string &label) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
      throw std::out_of_range("correlation_matrix: no variable '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
  }
};

enum class correlation_method { pearson, spearman };

// Square matrix over all columns.
[[nodiscard]] inline correlation_matrix correlate_columns(const std::vector<std::string> &labels,
                                                          const std::vector<std::vector<double>> &columns,
                                                          correlation_method method = correlation_method::pearson) {
  if (labels.size() != columns.size())
    throw std::invalid_argument("correlate_columns: label/column mismatch");
  correlation_matrix m;
  m.row_labels = labels;
  m.col_labels = labels;
  m.samples = columns.empty() ? 0 : columns.front().size();
  std::vector<std::vector<double>> data = columns;
  if (method == correlation_method::spearman)
    for (auto &c : data)
      c = ranks(c);
  const std::size_t n = labels.size();
  m.values.assign(n * n, undefined);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double r = i == j ? (std::isnan(pearson(data[i], data[i])) ? undefined : 1.0)
                              : pearson(data[i], data[j]);
      m.values[i * n + j] = r;
      m.values[j * n + i] = r;
    }
  return m;
}

} // namespace stpn::stats
