#include "vrclt/stats.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace vrclt {

SampleMoments sample_moments(const std::vector<double>& xs) {
  SampleMoments m;
  m.n = static_cast<int64_t>(xs.size());
  if (m.n == 0) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / static_cast<double>(m.n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(m.n);
  m.variance = m.n > 1 ? m2 / (n - 1.0) : 0.0;
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

std::pair<Vector, Matrix> mean_and_covariance(const std::vector<Vector>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("mean_and_covariance: need at least 2 samples");
  const int n = static_cast<int>(samples.size());
  const int m = static_cast<int>(samples[0].size());
  Vector mean(m, 0.0);
  for (const auto& x : samples) {
    assert(static_cast<int>(x.size()) == m);
    for (int j = 0; j < m; ++j) mean[j] += x[j];
  }
  for (int j = 0; j < m; ++j) mean[j] /= n;
  Matrix cov(m, m);
  for (const auto& x : samples) {
    for (int i = 0; i < m; ++i) {
      const double di = x[i] - mean[i];
      for (int j = i; j < m; ++j) cov(i, j) += di * (x[j] - mean[j]);
    }
  }
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      cov(i, j) /= (n - 1);
      cov(j, i) = cov(i, j);
    }
  return {mean, cov};
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

double sorted_quantile(const std::vector<double>& sorted, double p) {
  assert(!sorted.empty() && p >= 0.0 && p <= 1.0);
  const double h = p * (static_cast<double>(sorted.size()) - 1.0);
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = h - static_cast<double>(lo);
  return sorted[lo] * (1.0 - w) + sorted[lo + 1] * w;
}

Histogram freedman_diaconis_histogram(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("histogram: empty sample");
  std::sort(samples.begin(), samples.end());
  const double lo = samples.front(), hi = samples.back();
  const double iqr = sorted_quantile(samples, 0.75) - sorted_quantile(samples, 0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(samples.size()));
  Histogram h;
  if (!(width > 0.0) || !(hi > lo)) {
    h.edges = {lo, std::nextafter(hi + 1.0, 1e308)};
    h.counts = {static_cast<int64_t>(samples.size())};
    return h;
  }
  const int bins = static_cast<int>(std::ceil((hi - lo) / width));
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + width * i;
  h.edges.back() = std::max(h.edges.back(), std::nextafter(hi, 1e308));
  h.counts.assign(bins, 0);
  for (double x : samples) {
    int b = static_cast<int>((x - lo) / width);
    b = std::min(std::max(b, 0), bins - 1);
    // Guard against rounding placing x below edges[b] or at/above edges[b+1].
    while (b > 0 && x < h.edges[b]) --b;
    while (b + 1 < bins && x >= h.edges[b + 1]) ++b;
    ++h.counts[b];
  }
  return h;
}

double relative_frobenius_distance(const Matrix& a, const Matrix& ref) {
  const double denom = ref.frobenius_norm();
  if (denom == 0.0) return a.frobenius_norm() == 0.0 ? 0.0 : 1e308;
  return (a - ref).frobenius_norm() / denom;
}

std::pair<double, double> least_squares_fit(const std::vector<double>& xs,
                                            const std::vector<double>& ys) {
  assert(xs.size() == ys.size() && xs.size() >= 2);
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

}  // namespace vrclt
