#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "vrclt/matrix.hpp"

namespace vrclt {

struct SampleMoments {
  int64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;         // unbiased (n-1)
  double skewness = 0.0;         // m3 / m2^{3/2}
  double excess_kurtosis = 0.0;  // m4 / m2^2 - 3
};
SampleMoments sample_moments(const std::vector<double>& xs);

// Sample mean and unbiased sample covariance of row vectors; needs n >= 2.
std::pair<Vector, Matrix> mean_and_covariance(const std::vector<Vector>& samples);

// Two-sided Kolmogorov-Smirnov distance sup |F_n - cdf|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Type-7 (linear interpolation) quantile of already sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p);

struct Histogram {
  std::vector<double> edges;    // bin i covers [edges[i], edges[i+1])
  std::vector<int64_t> counts;  // size edges.size() - 1
};
// Bin width 2*IQR*n^{-1/3} (Freedman-Diaconis); degenerates to one bin when
// the IQR vanishes.
Histogram freedman_diaconis_histogram(std::vector<double> samples);

// ||a - ref||_F / ||ref||_F.
double relative_frobenius_distance(const Matrix& a, const Matrix& ref);

// Least-squares slope and intercept of ys on xs.
std::pair<double, double> least_squares_fit(const std::vector<double>& xs,
                                            const std::vector<double>& ys);

}  // namespace vrclt
