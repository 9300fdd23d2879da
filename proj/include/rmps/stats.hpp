#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rmps {

// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);
// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
double sample_stddev(std::span<const double> values);
// sample_stddev / √n.
double standard_error(std::span<const double> values);

// Delete-a-group jackknife standard error of `statistic` over per-sample
// items 0..n-1. `statistic` receives the sorted indices of the retained items.
// Items are split into min(n, max_groups) contiguous groups.
double jackknife_stderr(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                        std::size_t max_groups = 50);

// Standard error of the sample standard deviation (jackknife over samples).
double stddev_stderr(std::span<const double> values);

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<long> counts;
  long total = 0;

  // `bins` uniform bins on [lo, hi]. Values within `slack` outside the range
  // land in the end bins; anything further out throws.
  static Histogram uniform(double lo, double hi, int bins);
  void add(double value, double slack = 1e-10);
};

// Runs fn(i) for i in [0, n) on `workers` threads. Work is claimed by index, so
// the set of (i, fn(i)) pairs does not depend on the worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

template <typename T>
std::vector<T> parallel_map(std::size_t n, int workers, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  parallel_for(n, workers, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

int default_workers();

}  // namespace rmps
