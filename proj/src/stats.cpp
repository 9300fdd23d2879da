#include "rmps/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace rmps {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(), [m](double v) { return (v - m) * (v - m); });
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(values.size() - 1));
}

double standard_error(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return sample_stddev(values) / std::sqrt(static_cast<double>(values.size()));
}

double jackknife_stderr(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                        std::size_t max_groups) {
  const std::size_t groups = std::min(n, max_groups);
  if (groups < 2) return 0.0;
  std::vector<double> estimates;
  estimates.reserve(groups);
  std::vector<std::size_t> kept;
  kept.reserve(n);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t lo = g * n / groups;
    const std::size_t hi = (g + 1) * n / groups;
    kept.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (i < lo || i >= hi) kept.push_back(i);
    estimates.push_back(statistic(kept));
  }
  const double m = mean(estimates);
  double ss = 0.0;
  for (double e : estimates) ss += (e - m) * (e - m);
  const auto g = static_cast<double>(groups);
  return std::sqrt((g - 1.0) / g * ss);
}

double stddev_stderr(std::span<const double> values) {
  return jackknife_stderr(values.size(), [&](std::span<const std::size_t> kept) {
    std::vector<double> sub;
    sub.reserve(kept.size());
    for (std::size_t i : kept) sub.push_back(values[i]);
    return sample_stddev(sub);
  });
}

Histogram Histogram::uniform(double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("Histogram: need bins >= 1 and hi > lo");
  Histogram h;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  return h;
}

void Histogram::add(double value, double slack) {
  const double lo = bin_edges.front();
  const double hi = bin_edges.back();
  if (!(value >= lo - slack && value <= hi + slack)) {
    throw std::out_of_range("Histogram: value " + std::to_string(value) + " outside range");
  }
  const auto bins = static_cast<long>(counts.size());
  long b = static_cast<long>(std::floor((value - lo) / (hi - lo) * static_cast<double>(bins)));
  b = std::clamp(b, 0L, bins - 1);
  ++counts[static_cast<std::size_t>(b)];
  ++total;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto w = static_cast<std::size_t>(std::max(1, workers));
  if (w == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(w, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace rmps
