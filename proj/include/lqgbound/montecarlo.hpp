#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <vector>

#include "lqgbound/matcalc.hpp"

namespace lqgbound {

/// Per-rollout random stream. Streams are keyed by (master seed, rollout
/// index) so results do not depend on how rollouts are scheduled.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
  }
  static Rng ForRollout(std::uint64_t master, std::uint64_t index) {
    return Rng(stream_seed(master, index));
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Runs fn(i) for i in [0, n) on all hardware threads. Each call writes only
/// its own output slot, so the caller reduces in index order afterwards.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(
      std::max(1u, std::thread::hardware_concurrency()), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(n, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& samples) {
  MeanSe out;
  const double n = static_cast<double>(samples.size());
  if (samples.empty()) return out;
  for (double s : samples) out.mean += s;
  out.mean /= n;
  if (samples.size() < 2) return out;
  double ss = 0.0;
  for (double s : samples) ss += (s - out.mean) * (s - out.mean);
  out.se = std::sqrt(ss / (n - 1.0) / n);
  return out;
}

/// Entrywise mean and standard error of a list of equally-shaped matrices.
struct MatrixMeanSe {
  Matrix mean;
  Matrix se;
};

inline MatrixMeanSe matrix_mean_se(const std::vector<Matrix>& samples,
                                   Eigen::Index rows, Eigen::Index cols) {
  MatrixMeanSe out{Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)};
  const double n = static_cast<double>(samples.size());
  if (samples.empty()) return out;
  for (const auto& s : samples) out.mean += s;
  out.mean /= n;
  if (samples.size() < 2) return out;
  Matrix ss = Matrix::Zero(rows, cols);
  for (const auto& s : samples) ss += (s - out.mean).cwiseAbs2();
  out.se = (ss / (n - 1.0) / n).cwiseSqrt();
  return out;
}

}  // namespace lqgbound
