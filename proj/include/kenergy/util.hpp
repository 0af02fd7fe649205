#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace kenergy {

/// Error taxonomy. Everything user-facing derives from Error so the CLI can
/// catch one type and map it to a nonzero exit status with a readable message.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct ConfigError : Error {
  using Error::Error;
};
struct GridError : Error {
  using Error::Error;
};
/// Metric not positive definite at some node (left the Kaehler cone).
struct AdmissibilityError : Error {
  using Error::Error;
};
struct SolveError : Error {
  using Error::Error;
};
/// NaN/Inf encountered, or a finite-difference probe flagged as unstable.
struct NumericsError : Error {
  using Error::Error;
};

/// Neumaier compensated accumulator: deterministic, order-sensitive summation
/// with a running error term, so large cancellations in curvature integrands
/// do not eat the tolerance budget.
class Accum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double total() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Gauss–Legendre nodes and weights on [-1, 1], Newton iteration on the
/// three-term recurrence. Accurate to round-off for the orders used here.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw GridError("gauss_legendre: need at least one node");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

/// Gauss–Legendre transplanted to [a, b].
inline void gauss_legendre(int n, double a, double b, std::vector<double>& x,
                           std::vector<double>& w) {
  gauss_legendre(n, x, w);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    x[i] = mid + half * x[i];
    w[i] *= half;
  }
}

/// Deterministic parallel reduction: the index range is cut into fixed-size
/// chunks independent of the thread count, each chunk is summed with a
/// compensated accumulator, and the chunk totals are combined in index order.
/// Same bits for every value of `threads`.
inline double parallel_reduce(std::size_t count, int threads,
                              const std::function<double(std::size_t)>& term) {
  constexpr std::size_t kChunk = 1024;
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  auto run_chunk = [&](std::size_t c) {
    Accum acc;
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(count, lo + kChunk);
    for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
    partial[c] = acc.total();
  };
  if (threads <= 1 || nchunks <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&]() {
      for (;;) {
        std::size_t c;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= nchunks || failure) return;
          c = next++;
        }
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    const int nt = static_cast<int>(std::min<std::size_t>(threads, nchunks));
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  Accum total;
  for (double p : partial) total.add(p);
  return total.total();
}

inline void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericsError(std::string("non-finite value in ") + what);
}

}  // namespace kenergy
