#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace gw {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Dense row-major matrix, just enough for distortion/channel tables.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
  std::span<const double> row(int i) const {
    return {a.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
  }
};

// Extended real used where +infinity is a structured outcome (divergence with
// support mismatch) rather than an arithmetic accident.
struct ExtReal {
  double value = 0.0;
  bool finite = true;

  static ExtReal infinity() { return {0.0, false}; }
  static ExtReal of(double v) { return {v, true}; }
};

// log(e^a + e^b), tolerant of -inf operands.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// Pairwise log-sum-exp over a scratch buffer. The reduction tree depends only
// on the element count, so results are reproducible for any thread layout that
// fills the buffer by index.
double log_sum_exp(std::span<const double> xs);

// Pairwise plain summation (same fixed tree).
double pairwise_sum(std::span<const double> xs);

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::span<const double> y);

// Maximize a unimodal-on-[lo,hi] function by golden section; returns argmax.
double golden_max(double lo, double hi, const auto& f, int iters = 120) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a)); ++i) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = f(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

// Counter-based uniform stream: the j-th draw of stream (seed, stream_id) is a
// pure function of (seed, stream_id, j), so parallel scheduling cannot change
// sampled trajectories.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  // Uniform on (0,1), never exactly 0 or 1.
  double next_unit();

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// log of the multinomial coefficient n! / prod(counts!).
double log_multinomial(int n, std::span<const int> counts);

// Relative-error-free check helpers.
inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace gw
