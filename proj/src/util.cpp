#include "gw/util.hpp"

#include <algorithm>
#include <numeric>

namespace gw {

namespace {

template <class Combine>
double pairwise_reduce(std::span<const double> xs, double empty, Combine comb) {
  const std::size_t n = xs.size();
  if (n == 0) return empty;
  if (n == 1) return xs[0];
  const std::size_t half = n / 2;
  return comb(pairwise_reduce(xs.first(half), empty, comb),
              pairwise_reduce(xs.subspan(half), empty, comb));
}

}  // namespace

double log_sum_exp(std::span<const double> xs) {
  return pairwise_reduce(xs, kNegInf, [](double a, double b) { return log_add(a, b); });
}

double pairwise_sum(std::span<const double> xs) {
  return pairwise_reduce(xs, 0.0, [](double a, double b) { return a + b; });
}

std::vector<double> project_simplex(std::span<const double> y) {
  // Sort-based projection: find the largest k with u_k + (1 - sum_{i<=k} u_i)/k > 0.
  std::vector<double> u(y.begin(), y.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  int k = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) {
      theta = t;
      k = static_cast<int>(i + 1);
    }
  }
  (void)k;
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::max(0.0, y[i] - theta);
  return out;
}

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : key_(mix(mix(master_seed) ^ mix(stream_id ^ 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::next_u64() { return mix(key_ + 0xA0761D6478BD642FULL * ++counter_); }

double CounterRng::next_unit() {
  // 53 significant bits, shifted into the open interval.
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double log_multinomial(int n, std::span<const int> counts) {
  double lg = std::lgamma(static_cast<double>(n) + 1.0);
  for (int c : counts) lg -= std::lgamma(static_cast<double>(c) + 1.0);
  return lg;
}

}  // namespace gw
