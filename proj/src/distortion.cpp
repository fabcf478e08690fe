#include "gw/distortion.hpp"

#include <cmath>

#include "gw/errors.hpp"

namespace gw {

double DistortionModel::max_entry() const {
  double m = 0.0;
  for (double v : d.a) m = std::max(m, v);
  return m;
}

void DistortionModel::validate() const {
  if (d.rows <= 0 || d.cols <= 0) throw DimensionMismatch("distortion matrix is empty");
  if (static_cast<int>(source_alphabet.size()) != d.rows ||
      static_cast<int>(repro_alphabet.size()) != d.cols)
    throw DimensionMismatch("alphabet sizes do not match distortion matrix shape");
  for (double v : d.a)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw NegativeEntry("distortion entries must be finite and >= 0");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw NegativeEntry("delta must be finite and >= 0");
  if (exact) {
    if (exact->num.size() != d.a.size()) throw DimensionMismatch("exact table shape mismatch");
    if (exact->den <= 0 || exact->delta_den <= 0) throw Error("exact denominators must be positive");
  }
}

BallIndex build_ball_index(const DistortionModel& model) {
  model.validate();
  BallIndex b;
  b.nx = model.nx();
  b.nxh = model.nxh();
  b.forward.resize(b.nx);
  b.reverse.resize(b.nxh);
  b.member.assign(static_cast<std::size_t>(b.nx) * b.nxh, 0);
  for (int x = 0; x < b.nx; ++x) {
    for (int xh = 0; xh < b.nxh; ++xh) {
      if (model.d(x, xh) <= model.delta) {
        b.forward[x].push_back(xh);
        b.reverse[xh].push_back(x);
        b.member[static_cast<std::size_t>(x) * b.nxh + xh] = 1;
      }
    }
    if (b.forward[x].empty()) throw EmptyBall(x, model.source_alphabet[x]);
  }
  return b;
}

double block_distortion(std::span<const int> x_seq, std::span<const int> xh_seq,
                        const DistortionModel& model) {
  if (x_seq.size() != xh_seq.size() || x_seq.empty())
    throw LengthMismatch("sequences must have equal positive length");
  double sum = 0.0;
  for (std::size_t i = 0; i < x_seq.size(); ++i) sum += model.d(x_seq[i], xh_seq[i]);
  return sum / static_cast<double>(x_seq.size());
}

bool block_ball_membership(std::span<const int> x_seq, std::span<const int> xh_seq,
                           const DistortionModel& model) {
  if (x_seq.size() != xh_seq.size() || x_seq.empty())
    throw LengthMismatch("sequences must have equal positive length");
  if (model.exact) {
    const auto& e = *model.exact;
    // sum_i num_i/den <= n * delta_num/delta_den, cross-multiplied in 128 bits.
    __int128 total = 0;
    for (std::size_t i = 0; i < x_seq.size(); ++i)
      total += e.at(x_seq[i], xh_seq[i], model.nxh());
    const __int128 lhs = total * e.delta_den;
    const __int128 rhs = static_cast<__int128>(x_seq.size()) * e.delta_num * e.den;
    return lhs <= rhs;
  }
  return block_distortion(x_seq, xh_seq, model) <= model.delta;
}

DistortionModel make_model(std::vector<std::string> src, std::vector<std::string> rep,
                           Mat d, double delta) {
  DistortionModel m;
  m.source_alphabet = std::move(src);
  m.repro_alphabet = std::move(rep);
  m.d = std::move(d);
  m.delta = delta;
  m.validate();
  return m;
}

DistortionModel hamming_model(int m, double delta) {
  Mat d(m, m, 1.0);
  for (int i = 0; i < m; ++i) d(i, i) = 0.0;
  std::vector<std::string> labels;
  for (int i = 0; i < m; ++i) labels.push_back(std::to_string(i));
  DistortionModel model = make_model(labels, labels, std::move(d), delta);
  ExactDistortion e;
  e.num.assign(static_cast<std::size_t>(m) * m, 1);
  for (int i = 0; i < m; ++i) e.num[static_cast<std::size_t>(i) * m + i] = 0;
  e.den = 1;
  // delta as an exact rational only when it is one in double already
  // (k/2^j values round-trip; that covers the 0, 0.25, 0.5 style thresholds).
  e.delta_den = 1LL << 32;
  e.delta_num = static_cast<std::int64_t>(std::llround(delta * static_cast<double>(1LL << 32)));
  if (static_cast<double>(e.delta_num) / static_cast<double>(e.delta_den) == delta)
    model.exact = e;
  return model;
}

}  // namespace gw
