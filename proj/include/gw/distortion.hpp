#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gw/source.hpp"
#include "gw/util.hpp"

namespace gw {

// Exact integer view of a rational distortion table: d(x,xh) = num(x,xh)/den,
// delta = delta_num/delta_den. Lets block feasibility be decided without
// floating-point boundary ambiguity.
struct ExactDistortion {
  std::vector<std::int64_t> num;  // rows*cols, row-major
  std::int64_t den = 1;
  std::int64_t delta_num = 0;
  std::int64_t delta_den = 1;

  std::int64_t at(int x, int xh, int cols) const {
    return num[static_cast<std::size_t>(x) * cols + xh];
  }
};

struct DistortionModel {
  std::vector<std::string> source_alphabet;
  std::vector<std::string> repro_alphabet;
  Mat d;            // |X| x |Xh|, nonnegative finite entries
  double delta = 0.0;
  std::optional<ExactDistortion> exact;  // present iff every entry and delta were given as rationals

  int nx() const { return d.rows; }
  int nxh() const { return d.cols; }
  double max_entry() const;

  // Shape/negativity/finiteness checks. Ball nonemptiness is checked by
  // build_ball_index, which is where it can name the offending symbol.
  void validate() const;
};

// Forward balls A_delta(x) and reverse balls B_delta(xh), as index lists plus a
// dense membership table.
struct BallIndex {
  int nx = 0, nxh = 0;
  std::vector<std::vector<int>> forward;   // x  -> sorted list of xh with d(x,xh) <= delta
  std::vector<std::vector<int>> reverse;   // xh -> sorted list of x
  std::vector<char> member;                // nx*nxh

  bool contains(int x, int xh) const {
    return member[static_cast<std::size_t>(x) * nxh + xh] != 0;
  }
};

// Exact comparison d <= delta, no tolerance: callers wanting slack pre-inflate
// delta. Throws EmptyBall if some forward ball is empty.
BallIndex build_ball_index(const DistortionModel& model);

// Arithmetic mean of per-letter distortions. Throws LengthMismatch.
double block_distortion(std::span<const int> x_seq, std::span<const int> xh_seq,
                        const DistortionModel& model);

// d_n(x,xh) <= delta, decided in exact integer arithmetic when the model
// carries a rational table, otherwise by exact <= on the floating mean.
bool block_ball_membership(std::span<const int> x_seq, std::span<const int> xh_seq,
                           const DistortionModel& model);

// Convenience builders used across tests and the CLI.
DistortionModel hamming_model(int m, double delta);
DistortionModel make_model(std::vector<std::string> src, std::vector<std::string> rep,
                           Mat d, double delta);

}  // namespace gw
