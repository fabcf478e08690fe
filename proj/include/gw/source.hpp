#pragma once

#include <string>
#include <vector>

namespace gw {

/// A finite-alphabet source: ordered symbol labels with a probability vector.
/// Labels matter only at the I/O boundary; everything internal is indexed.
struct FiniteSource {
  std::vector<std::string> symbols;
  std::vector<double> pmf;

  int size() const { return static_cast<int>(pmf.size()); }

  // Throws on: negative mass, mass sum off 1 by more than 1e-12, label/pmf
  // length mismatch, duplicate labels.
  void validate() const;
};

FiniteSource uniform_source(int m);

// Throws NegativeEntry / Error unless p is a pmf within tol of unit mass.
void validate_pmf(const std::vector<double>& p, double tol = 1e-12);

}  // namespace gw
