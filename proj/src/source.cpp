#include "gw/source.hpp"

#include <cmath>
#include <set>

#include "gw/errors.hpp"

namespace gw {

void validate_pmf(const std::vector<double>& p, double tol) {
  if (p.empty()) throw Error("pmf is empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw NegativeEntry("pmf entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol)
    throw Error("pmf entries sum to " + std::to_string(sum) + ", expected 1 within tolerance");
}

void FiniteSource::validate() const {
  if (symbols.size() != pmf.size())
    throw DimensionMismatch("symbol count does not match pmf length");
  std::set<std::string> seen(symbols.begin(), symbols.end());
  if (seen.size() != symbols.size()) throw Error("duplicate symbol labels");
  validate_pmf(pmf);
}

FiniteSource uniform_source(int m) {
  FiniteSource s;
  for (int i = 0; i < m; ++i) s.symbols.push_back(std::to_string(i));
  s.pmf.assign(m, 1.0 / m);
  return s;
}

}  // namespace gw
