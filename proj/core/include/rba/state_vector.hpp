#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace rba {

// Real amplitude vector over the computational basis. Every operator in this
// codebase is real symmetric, so real storage suffices.
struct StateVector {
  std::vector<double> amps;

  StateVector() = default;
  explicit StateVector(std::size_t dim, double value = 0.0) : amps(dim, value) {}

  std::size_t size() const { return amps.size(); }
  double* data() { return amps.data(); }
  const double* data() const { return amps.data(); }
  double& operator[](std::size_t i) { return amps[i]; }
  double operator[](std::size_t i) const { return amps[i]; }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

inline double dot(const StateVector& a, const StateVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y += alpha * x
inline void axpy(double alpha, const StateVector& x, StateVector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double norm(const StateVector& a) { return std::sqrt(dot(a, a)); }

inline void scale(StateVector& a, double alpha) {
  for (auto& v : a.amps) v *= alpha;
}

}  // namespace rba
