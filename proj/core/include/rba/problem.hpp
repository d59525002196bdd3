#pragma once

#include <cstdint>
#include <vector>

#include "rba/hamiltonian.hpp"
#include "rba/instance.hpp"

namespace rba {

// Everything the dynamics and scheduling layers need about one problem:
// the instance, its exhaustively computed optima, and the normalized
// Hamiltonian pair.
struct ProblemContext {
  SatInstance inst;
  BruteForceResult optimum;
  HamiltonianPair ham;

  int n() const { return ham.n; }
  std::size_t dim() const { return ham.h1_diag.size(); }
  double ratio_value() const { return inst.ratio().value(); }
};

ProblemContext make_problem(SatInstance inst, BoundMode mode = BoundMode::Ideal);

// Synthetic problem from a raw diagonal; the "optima" are its argmin set.
ProblemContext make_problem_from_diagonal(int n, std::vector<double> raw_diagonal);

}  // namespace rba
