#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rba/instance.hpp"
#include "rba/state_vector.hpp"

namespace rba {

// Diagonal of the clause Hamiltonian in the computational basis. Each clause
// contributes +3 when violated and -1 when satisfied, i.e.
// values[b] = 4 * unsatisfied(b) - |clauses|.
struct DiagonalEnergies {
  int n = 0;
  std::vector<double> values;

  double min() const;
  double max() const;
};

// Guarded to n <= 24.
DiagonalEnergies build_diagonal(const SatInstance& inst);

// y = H_transverse x with H_transverse = -sum_k X_k, so
// y[b] = -sum_k x[b ^ (1 << k)]. Spectrum is {-n + 2m} with multiplicity
// C(n, m); the ground state is the uniform superposition at -n.
void apply_transverse(int n, const StateVector& x, StateVector& y);

// How the clause Hamiltonian's spectral width is bounded when rescaling:
// Ideal uses the exact max - min of the diagonal, Heuristic uses 4 * |clauses|
// (always an upper bound, so energies stay strictly below 2*pi).
enum class BoundMode { Ideal, Heuristic };

// Affine maps that place both Hamiltonians' spectra in [0, 2*pi), with the
// ground energy at exactly 0. normalized = scale * (raw - shift). The factor
// (1 - 2^-32) keeps the top of the spectrum strictly below 2*pi.
struct NormalizedPair {
  double h0_shift = 0.0;
  double h0_scale = 0.0;
  double h1_shift = 0.0;
  double h1_scale = 0.0;
};

// For the transverse part the extremal eigenvalues are -n and +n analytically;
// for the clause part they come from the diagonal. A flat diagonal
// (max == min) is rejected as a constant Hamiltonian under Ideal bounds.
// Heuristic mode needs the clause count; pass it via num_clauses.
NormalizedPair normalize(const DiagonalEnergies& diag, BoundMode mode = BoundMode::Ideal,
                         std::int64_t num_clauses = -1);

// Normalized interpolation data for one instance: everything needed to apply
// H_w = (1 - w) H0 + w H1 without touching the instance again.
struct HamiltonianPair {
  int n = 0;
  DiagonalEnergies raw;         // clause diagonal before normalization
  NormalizedPair norm;
  std::vector<double> h1_diag;  // norm.h1_scale * (raw - norm.h1_shift)
};

HamiltonianPair make_hamiltonians(const SatInstance& inst, BoundMode mode = BoundMode::Ideal);

// Synthetic variant for tests and engineered problems: takes the clause
// diagonal directly. Only Ideal bounds are meaningful here.
HamiltonianPair make_hamiltonians_from_diagonal(int n, std::vector<double> raw_diagonal);

struct InterpolatedHamiltonian {
  const HamiltonianPair* pair = nullptr;
  double w = 0.0;

  int n() const { return pair->n; }
  std::size_t dim() const { return pair->h1_diag.size(); }

  // y = H_w x. Linear in w between the normalized endpoints.
  void apply(const StateVector& x, StateVector& y) const;
};

// Diagnostic dump: "basis_index,energy" rows of the raw clause diagonal.
void write_diagonal_csv(const DiagonalEnergies& diag, std::ostream& out);

}  // namespace rba
