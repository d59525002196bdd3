#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "rba/eigensolve.hpp"
#include "rba/problem.hpp"
#include "rba/state_vector.hpp"

namespace rba {

// Which eigenspace each reflection goes through: the ground level alone, or
// the ground and first excited levels together. The relevant spectral gap is
// e1 - e0 for the former and e2 - e0 for the latter.
enum class ThresholdMode { BelowFirstExcited, BelowSecondExcited };

// Number of distinct low eigenvalues a slice must resolve for a mode.
int slice_levels(ThresholdMode mode);

// Uniform superposition over all 2^n basis states.
StateVector initial_state(int n);

// state - 2 * P state, P the projector onto span(subspace). The subspace
// must be orthonormal (checked to 1e-10) and match the state's dimension.
StateVector reflect(const StateVector& state, std::span<const StateVector> subspace);

struct RbaOutcome {
  StateVector final_state;
  double p_success = 0.0;            // total weight on optimal assignments
  std::vector<double> per_step_gaps; // one spectral gap per reflection
  double expected_energy = 0.0;      // <final| normalized H1 |final>
};

struct RbaStepError : std::runtime_error {
  int step;   // 1-based index of the failing reflection
  double w;
  RbaStepError(const std::string& msg, int step_, double w_)
      : std::runtime_error(msg), step(step_), w(w_) {}
};

// Runs the reflection sequence: start from the uniform state, reflect through
// the chosen eigenspace of H_w for each weight in order, then read out
// success probability against the brute-force optima. Weights must lie in
// [0, 1]. Slices come from `cache` when given (its k_distinct must cover the
// mode), otherwise from a run-local cache. Eigensolver failures surface as
// RbaStepError carrying the failing step.
RbaOutcome run_rba(const ProblemContext& ctx, std::span<const double> weights,
                   ThresholdMode mode, SliceCache* cache = nullptr);

// <state| normalized H1 |state> for a unit-norm state.
double expected_energy(const StateVector& state, const HamiltonianPair& ham);

// Success weight of a state against the problem's optimal assignments.
double success_probability(const StateVector& state, const BruteForceResult& optimum);

// Single-reflection overlap gains of |<F|.|I>| relative to |<F|I>|:
// dP for the projection P = |k><k|, dR for the reflection 1 - 2P.
// Whenever dP >= 0, dR >= 2 dP. States must be unit norm (checked to 1e-10).
struct OverlapDeltas {
  double dP = 0.0;
  double dR = 0.0;
};
OverlapDeltas overlap_deltas(const StateVector& initial, const StateVector& final_state,
                             const StateVector& axis);

// CSV dump of a state: "basis_index,amplitude".
void write_state_csv(const StateVector& state, std::ostream& out);

}  // namespace rba
