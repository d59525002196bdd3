#include "rba/dynamics.hpp"

#include <cmath>
#include <optional>
#include <ostream>

#include "rba/format.hpp"

namespace rba {

int slice_levels(ThresholdMode mode) {
  return mode == ThresholdMode::BelowFirstExcited ? 2 : 3;
}

StateVector initial_state(int n) {
  if (n < 1 || n > 24) throw std::invalid_argument("initial_state: n outside [1, 24]");
  const std::size_t dim = std::size_t{1} << n;
  return StateVector(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

namespace {

void check_orthonormal(std::span<const StateVector> subspace, std::size_t dim) {
  for (std::size_t i = 0; i < subspace.size(); ++i) {
    if (subspace[i].size() != dim)
      throw std::invalid_argument("reflect: subspace vector dimension mismatch");
    for (std::size_t j = i; j < subspace.size(); ++j) {
      const double g = dot(subspace[i], subspace[j]);
      const double expect = i == j ? 1.0 : 0.0;
      if (std::abs(g - expect) > 1e-10)
        throw std::invalid_argument("reflect: subspace is not orthonormal (gram deviation " +
                                    g17(std::abs(g - expect)) + ")");
    }
  }
}

}  // namespace

StateVector reflect(const StateVector& state, std::span<const StateVector> subspace) {
  check_orthonormal(subspace, state.size());
  StateVector out = state;
  // All coefficients come from the original state; for an orthonormal set the
  // order of subtraction is then irrelevant.
  for (const auto& u : subspace) axpy(-2.0 * dot(state, u), u, out);
  return out;
}

double expected_energy(const StateVector& state, const HamiltonianPair& ham) {
  if (state.size() != ham.h1_diag.size())
    throw std::invalid_argument("expected_energy: dimension mismatch");
  const double nn = norm(state);
  if (std::abs(nn - 1.0) > 1e-10)
    throw std::invalid_argument("expected_energy: state is not unit norm");
  double e = 0.0;
  for (std::size_t b = 0; b < state.size(); ++b) e += state[b] * state[b] * ham.h1_diag[b];
  return e;
}

double success_probability(const StateVector& state, const BruteForceResult& optimum) {
  double p = 0.0;
  for (std::uint64_t b : optimum.optimal_assignments) {
    if (b >= state.size())
      throw std::invalid_argument("success_probability: assignment outside the state space");
    p += state[b] * state[b];
  }
  return p;
}

RbaOutcome run_rba(const ProblemContext& ctx, std::span<const double> weights,
                   ThresholdMode mode, SliceCache* cache) {
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (!(weights[i] >= 0.0 && weights[i] <= 1.0))
      throw std::invalid_argument("run_rba: weight " + std::to_string(i + 1) + " = " +
                                  g17(weights[i]) + " outside [0, 1]");
  const int need = slice_levels(mode);
  std::optional<SliceCache> local;
  if (cache == nullptr) {
    local.emplace(ctx, need);
    cache = &*local;
  } else if (cache->k_distinct() < need) {
    throw std::invalid_argument("run_rba: slice cache resolves too few levels for this mode");
  }

  RbaOutcome out;
  out.final_state = initial_state(ctx.n());
  out.per_step_gaps.reserve(weights.size());

  for (std::size_t i = 0; i < weights.size(); ++i) {
    const int step = static_cast<int>(i) + 1;
    const double w = weights[i];
    try {
      const SpectrumSlice& s = cache->get(w);
      if (mode == ThresholdMode::BelowFirstExcited) {
        out.per_step_gaps.push_back(s.gap01());
        out.final_state = reflect(out.final_state, std::span<const StateVector>(s.ground_basis));
      } else {
        if (!s.first_excited_complete)
          throw std::runtime_error("first excited level not fully resolved");
        if (!s.e2)
          throw std::runtime_error("no second excited level in this spectrum");
        out.per_step_gaps.push_back(*s.gap02());
        std::vector<StateVector> span_vecs;
        span_vecs.reserve(s.ground_basis.size() + s.first_excited_basis.size());
        for (const auto& v : s.ground_basis) span_vecs.push_back(v);
        for (const auto& v : s.first_excited_basis) span_vecs.push_back(v);
        out.final_state = reflect(out.final_state, span_vecs);
      }
    } catch (const RbaStepError&) {
      throw;
    } catch (const std::exception& e) {
      throw RbaStepError("run_rba: reflection " + std::to_string(step) + " (w = " + g17(w) +
                             ") failed: " + e.what(),
                         step, w);
    }
  }

  out.p_success = success_probability(out.final_state, ctx.optimum);
  out.expected_energy = expected_energy(out.final_state, ctx.ham);
  return out;
}

OverlapDeltas overlap_deltas(const StateVector& initial, const StateVector& final_state,
                             const StateVector& axis) {
  if (initial.size() != final_state.size() || initial.size() != axis.size())
    throw std::invalid_argument("overlap_deltas: dimension mismatch");
  for (const StateVector* v : {&initial, &final_state, &axis})
    if (std::abs(norm(*v) - 1.0) > 1e-10)
      throw std::invalid_argument("overlap_deltas: states must be unit norm");
  const double fi = dot(final_state, initial);
  const double fk = dot(final_state, axis);
  const double ki = dot(axis, initial);
  OverlapDeltas d;
  d.dP = std::abs(fk * ki) - std::abs(fi);
  d.dR = std::abs(fi - 2.0 * fk * ki) - std::abs(fi);
  return d;
}

void write_state_csv(const StateVector& state, std::ostream& out) {
  out << "basis_index,amplitude\n";
  for (std::size_t b = 0; b < state.size(); ++b) out << b << ',' << g17(state[b]) << '\n';
}

}  // namespace rba
