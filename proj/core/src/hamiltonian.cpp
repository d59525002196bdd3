#include "rba/hamiltonian.hpp"

#include <algorithm>
#include <utility>

#include "rba/problem.hpp"
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace rba {

namespace {

// Keeps every normalized energy strictly below 2*pi.
constexpr double kStrictness = 1.0 - 0x1.0p-32;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double DiagonalEnergies::min() const {
  return *std::min_element(values.begin(), values.end());
}

double DiagonalEnergies::max() const {
  return *std::max_element(values.begin(), values.end());
}

DiagonalEnergies build_diagonal(const SatInstance& inst) {
  if (inst.n > 24) throw std::invalid_argument("build_diagonal: n > 24 is not supported");
  const std::size_t dim = std::size_t{1} << inst.n;
  DiagonalEnergies diag;
  diag.n = inst.n;
  diag.values.assign(dim, -static_cast<double>(inst.clauses.size()));
  // Each violated clause moves the energy from -1 to +3.
  for (const auto& c : inst.clauses) {
    const std::uint64_t bit1 = std::uint64_t{1} << c.first.var;
    const std::uint64_t bit2 = std::uint64_t{1} << c.second.var;
    const std::uint64_t bad1 = c.first.negated ? bit1 : 0;   // value that falsifies the literal
    const std::uint64_t bad2 = c.second.negated ? bit2 : 0;
    for (std::size_t b = 0; b < dim; ++b) {
      if ((b & bit1) == bad1 && (b & bit2) == bad2) diag.values[b] += 4.0;
    }
  }
  return diag;
}

void apply_transverse(int n, const StateVector& x, StateVector& y) {
  const std::size_t dim = std::size_t{1} << n;
  if (x.size() != dim) throw std::invalid_argument("apply_transverse: dimension mismatch");
  y.amps.assign(dim, 0.0);
  for (int k = 0; k < n; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t base = 0; base < dim; base += 2 * bit) {
      for (std::size_t off = 0; off < bit; ++off) {
        const std::size_t i = base + off;
        const std::size_t j = i + bit;
        y[i] -= x[j];
        y[j] -= x[i];
      }
    }
  }
}

NormalizedPair normalize(const DiagonalEnergies& diag, BoundMode mode, std::int64_t num_clauses) {
  if (diag.n < 1) throw std::invalid_argument("normalize: need at least one variable");
  NormalizedPair out;
  out.h0_shift = -static_cast<double>(diag.n);
  out.h0_scale = kTwoPi * kStrictness / (2.0 * diag.n);
  out.h1_shift = diag.min();
  double width = 0.0;
  switch (mode) {
    case BoundMode::Ideal:
      width = diag.max() - diag.min();
      if (width == 0.0)
        throw std::invalid_argument(
            "normalize: constant Hamiltonian (flat clause diagonal cannot be rescaled)");
      break;
    case BoundMode::Heuristic:
      if (num_clauses < 0)
        throw std::invalid_argument("normalize: heuristic bound needs the clause count");
      width = 4.0 * static_cast<double>(num_clauses);
      if (width == 0.0)
        throw std::invalid_argument("normalize: constant Hamiltonian (no clauses)");
      break;
  }
  out.h1_scale = kTwoPi * kStrictness / width;
  return out;
}

namespace {

HamiltonianPair assemble(int n, DiagonalEnergies raw, const NormalizedPair& norm) {
  HamiltonianPair pair;
  pair.n = n;
  pair.raw = std::move(raw);
  pair.norm = norm;
  pair.h1_diag.resize(pair.raw.values.size());
  for (std::size_t b = 0; b < pair.h1_diag.size(); ++b)
    pair.h1_diag[b] = norm.h1_scale * (pair.raw.values[b] - norm.h1_shift);
  return pair;
}

}  // namespace

HamiltonianPair make_hamiltonians(const SatInstance& inst, BoundMode mode) {
  DiagonalEnergies diag = build_diagonal(inst);
  const NormalizedPair norm =
      normalize(diag, mode, static_cast<std::int64_t>(inst.clauses.size()));
  return assemble(inst.n, std::move(diag), norm);
}

HamiltonianPair make_hamiltonians_from_diagonal(int n, std::vector<double> raw_diagonal) {
  if (n < 1 || n > 24) throw std::invalid_argument("make_hamiltonians_from_diagonal: bad n");
  if (raw_diagonal.size() != (std::size_t{1} << n))
    throw std::invalid_argument("make_hamiltonians_from_diagonal: diagonal size != 2^n");
  DiagonalEnergies diag;
  diag.n = n;
  diag.values = std::move(raw_diagonal);
  const NormalizedPair norm = normalize(diag, BoundMode::Ideal);
  return assemble(n, std::move(diag), norm);
}

void InterpolatedHamiltonian::apply(const StateVector& x, StateVector& y) const {
  const std::size_t d = dim();
  if (x.size() != d) throw std::invalid_argument("InterpolatedHamiltonian: dimension mismatch");
  if (w < 0.0 || w > 1.0)
    throw std::invalid_argument("InterpolatedHamiltonian: w outside [0, 1]");
  y.amps.resize(d);
  const int nq = pair->n;
  // (1 - w) * scale0 multiplies the shifted transverse part, whose diagonal
  // piece is n * identity.
  const double a = (1.0 - w) * pair->norm.h0_scale;
  const double diag0 = a * nq;
  const double* h1 = pair->h1_diag.data();
  const double* xin = x.data();
  double* out = y.data();
  if (w == 0.0) {
    for (std::size_t b = 0; b < d; ++b) out[b] = diag0 * xin[b];
  } else {
    for (std::size_t b = 0; b < d; ++b) out[b] = (w * h1[b] + diag0) * xin[b];
  }
  if (a != 0.0) {
    for (int k = 0; k < nq; ++k) {
      const std::size_t bit = std::size_t{1} << k;
      for (std::size_t base = 0; base < d; base += 2 * bit) {
        for (std::size_t off = 0; off < bit; ++off) {
          const std::size_t i = base + off;
          const std::size_t j = i + bit;
          out[i] -= a * xin[j];
          out[j] -= a * xin[i];
        }
      }
    }
  }
}

void write_diagonal_csv(const DiagonalEnergies& diag, std::ostream& out) {
  out << "basis_index,energy\n";
  for (std::size_t b = 0; b < diag.values.size(); ++b) {
    out << b << ',' << diag.values[b] << '\n';
  }
}

ProblemContext make_problem(SatInstance inst, BoundMode mode) {
  ProblemContext ctx;
  ctx.optimum = brute_force(inst);
  ctx.ham = make_hamiltonians(inst, mode);
  ctx.inst = std::move(inst);
  return ctx;
}

ProblemContext make_problem_from_diagonal(int n, std::vector<double> raw_diagonal) {
  ProblemContext ctx;
  ctx.inst.n = n;  // clauseless carrier so ratio() stays well defined (= 0)
  ctx.ham = make_hamiltonians_from_diagonal(n, std::move(raw_diagonal));
  const std::vector<double>& vals = ctx.ham.raw.values;
  const double lo = ctx.ham.raw.min();
  for (std::size_t b = 0; b < vals.size(); ++b)
    if (vals[b] == lo) ctx.optimum.optimal_assignments.push_back(b);
  ctx.optimum.ground_degeneracy = static_cast<int>(ctx.optimum.optimal_assignments.size());
  ctx.optimum.max_satisfied = 0;
  return ctx;
}

}  // namespace rba
