#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rba/problem.hpp"
#include "rba/state_vector.hpp"

namespace rba {

// Low end of the spectrum of H_w: the lowest two or three distinct
// eigenvalues plus orthonormal bases for the levels the caller asked for.
// Eigenvalues within 1e-9 * max(1, |e0|) of each other belong to one level.
struct SpectrumSlice {
  double w = 0.0;
  double e0 = 0.0;
  double e1 = 0.0;
  std::optional<double> e2;

  std::vector<StateVector> ground_basis;         // complete
  std::vector<StateVector> first_excited_basis;  // complete iff flag below

  // True when the first excited level was resolved in full (k_distinct >= 3
  // or the space was exhausted); otherwise first_excited_basis holds at least
  // one vector and e1 is still exact.
  bool first_excited_complete = false;

  int deg0() const { return static_cast<int>(ground_basis.size()); }
  double gap01() const { return e1 - e0; }
  std::optional<double> gap02() const {
    return e2 ? std::optional<double>(*e2 - e0) : std::nullopt;
  }
};

struct LanczosFailure : std::runtime_error {
  double w;
  int matvecs;
  LanczosFailure(const std::string& msg, double w_, int matvecs_)
      : std::runtime_error(msg), w(w_), matvecs(matvecs_) {}
};

struct LanczosOptions {
  // 2 resolves the ground level plus one witness above it; 3 additionally
  // resolves the first excited level in full and pins e2.
  int k_distinct = 3;
  double resid_tol = 1e-10;  // per accepted eigenpair, verified with a matvec
  int max_matvecs = 5000;    // total budget for the whole slice
  std::uint64_t seed = 0;    // start-vector stream

  // Optional warm starts tried in extraction order. Converged vectors from a
  // nearby w make good hints. Hints only accelerate extraction; the final
  // extraction that certifies level completeness always uses a fresh
  // random start.
  const std::vector<StateVector>* hints = nullptr;
};

// Deflated Lanczos with full reorthogonalization. Eigenpairs are extracted
// one restart at a time from the bottom of the spectrum; a level is declared
// complete only once a random-started extraction converges strictly above it.
// Throws LanczosFailure when max_matvecs is exhausted, and
// std::invalid_argument when the dimension is below 4 (use dense_spectrum).
SpectrumSlice lanczos_lowest(const InterpolatedHamiltonian& h, const LanczosOptions& opt);

struct DenseSpectrum {
  std::vector<double> values;        // ascending
  std::vector<StateVector> vectors;  // orthonormal, matched to values
};

// Full diagonalization. Builds the dense matrix from the interpolation data;
// guarded to n <= 10.
DenseSpectrum dense_spectrum(const InterpolatedHamiltonian& h);

// Slice assembled from a dense spectrum (no iteration, always complete).
SpectrumSlice slice_from_dense(const DenseSpectrum& dense, double w, int k_distinct);

// One slice per weight, in order. Uses dense_spectrum below dimension 4,
// Lanczos otherwise, falling back to dense up to n <= 10 if Lanczos fails to
// converge. Weights must lie in [0, 1].
std::vector<SpectrumSlice> slice_schedule(const ProblemContext& ctx,
                                          std::span<const double> weights, int k_distinct,
                                          const LanczosOptions& base = {});

// Per-problem slice factory with two layers of reuse: an exact-weight MRU
// cache (alternating schedules revisit the same w many times) and a
// nearest-weight hint store that warm-starts Lanczos from the converged
// vectors of a nearby slice. Results are bitwise reproducible for a fixed
// call sequence. Not thread safe; use one per worker.
class SliceCache {
 public:
  SliceCache(const ProblemContext& ctx, int k_distinct, LanczosOptions base = {});

  // The reference stays valid only until the next get() call.
  const SpectrumSlice& get(double w);

  int k_distinct() const { return k_distinct_; }
  std::uint64_t solves() const { return solves_; }

 private:
  const ProblemContext* ctx_;
  int k_distinct_;
  LanczosOptions base_;

  static constexpr std::size_t kMaxExact = 8;
  static constexpr std::size_t kMaxHints = 24;

  struct ExactEntry {
    SpectrumSlice slice;
    std::uint64_t stamp;
  };
  std::map<double, ExactEntry> exact_;

  struct HintEntry {
    double w;
    std::vector<StateVector> vectors;  // converged set, extraction order
  };
  std::vector<HintEntry> hints_;

  std::uint64_t stamp_ = 0;
  std::uint64_t solves_ = 0;

  SpectrumSlice compute(double w);
};

// "w,e0,e1,e2,deg0,gap01,gap02" rows; e2/gap02 empty when unknown.
void write_slices_csv(std::span<const SpectrumSlice> slices, std::ostream& out);

}  // namespace rba
