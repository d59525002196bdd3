#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rba/dynamics.hpp"
#include "rba/problem.hpp"
#include "rba/rational.hpp"

namespace rba {

enum class Provenance { Equidistant, Optimized };

// An ordered reflection schedule. Weights are reported in execution order;
// optimized schedules are not forced monotone.
struct Schedule {
  std::vector<double> weights;
  ThresholdMode mode = ThresholdMode::BelowFirstExcited;
  Provenance provenance = Provenance::Equidistant;

  int length() const { return static_cast<int>(weights.size()); }
};

// L interior weights k / (L + 1), k = 1..L, all strictly inside (0, 1).
// L = 0 yields an empty schedule (no reflections).
Schedule equidistant(int L, ThresholdMode mode);

// Expected repetitions until a success is seen with probability 1 - epsilon:
// log(epsilon) / log(1 - p_success), clamped to at least 1. p_success = 1
// gives 1; p_success = 0 gives +inf.
double repetition_factor(double p_success, double epsilon);

// One time-to-solution measurement. For the reflection algorithm, cost is
// the sum over executed reflections of 2 * r / gap_k, scaled by the
// repetition factor; Grover records use the same container.
struct TtsRecord {
  std::string algorithm;  // "rba" or "grover"
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
  int L_or_nit = 0;
  double p_success = 0.0;
  std::vector<double> gaps;
  double epsilon = 0.0;
  double tts = 0.0;
  bool valid = true;  // false when p_success == 0 (tts is +inf)
};

TtsRecord rba_tts(const ProblemContext& ctx, int L, double p_success,
                  std::span<const double> gaps, double epsilon);

struct NelderMeadConfig {
  int max_evals = 0;          // 0 means 200 * L
  std::uint64_t seed = 0;     // deterministic initial-simplex jitter
  double simplex_tol = 1e-4;  // stop when the simplex diameter shrinks below
  double objective_tol = 1e-8;
};

struct OptimizeResult {
  Schedule schedule;
  double p_fail = 1.0;  // objective at the returned schedule
  int evaluations = 0;
  bool converged = true;  // false when stopped by the evaluation budget
};

// Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2) on
// failure probability over L weights, started from the equidistant schedule.
// Weights outside (0, 1] are rejected by penalty without running the
// simulator. The returned schedule is never worse than the equidistant start,
// and the reported p_fail is the objective re-evaluated at the returned
// weights. Returns the best vertex sorted ascending whenever sorting does not
// hurt the objective.
OptimizeResult optimize_weights(const ProblemContext& ctx, int L, ThresholdMode mode,
                                const NelderMeadConfig& cfg = {}, SliceCache* cache = nullptr);

struct SweepEntry {
  int L = 0;
  Schedule schedule;
  double p_success = 0.0;
  std::vector<double> gaps;
  double tts = 0.0;
};

struct SweepConfig {
  double epsilon = 0.1;
  int patience = 2;   // stop after this many consecutive TTS increases
  int max_L = 30;
  bool optimize = false;
  NelderMeadConfig nm;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // L = 1, 2, ... in order
  int best_L = 0;                   // argmin TTS (ties -> smaller L)
  double best_tts = 0.0;
  std::string stop_reason;          // "patience" or "max_L"
};

// Scans L upward, recording TTS per L, and stops once TTS has increased for
// `patience` consecutive values of L (or max_L is reached).
SweepResult sweep_L(const ProblemContext& ctx, ThresholdMode mode, const SweepConfig& cfg);

// Decision core of the sweep stop rule, separated for direct testing: true
// when the last `patience` consecutive steps of the TTS sequence were all
// strict increases.
bool sweep_should_stop(std::span<const double> tts, int patience);

}  // namespace rba
