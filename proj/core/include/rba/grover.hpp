#pragma once

#include <optional>

#include "rba/problem.hpp"
#include "rba/schedule.hpp"

namespace rba {

// Closed-form Grover analysis for d marked states among 2^n.
// theta = 2 * asin(sqrt(d / 2^n)); success after j iterations is
// sin^2((j + 1/2) * theta); the optimum is ceil(pi / (2 theta) - 1/2).
struct GroverAnalysis {
  int n = 0;
  int degeneracy = 0;
  double theta = 0.0;
  int n_opt = 0;

  double p_at(int n_it) const;
};

GroverAnalysis grover_analyze(int n, int degeneracy);
GroverAnalysis grover_analyze(const ProblemContext& ctx);

// Smallest iteration count whose failure probability drops below the target.
int iterations_to_failure_target(const GroverAnalysis& g, double max_fail);

// Oracle gap: the clause spectrum's first gap over its full width, scaled to
// the 2*pi energy window: 2*pi * (E1 - E0) / (Emax - E0) over the distinct
// raw diagonal levels. Needs at least two distinct levels.
double grover_gap(const DiagonalEnergies& diag);

// TTS at n_it iterations (default: the closed-form optimum). Cost per run is
// 2 * n_it * r / gap.
TtsRecord grover_tts(const ProblemContext& ctx, const GroverAnalysis& g, double epsilon,
                     std::optional<int> n_it = std::nullopt);

}  // namespace rba
