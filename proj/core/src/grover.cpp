#include "rba/grover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rba {

double GroverAnalysis::p_at(int n_it) const {
  if (n_it < 0) throw std::invalid_argument("GroverAnalysis::p_at: negative iteration count");
  const double s = std::sin((n_it + 0.5) * theta);
  return s * s;
}

GroverAnalysis grover_analyze(int n, int degeneracy) {
  if (n < 1 || n > 40) throw std::invalid_argument("grover_analyze: n outside [1, 40]");
  const double dim = std::pow(2.0, n);
  if (degeneracy < 1 || static_cast<double>(degeneracy) > dim)
    throw std::invalid_argument("grover_analyze: degeneracy outside [1, 2^n]");
  GroverAnalysis g;
  g.n = n;
  g.degeneracy = degeneracy;
  g.theta = 2.0 * std::asin(std::sqrt(static_cast<double>(degeneracy) / dim));
  g.n_opt = static_cast<int>(std::ceil(std::numbers::pi / (2.0 * g.theta) - 0.5));
  return g;
}

GroverAnalysis grover_analyze(const ProblemContext& ctx) {
  return grover_analyze(ctx.n(), ctx.optimum.ground_degeneracy);
}

int iterations_to_failure_target(const GroverAnalysis& g, double max_fail) {
  if (!(max_fail > 0.0 && max_fail < 1.0))
    throw std::invalid_argument("iterations_to_failure_target: target outside (0, 1)");
  for (int j = 0; j <= g.n_opt; ++j)
    if (1.0 - g.p_at(j) < max_fail) return j;
  throw std::domain_error(
      "iterations_to_failure_target: no iteration count reaches failure probability below " +
      std::to_string(max_fail));
}

double grover_gap(const DiagonalEnergies& diag) {
  std::vector<double> levels = diag.values;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() < 2)
    throw std::invalid_argument("grover_gap: spectrum needs at least two distinct levels");
  return 2.0 * std::numbers::pi * (levels[1] - levels.front()) /
         (levels.back() - levels.front());
}

TtsRecord grover_tts(const ProblemContext& ctx, const GroverAnalysis& g, double epsilon,
                     std::optional<int> n_it) {
  const int iters = n_it.value_or(g.n_opt);
  if (iters < 0) throw std::invalid_argument("grover_tts: negative iteration count");
  const double gap = grover_gap(ctx.ham.raw);
  const double p = g.p_at(iters);
  const double rep = repetition_factor(p, epsilon);
  const double r = ctx.inst.ratio().value();

  TtsRecord rec;
  rec.algorithm = "grover";
  rec.n = ctx.n();
  rec.r = ctx.inst.ratio();
  rec.seed = ctx.inst.seed;
  rec.L_or_nit = iters;
  rec.p_success = p;
  rec.gaps = {gap};
  rec.epsilon = epsilon;
  rec.tts = p > 0.0 ? rep * 2.0 * iters * r / gap : std::numeric_limits<double>::infinity();
  rec.valid = p > 0.0;
  return rec;
}

}  // namespace rba
