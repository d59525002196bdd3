#include "rba/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "rba/rng.hpp"

namespace rba {

Schedule equidistant(int L, ThresholdMode mode) {
  if (L < 0) throw std::invalid_argument("equidistant: L must be non-negative");
  Schedule s;
  s.mode = mode;
  s.provenance = Provenance::Equidistant;
  s.weights.reserve(L);
  for (int k = 1; k <= L; ++k)
    s.weights.push_back(static_cast<double>(k) / static_cast<double>(L + 1));
  return s;
}

double repetition_factor(double p_success, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("repetition_factor: epsilon outside (0, 1)");
  if (!(p_success >= 0.0 && p_success <= 1.0))
    throw std::invalid_argument("repetition_factor: p_success outside [0, 1]");
  if (p_success >= 1.0) return 1.0;
  if (p_success <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(1.0, std::log(epsilon) / std::log1p(-p_success));
}

TtsRecord rba_tts(const ProblemContext& ctx, int L, double p_success,
                  std::span<const double> gaps, double epsilon) {
  if (L < 0) throw std::invalid_argument("rba_tts: negative L");
  if (static_cast<std::size_t>(L) != gaps.size())
    throw std::invalid_argument("rba_tts: gap count does not match L");
  const double r = ctx.inst.ratio().value();
  double cost = 0.0;
  for (double g : gaps) {
    if (!(g > 0.0)) throw std::invalid_argument("rba_tts: non-positive spectral gap");
    cost += 2.0 * r / g;
  }
  const double rep = repetition_factor(p_success, epsilon);

  TtsRecord rec;
  rec.algorithm = "rba";
  rec.n = ctx.n();
  rec.r = ctx.inst.ratio();
  rec.seed = ctx.inst.seed;
  rec.L_or_nit = L;
  rec.p_success = p_success;
  rec.gaps.assign(gaps.begin(), gaps.end());
  rec.epsilon = epsilon;
  if (p_success <= 0.0) {
    rec.tts = std::numeric_limits<double>::infinity();
    rec.valid = false;
  } else {
    rec.tts = rep * cost;
    rec.valid = L > 0;  // an empty schedule has no meaningful run cost
  }
  return rec;
}

namespace {

// Penalty for weights outside the feasible region (0, 1]. Always above any
// feasible objective value, and growing with the violation so the simplex is
// pulled back toward the region.
std::optional<double> infeasible_penalty(const std::vector<double>& w) {
  double violation = 0.0;
  bool bad = false;
  for (double x : w) {
    if (!(x > 0.0)) {
      bad = true;
      violation += -x;
    } else if (x > 1.0) {
      bad = true;
      violation += x - 1.0;
    }
  }
  if (!bad) return std::nullopt;
  return 2.0 + violation;
}

}  // namespace

OptimizeResult optimize_weights(const ProblemContext& ctx, int L, ThresholdMode mode,
                                const NelderMeadConfig& cfg, SliceCache* cache) {
  if (L < 1) throw std::invalid_argument("optimize_weights: L must be at least 1");
  const int max_evals = cfg.max_evals > 0 ? cfg.max_evals : 200 * L;

  std::optional<SliceCache> local;
  if (cache == nullptr) {
    local.emplace(ctx, slice_levels(mode));
    cache = &*local;
  }

  int evals = 0;
  const auto objective = [&](const std::vector<double>& w) -> double {
    if (auto pen = infeasible_penalty(w)) return *pen;
    ++evals;
    return 1.0 - run_rba(ctx, w, mode, cache).p_success;
  };

  // Initial simplex: the equidistant schedule plus one vertex per coordinate,
  // displaced by a quarter of the spacing with a small seeded jitter.
  const std::vector<double> x0 = equidistant(L, mode).weights;
  Rng jitter(derive_seed(cfg.seed, {0x6e6dULL, static_cast<std::uint64_t>(L)}));
  std::vector<std::vector<double>> vert(L + 1, x0);
  for (int i = 1; i <= L; ++i) {
    const double step = 0.25 / (L + 1) * (1.0 + 0.05 * jitter.symmetric());
    vert[i][i - 1] += step;
  }
  std::vector<double> fval(L + 1);
  for (int i = 0; i <= L; ++i) fval[i] = objective(vert[i]);

  std::vector<double> best_x = vert[0];
  double best_f = fval[0];
  const auto remember = [&](const std::vector<double>& x, double f) {
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  };
  for (int i = 0; i <= L; ++i) remember(vert[i], fval[i]);

  bool converged = false;
  std::vector<std::size_t> order(L + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fval[a] < fval[b]; });
    const std::size_t ib = order.front();
    const std::size_t iw = order.back();
    const std::size_t is = order[L > 0 ? L - 1 : 0];  // second worst

    double diameter = 0.0;
    for (int i = 0; i <= L; ++i)
      for (int k = 0; k < L; ++k)
        diameter = std::max(diameter, std::abs(vert[i][k] - vert[ib][k]));
    if (diameter < cfg.simplex_tol || fval[iw] - fval[ib] < cfg.objective_tol) {
      converged = true;
      break;
    }

    std::vector<double> centroid(L, 0.0);
    for (std::size_t idx : order)
      if (idx != iw)
        for (int k = 0; k < L; ++k) centroid[k] += vert[idx][k];
    for (int k = 0; k < L; ++k) centroid[k] /= L;

    const auto blend = [&](double t) {
      // centroid + t * (centroid - worst)
      std::vector<double> x(L);
      for (int k = 0; k < L; ++k) x[k] = centroid[k] + t * (centroid[k] - vert[iw][k]);
      return x;
    };

    const std::vector<double> xr = blend(1.0);
    const double fr = objective(xr);
    remember(xr, fr);

    if (fr < fval[ib]) {
      const std::vector<double> xe = blend(2.0);
      const double fe = objective(xe);
      remember(xe, fe);
      if (fe < fr) {
        vert[iw] = xe;
        fval[iw] = fe;
      } else {
        vert[iw] = xr;
        fval[iw] = fr;
      }
      continue;
    }
    if (fr < fval[is]) {
      vert[iw] = xr;
      fval[iw] = fr;
      continue;
    }
    // contraction: outside when the reflected point improved on the worst,
    // inside otherwise
    const std::vector<double> xc = fr < fval[iw] ? blend(0.5) : blend(-0.5);
    const double fc = objective(xc);
    remember(xc, fc);
    if (fc < std::min(fr, fval[iw])) {
      vert[iw] = xc;
      fval[iw] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (int i = 0; i <= L; ++i) {
      if (static_cast<std::size_t>(i) == ib) continue;
      for (int k = 0; k < L; ++k) vert[i][k] = vert[ib][k] + 0.5 * (vert[i][k] - vert[ib][k]);
      fval[i] = objective(vert[i]);
      remember(vert[i], fval[i]);
      if (evals >= max_evals) break;
    }
  }

  // Prefer reporting the weights sorted ascending when that does not hurt.
  std::vector<double> sorted = best_x;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> chosen;
  if (sorted == best_x) {
    chosen = std::move(sorted);
  } else {
    const double fs = objective(sorted);
    remember(sorted, fs);
    chosen = fs <= best_f ? std::move(sorted) : best_x;
  }

  // The reported failure probability is re-measured through a fresh solver
  // path, so an independent evaluation of the returned schedule reproduces it
  // exactly.
  const double p_fail_fresh = 1.0 - run_rba(ctx, chosen, mode, nullptr).p_success;

  OptimizeResult res;
  res.schedule.weights = std::move(chosen);
  res.schedule.mode = mode;
  res.schedule.provenance = Provenance::Optimized;
  res.p_fail = p_fail_fresh;
  res.evaluations = evals;
  res.converged = converged;
  return res;
}

bool sweep_should_stop(std::span<const double> tts, int patience) {
  if (patience < 1) throw std::invalid_argument("sweep_should_stop: patience must be positive");
  if (tts.size() < static_cast<std::size_t>(patience) + 1) return false;
  for (int j = 0; j < patience; ++j) {
    const std::size_t i = tts.size() - 1 - j;
    if (!(tts[i] > tts[i - 1])) return false;
  }
  return true;
}

SweepResult sweep_L(const ProblemContext& ctx, ThresholdMode mode, const SweepConfig& cfg) {
  if (cfg.max_L < 1) throw std::invalid_argument("sweep_L: max_L must be at least 1");
  if (cfg.patience < 1) throw std::invalid_argument("sweep_L: patience must be at least 1");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw std::invalid_argument("sweep_L: epsilon outside (0, 1)");

  SliceCache cache(ctx, slice_levels(mode));
  SweepResult res;
  std::vector<double> tts_seq;

  for (int L = 1; L <= cfg.max_L; ++L) {
    SweepEntry entry;
    entry.L = L;
    if (cfg.optimize) {
      entry.schedule = optimize_weights(ctx, L, mode, cfg.nm, &cache).schedule;
    } else {
      entry.schedule = equidistant(L, mode);
    }
    const RbaOutcome out = run_rba(ctx, entry.schedule.weights, mode, &cache);
    entry.p_success = out.p_success;
    entry.gaps = out.per_step_gaps;
    entry.tts = rba_tts(ctx, L, out.p_success, out.per_step_gaps, cfg.epsilon).tts;
    res.entries.push_back(std::move(entry));
    tts_seq.push_back(res.entries.back().tts);
    if (sweep_should_stop(tts_seq, cfg.patience)) {
      res.stop_reason = "patience";
      break;
    }
  }
  if (res.stop_reason.empty()) res.stop_reason = "max_L";

  std::size_t best = 0;
  for (std::size_t i = 1; i < res.entries.size(); ++i)
    if (res.entries[i].tts < res.entries[best].tts) best = i;
  res.best_L = res.entries[best].L;
  res.best_tts = res.entries[best].tts;
  return res;
}

}  // namespace rba
