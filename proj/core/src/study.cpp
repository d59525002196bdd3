#include "rba/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "rba/rng.hpp"

namespace rba {

std::string mode_name(ThresholdMode mode) {
  return mode == ThresholdMode::BelowFirstExcited ? "below_e1" : "below_e2";
}

ThresholdMode parse_mode(const std::string& name) {
  if (name == "below_e1" || name == "below-e1") return ThresholdMode::BelowFirstExcited;
  if (name == "below_e2" || name == "below-e2") return ThresholdMode::BelowSecondExcited;
  throw std::invalid_argument("unknown threshold mode '" + name +
                              "' (expected below-e1 or below-e2)");
}

std::vector<InstanceRef> expand_cells(std::span<const int> n_values,
                                      std::span<const Rational> r_values,
                                      int instances_per_cell, std::uint64_t base_seed) {
  if (instances_per_cell < 1)
    throw std::invalid_argument("expand_cells: instances_per_cell must be positive");
  std::vector<InstanceRef> refs;
  for (int n : n_values) {
    for (const Rational& r : r_values) {
      const std::int64_t m = r.times_exact(n);
      const std::int64_t pool = clause_pool_size(n);
      if (m > pool)
        throw std::invalid_argument("cell n=" + std::to_string(n) + " r=" + r.str() +
                                    " needs " + std::to_string(m) + " clauses but only " +
                                    std::to_string(pool) + " exist");
      // A cell that uses the whole pool (or none of it) has exactly one
      // possible instance; sampling more would only produce duplicates.
      const int count = (m == pool || m == 0) ? 1 : instances_per_cell;
      for (int idx = 0; idx < count; ++idx) {
        const std::uint64_t seed =
            derive_seed(base_seed, {static_cast<std::uint64_t>(n),
                                    static_cast<std::uint64_t>(r.num),
                                    static_cast<std::uint64_t>(r.den),
                                    static_cast<std::uint64_t>(idx)});
        refs.push_back(InstanceRef{n, r, seed});
      }
    }
  }
  return refs;
}

namespace {

int resolve_workers(int requested, std::size_t task_count) {
  int w = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (w < 1) w = 1;
  return static_cast<int>(std::min<std::size_t>(w, std::max<std::size_t>(task_count, 1)));
}

// Runs fn(i) for i in [0, count) across a small thread pool. Results must be
// written to pre-sized slots so the output order is independent of scheduling.
template <typename Fn>
void parallel_indexed(std::size_t count, int workers, Fn&& fn) {
  const int w = resolve_workers(workers, count);
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      while (!stop.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(error_mutex);
          if (!first_error) first_error = std::current_exception();
          stop.store(true);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string cell_label(const InstanceRef& ref) {
  return "n=" + std::to_string(ref.n) + " r=" + ref.r.str() + " seed=" + std::to_string(ref.seed);
}

double variance_unbiased(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("variance: need at least two samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(n - 1);
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  return std::sqrt(variance_unbiased(xs));
}

// Runs one schedule under both threshold rules and records success, TTS, and
// the smallest per-step gap each rule saw.
ThresholdRow compare_threshold_rules(const ProblemContext& ctx, const InstanceRef& ref,
                                     const std::vector<double>& weights, double epsilon) {
  const int L = static_cast<int>(weights.size());
  const RbaOutcome o1 = run_rba(ctx, weights, ThresholdMode::BelowFirstExcited, nullptr);
  const RbaOutcome o2 = run_rba(ctx, weights, ThresholdMode::BelowSecondExcited, nullptr);
  ThresholdRow row;
  row.n = ref.n;
  row.r = ref.r;
  row.seed = ref.seed;
  row.L = L;
  row.p_below_e1 = o1.p_success;
  row.tts_below_e1 = rba_tts(ctx, L, o1.p_success, o1.per_step_gaps, epsilon).tts;
  row.p_below_e2 = o2.p_success;
  row.tts_below_e2 = rba_tts(ctx, L, o2.p_success, o2.per_step_gaps, epsilon).tts;
  row.min_gap01 = *std::min_element(o1.per_step_gaps.begin(), o1.per_step_gaps.end());
  row.min_gap02 = *std::min_element(o2.per_step_gaps.begin(), o2.per_step_gaps.end());
  return row;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
    throw std::invalid_argument("run_ensemble: epsilon outside (0, 1)");
  if (!(spec.fail_target > 0.0 && spec.fail_target < 1.0))
    throw std::invalid_argument("run_ensemble: fail_target outside (0, 1)");
  const std::vector<InstanceRef> refs =
      expand_cells(spec.n_values, spec.r_values, spec.instances_per_cell, spec.base_seed);

  struct PerInstance {
    std::vector<TtsRow> tts;
    std::vector<IterationObs> iterations;
    std::vector<SweepPairRow> pairs;
    std::vector<ThresholdRow> thresholds;
    std::vector<std::string> warnings;
  };
  std::vector<PerInstance> parts(refs.size());

  parallel_indexed(refs.size(), spec.workers, [&](std::size_t i) {
    const InstanceRef& ref = refs[i];
    PerInstance& out = parts[i];
    try {
      const ProblemContext ctx = make_problem(generate(ref.n, ref.r, ref.seed));
      const std::string mode = mode_name(spec.mode);

      // Grover at its closed-form optimum.
      const GroverAnalysis ga = grover_analyze(ctx);
      const TtsRecord grec = grover_tts(ctx, ga, spec.epsilon);
      out.tts.push_back(TtsRow{"grover", "-", "-", ref.n, ref.r, ref.seed, grec.L_or_nit,
                               grec.p_success, grec.tts});
      try {
        const int gi = iterations_to_failure_target(ga, spec.fail_target);
        out.iterations.push_back(IterationObs{"grover", ref.n, ref.r, ref.seed, gi});
      } catch (const std::domain_error& e) {
        out.warnings.push_back(cell_label(ref) + ": " + e.what());
      }

      // Equidistant sweep.
      SweepConfig eq_cfg = spec.sweep;
      eq_cfg.epsilon = spec.epsilon;
      eq_cfg.optimize = false;
      const SweepResult eq = sweep_L(ctx, spec.mode, eq_cfg);
      const SweepEntry& eq_best = eq.entries[eq.best_L - 1];
      out.tts.push_back(TtsRow{"rba", "equidistant", mode, ref.n, ref.r, ref.seed, eq.best_L,
                               eq_best.p_success, eq.best_tts});
      out.thresholds.push_back(
          compare_threshold_rules(ctx, ref, eq_best.schedule.weights, spec.epsilon));

      const std::vector<SweepEntry>* metric_entries = &eq.entries;
      SweepResult op;
      if (spec.with_optimized) {
        SweepConfig op_cfg = eq_cfg;
        op_cfg.optimize = true;
        op = sweep_L(ctx, spec.mode, op_cfg);
        const SweepEntry& op_best = op.entries[op.best_L - 1];
        out.tts.push_back(TtsRow{"rba", "optimized", mode, ref.n, ref.r, ref.seed, op.best_L,
                                 op_best.p_success, op.best_tts});
        metric_entries = &op.entries;

        // Matched pairs cover the lengths both sweeps treated as candidate
        // optima (L up to each sweep's chosen minimum). Entries past a
        // sweep's best length only exist to trigger the stop rule, so
        // including them would make the series an artifact of the patience
        // setting.
        const int cut = std::min(eq.best_L, op.best_L);
        for (int k = 0; k < cut; ++k)
          out.pairs.push_back(SweepPairRow{ref.n, ref.r, ref.seed, eq.entries[k].L,
                                           eq.entries[k].tts, op.entries[k].tts});
      }

      // Smallest schedule length whose failure probability beats the target,
      // extending past the sweep's stopping point if needed.
      int found_L = -1;
      for (const SweepEntry& e : *metric_entries) {
        if (1.0 - e.p_success < spec.fail_target) {
          found_L = e.L;
          break;
        }
      }
      if (found_L < 0) {
        SliceCache cache(ctx, slice_levels(spec.mode));
        const int from = metric_entries->empty() ? 1 : metric_entries->back().L + 1;
        for (int L = from; L <= spec.fail_target_max_L; ++L) {
          std::vector<double> weights;
          if (spec.with_optimized) {
            weights = optimize_weights(ctx, L, spec.mode, spec.sweep.nm, &cache).schedule.weights;
          } else {
            weights = equidistant(L, spec.mode).weights;
          }
          const RbaOutcome o = run_rba(ctx, weights, spec.mode, &cache);
          if (1.0 - o.p_success < spec.fail_target) {
            found_L = L;
            break;
          }
        }
      }
      if (found_L >= 0) {
        out.iterations.push_back(IterationObs{"rba", ref.n, ref.r, ref.seed, found_L});
      } else {
        out.warnings.push_back(cell_label(ref) + ": failure target " + g17(spec.fail_target) +
                               " not reached by any schedule length up to " +
                               std::to_string(spec.fail_target_max_L));
      }
    } catch (const std::exception& e) {
      out = PerInstance{};
      out.warnings.push_back(cell_label(ref) + ": skipped: " + e.what());
    }
  });

  EnsembleResult res;
  for (const PerInstance& p : parts) {
    res.tts.insert(res.tts.end(), p.tts.begin(), p.tts.end());
    res.iterations.insert(res.iterations.end(), p.iterations.begin(), p.iterations.end());
    res.pairs.insert(res.pairs.end(), p.pairs.begin(), p.pairs.end());
    res.thresholds.insert(res.thresholds.end(), p.thresholds.begin(), p.thresholds.end());
    res.warnings.insert(res.warnings.end(), p.warnings.begin(), p.warnings.end());
  }
  for (const ThresholdRow& row : res.thresholds)
    if (row.tts_below_e2 < row.tts_below_e1) ++res.wins_below_e2;
  return res;
}

std::vector<IterationMedianRow> iteration_medians(std::span<const IterationObs> obs) {
  std::vector<IterationMedianRow> rows;
  std::vector<std::vector<double>> groups;
  for (const IterationObs& o : obs) {
    std::size_t g = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].algorithm == o.algorithm && rows[i].n == o.n && rows[i].r == o.r) {
        g = i;
        break;
      }
    }
    if (g == rows.size()) {
      rows.push_back(IterationMedianRow{o.algorithm, o.n, o.r, 0.0});
      groups.emplace_back();
    }
    groups[g].push_back(static_cast<double>(o.iterations));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].median_iterations = median(groups[i]);
  return rows;
}

BpResult barren_plateau(const BarrenPlateauSpec& spec) {
  if (spec.samples < 2) throw std::invalid_argument("barren_plateau: need at least two samples");
  if (!(spec.h > 0.0)) throw std::invalid_argument("barren_plateau: step must be positive");
  const auto check_interval = [&](double lo, double hi, const char* which) {
    if (!(lo < hi) || !(lo - spec.h > 0.0) || !(hi + spec.h < 1.0))
      throw std::invalid_argument(std::string("barren_plateau: interval for ") + which +
                                  " must sit inside (0, 1) with room for the stencil");
  };
  check_interval(spec.w1_lo, spec.w1_hi, "w1");
  check_interval(spec.w2_lo, spec.w2_hi, "w2");

  const std::vector<InstanceRef> refs =
      expand_cells(spec.n_values, spec.r_values, spec.instances_per_cell, spec.base_seed);

  struct PerInstance {
    std::vector<BpRow> rows;
    std::vector<std::string> warnings;
  };
  std::vector<PerInstance> parts(refs.size());

  parallel_indexed(refs.size(), spec.workers, [&](std::size_t i) {
    const InstanceRef& ref = refs[i];
    PerInstance& out = parts[i];
    try {
      const ProblemContext ctx = make_problem(generate(ref.n, ref.r, ref.seed));
      SliceCache cache(ctx, 2);
      const StateVector init = initial_state(ctx.n());
      Rng rng(derive_seed(ref.seed, {0xb9ULL}));

      const auto energy_at = [&](double a, double b) {
        StateVector psi = reflect(init, std::span<const StateVector>(cache.get(a).ground_basis));
        psi = reflect(psi, std::span<const StateVector>(cache.get(b).ground_basis));
        return expected_energy(psi, ctx.ham);
      };

      std::vector<double> g1, g2;
      g1.reserve(spec.samples);
      g2.reserve(spec.samples);
      for (int s = 0; s < spec.samples; ++s) {
        const double w1 = rng.range(spec.w1_lo, spec.w1_hi);
        const double w2 = rng.range(spec.w2_lo, spec.w2_hi);
        g1.push_back((energy_at(w1 + spec.h, w2) - energy_at(w1 - spec.h, w2)) / (2.0 * spec.h));
        g2.push_back((energy_at(w1, w2 + spec.h) - energy_at(w1, w2 - spec.h)) / (2.0 * spec.h));
      }
      out.rows.push_back(BpRow{ref.n, ref.r, ref.seed, 1, variance_unbiased(g1)});
      out.rows.push_back(BpRow{ref.n, ref.r, ref.seed, 2, variance_unbiased(g2)});
    } catch (const std::exception& e) {
      out = PerInstance{};
      out.warnings.push_back(cell_label(ref) + ": skipped: " + e.what());
    }
  });

  BpResult res;
  for (const PerInstance& p : parts) {
    res.rows.insert(res.rows.end(), p.rows.begin(), p.rows.end());
    res.warnings.insert(res.warnings.end(), p.warnings.begin(), p.warnings.end());
  }

  // Per-n pooling (across r and instances) and the log-linear fit.
  for (int wi = 1; wi <= 2; ++wi) {
    std::vector<double> xs, ys;
    for (int n : spec.n_values) {
      std::vector<double> vars;
      for (const BpRow& row : res.rows)
        if (row.wi == wi && row.n == n) vars.push_back(row.variance);
      if (vars.empty()) continue;
      const double med = median(vars);
      res.per_n.push_back(BpPerN{wi, n, med, stddev(vars)});
      if (std::isfinite(med) && med > 0.0) {
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(med));
      } else {
        res.warnings.push_back("w" + std::to_string(wi) + " n=" + std::to_string(n) +
                               ": median variance not positive, excluded from fit");
      }
    }
    if (xs.size() < 2) {
      res.warnings.push_back("w" + std::to_string(wi) +
                             ": fewer than two usable points, fit skipped");
      continue;
    }
    const double N = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sx += xs[k];
      sy += ys[k];
      sxx += xs[k] * xs[k];
      sxy += xs[k] * ys[k];
    }
    const double denom = N * sxx - sx * sx;
    const double slope = (N * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / N;
    double ss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double rres = ys[k] - (slope * xs[k] + intercept);
      ss += rres * rres;
    }
    res.fits.push_back(
        BpFit{wi, -slope, intercept, std::sqrt(ss / N), static_cast<int>(xs.size())});
  }
  return res;
}

std::vector<RatioRow> optimization_ratio(std::span<const SweepPairRow> dataset) {
  std::vector<RatioRow> rows;
  rows.reserve(dataset.size());
  for (const SweepPairRow& p : dataset) {
    const double ratio = p.tts_equidistant / p.tts_optimized;
    if (std::isfinite(ratio)) rows.push_back(RatioRow{p.n, p.r, p.seed, p.L, ratio});
  }
  return rows;
}

ThresholdResult threshold_study(const ThresholdSpec& spec) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
    throw std::invalid_argument("threshold_study: epsilon outside (0, 1)");
  const std::vector<InstanceRef> refs =
      expand_cells(spec.n_values, spec.r_values, spec.instances_per_cell, spec.base_seed);

  struct PerInstance {
    std::vector<ThresholdRow> rows;
    std::vector<std::string> warnings;
  };
  std::vector<PerInstance> parts(refs.size());

  parallel_indexed(refs.size(), spec.workers, [&](std::size_t i) {
    const InstanceRef& ref = refs[i];
    PerInstance& out = parts[i];
    try {
      const ProblemContext ctx = make_problem(generate(ref.n, ref.r, ref.seed));
      SweepConfig cfg = spec.sweep;
      cfg.epsilon = spec.epsilon;
      cfg.optimize = spec.optimize;
      const SweepResult sw = sweep_L(ctx, ThresholdMode::BelowFirstExcited, cfg);
      const SweepEntry& best = sw.entries[sw.best_L - 1];
      out.rows.push_back(
          compare_threshold_rules(ctx, ref, best.schedule.weights, spec.epsilon));
    } catch (const std::exception& e) {
      out = PerInstance{};
      out.warnings.push_back(cell_label(ref) + ": skipped: " + e.what());
    }
  });

  ThresholdResult res;
  for (const PerInstance& p : parts) {
    res.rows.insert(res.rows.end(), p.rows.begin(), p.rows.end());
    res.warnings.insert(res.warnings.end(), p.warnings.begin(), p.warnings.end());
  }
  for (const ThresholdRow& row : res.rows)
    if (row.tts_below_e2 < row.tts_below_e1) ++res.wins_below_e2;
  return res;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

std::vector<double> ranks_with_ties(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("spearman: need at least two points");
  const std::vector<double> rx = ranks_with_ties(x);
  const std::vector<double> ry = ranks_with_ties(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

void write_tts_csv(std::span<const TtsRow> rows, std::ostream& out) {
  out << "algorithm,variant,mode,n,r,seed,L_or_nit,p_success,tts\n";
  for (const auto& row : rows) {
    out << row.algorithm << ',' << row.variant << ',' << row.mode << ',' << row.n << ','
        << row.r.str() << ',' << row.seed << ',' << row.L_or_nit << ',' << g17(row.p_success)
        << ',' << g17(row.tts) << '\n';
  }
}

void write_iterations_csv(std::span<const IterationMedianRow> rows, std::ostream& out) {
  out << "algorithm,n,r,median_iterations\n";
  for (const auto& row : rows) {
    out << row.algorithm << ',' << row.n << ',' << row.r.str() << ','
        << g17(row.median_iterations) << '\n';
  }
}

void write_ratio_csv(std::span<const RatioRow> rows, std::ostream& out) {
  out << "n,r,seed,L,tts_ratio\n";
  for (const auto& row : rows) {
    out << row.n << ',' << row.r.str() << ',' << row.seed << ',' << row.L << ','
        << g17(row.tts_ratio) << '\n';
  }
}

void write_bp_csv(std::span<const BpRow> rows, std::ostream& out) {
  out << "n,r,seed,wi,variance\n";
  for (const auto& row : rows) {
    out << row.n << ',' << row.r.str() << ',' << row.seed << ",w" << row.wi << ','
        << g17(row.variance) << '\n';
  }
}

void write_bp_fit_csv(std::span<const BpFit> fits, std::ostream& out) {
  out << "wi,rate,intercept,residual\n";
  for (const auto& f : fits) {
    out << 'w' << f.wi << ',' << g17(f.rate) << ',' << g17(f.intercept) << ','
        << g17(f.residual) << '\n';
  }
}

void write_threshold_csv(std::span<const ThresholdRow> rows, std::ostream& out) {
  out << "n,r,seed,L,p_below_e1,tts_below_e1,p_below_e2,tts_below_e2,min_gap01,min_gap02\n";
  for (const auto& row : rows) {
    out << row.n << ',' << row.r.str() << ',' << row.seed << ',' << row.L << ','
        << g17(row.p_below_e1) << ',' << g17(row.tts_below_e1) << ',' << g17(row.p_below_e2)
        << ',' << g17(row.tts_below_e2) << ',' << g17(row.min_gap01) << ','
        << g17(row.min_gap02) << '\n';
  }
}

}  // namespace rba
