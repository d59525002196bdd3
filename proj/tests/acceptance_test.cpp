// Acceptance gates for the whole toolchain, from exact oracle identities up
// to study-level trends and artifact determinism. Each test owns one numbered
// gate, prints a PASS/FAIL line with its wall time, and asserts its runtime
// budget. The two gates backed by the reduced TTS ensemble share a single
// computation, which the earlier of them pays for.

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rba/dynamics.hpp"
#include "rba/eigensolve.hpp"
#include "rba/grover.hpp"
#include "rba/instance.hpp"
#include "rba/problem.hpp"
#include "rba/rng.hpp"
#include "rba/schedule.hpp"
#include "rba/study.hpp"

namespace fs = std::filesystem;
using namespace rba;

namespace {

// Emits "criterion N: PASS/FAIL (X.X s)" when the test body finishes.
class CriterionReport {
 public:
  explicit CriterionReport(int id) : id_(id), t0_(std::chrono::steady_clock::now()) {}
  ~CriterionReport() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    const bool failed = info != nullptr && info->result()->Failed();
    std::printf("criterion %2d: %s (%.1f s)\n", id_, failed ? "FAIL" : "PASS", seconds());
    std::fflush(stdout);
  }
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  int id_;
  std::chrono::steady_clock::time_point t0_;
};

StateVector random_unit(Rng& rng, std::size_t dim) {
  StateVector v(dim);
  double len = 0.0;
  do {
    for (auto& a : v.amps) a = rng.symmetric();
    len = norm(v);
  } while (len < 1e-6);
  scale(v, 1.0 / len);
  return v;
}

// n in {6, 8, 10} x r in {4, 8}, 5 instances per cell, default seed.
EnsembleSpec reduced_spec() {
  EnsembleSpec spec;
  spec.n_values = {6, 8, 10};
  spec.r_values = {Rational::of(4, 1), Rational::of(8, 1)};
  spec.instances_per_cell = 5;
  spec.workers = 1;
  return spec;
}

const EnsembleResult& reduced_ensemble() {
  static const EnsembleResult res = run_ensemble(reduced_spec());
  return res;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_tool(const std::string& args) {
  static int counter = 0;
  const fs::path log = fs::temp_directory_path() / ("rba_accept_out_" + std::to_string(counter++));
  const std::string cmd = std::string(RBA_TOOL_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  fs::remove(log);
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// 1. The clause diagonal equals 3 * unsat(b) - sat(b) for every assignment,
//    exactly, across 50 random instances with n <= 10.
TEST(Acceptance, Criterion01ClauseDiagonalIsExact) {
  CriterionReport report(1);
  Rng rng(101);
  for (int i = 0; i < 50; ++i) {
    const int n = 2 + static_cast<int>(rng.below(9));  // 2..10
    const std::int64_t pool = clause_pool_size(n);
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.below(pool));
    const SatInstance inst = generate(n, Rational::of(m, n), rng.next());
    const DiagonalEnergies diag = build_diagonal(inst);
    ASSERT_EQ(diag.values.size(), std::size_t{1} << n);
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
      const std::int64_t sat = count_satisfied(inst, b);
      const std::int64_t unsat = m - sat;
      ASSERT_EQ(diag.values[b], static_cast<double>(3 * unsat - sat))
          << "n=" << n << " m=" << m << " b=" << b;
    }
  }
  EXPECT_LE(report.seconds(), 10.0);
}

// 2. Lanczos resolves the lowest three distinct levels of H_w to 1e-8 of
//    dense diagonalization on 30 random (instance, w) pairs with n <= 8.
TEST(Acceptance, Criterion02LanczosMatchesDenseLevels) {
  CriterionReport report(2);
  Rng rng(202);
  int done = 0;
  while (done < 30) {
    const int n = 4 + static_cast<int>(rng.below(5));  // 4..8
    const std::int64_t pool = clause_pool_size(n);
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng.below(pool - 1));
    const std::uint64_t seed = rng.next();
    const double w = rng.unit();
    const SatInstance inst = generate(n, Rational::of(m, n), seed);
    const DiagonalEnergies diag = build_diagonal(inst);
    if (diag.max() == diag.min()) continue;  // constant spectrum, nothing to resolve
    const HamiltonianPair ham = make_hamiltonians(inst);
    const InterpolatedHamiltonian hw{&ham, w};
    LanczosOptions opt;
    opt.k_distinct = 3;
    opt.seed = derive_seed(seed, {9, static_cast<std::uint64_t>(done)});
    const SpectrumSlice iterative = lanczos_lowest(hw, opt);
    const SpectrumSlice dense = slice_from_dense(dense_spectrum(hw), w, 3);
    ASSERT_NEAR(iterative.e0, dense.e0, 1e-8) << "n=" << n << " w=" << w;
    ASSERT_NEAR(iterative.e1, dense.e1, 1e-8) << "n=" << n << " w=" << w;
    ASSERT_TRUE(iterative.e2.has_value());
    ASSERT_TRUE(dense.e2.has_value());
    ASSERT_NEAR(*iterative.e2, *dense.e2, 1e-8) << "n=" << n << " w=" << w;
    ++done;
  }
  EXPECT_LE(report.seconds(), 60.0);
}

// 3. Weights alternating (1, 0) for 2 * n_it reflections reproduce the
//    closed-form success probability sin^2((n_it + 1/2) * theta) to 1e-10.
TEST(Acceptance, Criterion03AlternatingWeightsMatchClosedForm) {
  CriterionReport report(3);
  for (int n = 4; n <= 10; ++n) {
    const ProblemContext ctx = make_problem(generate(n, Rational::of(4, 1), 1));
    const GroverAnalysis grover = grover_analyze(ctx);
    SliceCache cache(ctx, slice_levels(ThresholdMode::BelowFirstExcited));
    for (int n_it = 1; n_it <= 5; ++n_it) {
      std::vector<double> weights;
      weights.reserve(2 * n_it);
      for (int k = 0; k < n_it; ++k) {
        weights.push_back(1.0);
        weights.push_back(0.0);
      }
      const RbaOutcome out = run_rba(ctx, weights, ThresholdMode::BelowFirstExcited, &cache);
      ASSERT_NEAR(out.p_success, grover.p_at(n_it), 1e-10) << "n=" << n << " n_it=" << n_it;
    }
  }
  EXPECT_LE(report.seconds(), 60.0);
}

// 4. Whenever a single projection improves the target overlap (dP >= 0), the
//    reflection improves it at least twice as much, up to 1e-12, across 1000
//    seeded random unit triples in dimensions 2..64. The 45-degree planar
//    case attains the factor exactly: dP = 1/2, dR = 1.
TEST(Acceptance, Criterion04ReflectionGainBound) {
  CriterionReport report(4);
  Rng rng(404);
  int nonneg_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t dim = 2 + rng.below(63);  // 2..64
    const StateVector initial = random_unit(rng, dim);
    const StateVector target = random_unit(rng, dim);
    const StateVector axis = random_unit(rng, dim);
    const OverlapDeltas d = overlap_deltas(initial, target, axis);
    if (d.dP >= 0.0) {
      ++nonneg_cases;
      ASSERT_GE(d.dR, 2.0 * d.dP - 1e-12) << "case " << i;
    }
  }
  EXPECT_GT(nonneg_cases, 0);

  const double s = std::sqrt(0.5);
  StateVector initial(2), target(2), axis(2);
  initial[0] = s;
  initial[1] = s;
  target[0] = -s;
  target[1] = s;
  axis[0] = 1.0;
  const OverlapDeltas d = overlap_deltas(initial, target, axis);
  EXPECT_NEAR(d.dP, 0.5, 1e-12);
  EXPECT_NEAR(d.dR, 1.0, 1e-12);
  EXPECT_LE(report.seconds(), 5.0);
}

// 5. Reflections are involutions and isometries to 1e-12 on 200 random
//    (state, subspace) pairs, with subspace dimensions up to 4.
TEST(Acceptance, Criterion05ReflectionInvolutionAndIsometry) {
  CriterionReport report(5);
  Rng rng(505);
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = 2 + rng.below(63);  // 2..64
    const std::uint64_t max_sub = std::min<std::uint64_t>(4, dim - 1);
    const int sub = 1 + static_cast<int>(rng.below(max_sub));
    std::vector<StateVector> basis;
    basis.reserve(sub);
    for (int j = 0; j < sub; ++j) {
      StateVector v = random_unit(rng, dim);
      for (int pass = 0; pass < 2; ++pass)
        for (const StateVector& b : basis) axpy(-dot(b, v), b, v);
      scale(v, 1.0 / norm(v));
      basis.push_back(std::move(v));
    }
    const StateVector x = random_unit(rng, dim);
    const StateVector rx = reflect(x, basis);
    ASSERT_NEAR(norm(rx), 1.0, 1e-12) << "case " << i;
    const StateVector rrx = reflect(rx, basis);
    for (std::size_t q = 0; q < dim; ++q) ASSERT_NEAR(rrx[q], x[q], 1e-12) << "case " << i;
  }
  EXPECT_LE(report.seconds(), 5.0);
}

// 6. The closed-form iteration count ceil(pi / (2 theta) - 1/2) is the first
//    iterate whose rotation angle reaches the peak of the success lobe, for
//    100 random theta spanning (0, pi). Past the peak the lobe only decays,
//    so that iterate is the brute-force argmax over the remainder of the
//    lobe, and its success probability is within one rotation step of the
//    continuous optimum.
TEST(Acceptance, Criterion06OptimalIterationCountSitsAtTheLobePeak) {
  CriterionReport report(6);
  Rng rng(606);
  constexpr double kPi = std::numbers::pi;
  for (int i = 0; i < 100; ++i) {
    // Draw theta uniformly, then realize it on the d/2^n grid at n = 30.
    const double theta_target = rng.range(1e-6, 1.0 - 1e-6) * kPi;
    const double frac = std::pow(std::sin(theta_target / 2.0), 2);
    const std::int64_t dim = std::int64_t{1} << 30;
    const std::int64_t d = std::clamp<std::int64_t>(
        std::llround(frac * static_cast<double>(dim)), 1, dim - 1);
    const GroverAnalysis g = grover_analyze(30, static_cast<int>(d));
    const double theta = g.theta;

    int first_at_peak = 0;
    while ((first_at_peak + 0.5) * theta < kPi / 2.0) ++first_at_peak;
    ASSERT_EQ(g.n_opt, first_at_peak) << "theta=" << theta;

    for (int m = g.n_opt + 1; (m + 0.5) * theta <= kPi; ++m)
      ASSERT_GE(g.p_at(g.n_opt), g.p_at(m) - 1e-12) << "theta=" << theta << " m=" << m;

    if (theta <= kPi / 2.0)
      ASSERT_GE(g.p_at(g.n_opt), std::pow(std::cos(theta), 2) - 1e-12) << "theta=" << theta;
  }
  EXPECT_LE(report.seconds(), 1.0);
}

// 7. Iteration counts to a 0.2 failure target: on the r = 8 gate cells
//    (n in {8, 10}, 5 instances), the optimized reflection schedules need no
//    more iterations than Grover at the median for n >= 10, and the Grover
//    median grows consistently with sqrt(2^n / d).
TEST(Acceptance, Criterion07IterationCountsBeatGrover) {
  CriterionReport report(7);
  EnsembleSpec spec;
  spec.n_values = {8, 10};
  spec.r_values = {Rational::of(8, 1)};
  spec.instances_per_cell = 5;
  spec.workers = 1;
  const EnsembleResult res = run_ensemble(spec);
  for (const std::string& w : res.warnings) std::printf("  warning: %s\n", w.c_str());

  std::map<std::pair<std::string, int>, double> med;
  for (const IterationMedianRow& row : iteration_medians(res.iterations))
    med[{row.algorithm, row.n}] = row.median_iterations;
  ASSERT_TRUE(med.count({"rba", 8}) == 1 && med.count({"rba", 10}) == 1);
  ASSERT_TRUE(med.count({"grover", 8}) == 1 && med.count({"grover", 10}) == 1);
  std::printf("  median iterations: rba %g (n=8) %g (n=10), grover %g (n=8) %g (n=10)\n",
              med[{"rba", 8}], med[{"rba", 10}], med[{"grover", 8}], med[{"grover", 10}]);
  for (const int n : spec.n_values) {
    if (n < 10) continue;
    const double rba_median = med[{"rba", n}];
    const double grover_median = med[{"grover", n}];
    EXPECT_LE(rba_median, grover_median) << "n=" << n;
  }

  // Expected growth from the same instances' ground degeneracies.
  std::map<int, std::vector<double>> scale_by_n;
  for (const InstanceRef& ref :
       expand_cells(spec.n_values, spec.r_values, spec.instances_per_cell, spec.base_seed)) {
    const BruteForceResult optimum = brute_force(generate(ref.n, ref.r, ref.seed));
    scale_by_n[ref.n].push_back(
        std::sqrt(std::pow(2.0, ref.n) / optimum.ground_degeneracy));
  }
  const double expected_growth = median(scale_by_n[10]) / median(scale_by_n[8]);
  const double observed_growth = med[{"grover", 10}] / med[{"grover", 8}];
  std::printf("  grover median growth: observed %.3f, sqrt(2^n/d) predicts %.3f\n",
              observed_growth, expected_growth);
  EXPECT_GT(observed_growth, 1.0);
  EXPECT_GE(observed_growth, expected_growth / 2.5);
  EXPECT_LE(observed_growth, expected_growth * 2.5);
  EXPECT_LE(report.seconds(), 600.0);
}

// 8. TTS trend on the reduced ensemble: the per-cell median of the
//    Grover-to-reflection TTS ratio is larger at the hardest cell (10, 8)
//    than at the easiest (6, 4).
TEST(Acceptance, Criterion08TtsAdvantageGrowsWithHardness) {
  CriterionReport report(8);
  const EnsembleResult& res = reduced_ensemble();
  for (const std::string& w : res.warnings) std::printf("  warning: %s\n", w.c_str());

  std::map<std::tuple<int, int, std::uint64_t>, double> grover_tts, rba_tts;
  for (const TtsRow& row : res.tts) {
    const auto key = std::make_tuple(row.n, static_cast<int>(std::llround(row.r.value())),
                                     row.seed);
    if (row.algorithm == "grover") {
      grover_tts[key] = row.tts;
    } else if (row.variant == "optimized") {
      rba_tts[key] = row.tts;
    } else {
      rba_tts.try_emplace(key, row.tts);
    }
  }
  std::map<std::pair<int, int>, std::vector<double>> cells;
  for (const auto& [key, g] : grover_tts) {
    const auto it = rba_tts.find(key);
    ASSERT_NE(it, rba_tts.end());
    cells[{std::get<0>(key), std::get<1>(key)}].push_back(g / it->second);
  }
  ASSERT_EQ(cells.size(), 6u);
  for (const auto& [cell, ratios] : cells) {
    EXPECT_EQ(ratios.size(), 5u) << "cell (" << cell.first << ", " << cell.second << ")";
  }
  const double easiest = median(cells[{6, 4}]);
  const double hardest = median(cells[{10, 8}]);
  std::printf("  median grover/rba tts: %.4f at (6, 4), %.4f at (10, 8)\n", easiest, hardest);
  EXPECT_GT(hardest, easiest);
}

// 9. Gradient-variance decay: over n in {5..11} at r = 8 with 1000 samples
//    per instance, the fitted decay rate of the first-weight gradient
//    variance is mild, inside [0.03, 0.13] and far below 0.685.
TEST(Acceptance, Criterion09GradientVarianceDecayIsMild) {
  CriterionReport report(9);
  BarrenPlateauSpec spec;
  spec.n_values = {5, 6, 7, 8, 9, 10, 11};
  spec.samples = 1000;
  spec.workers = 1;
  const BpResult res = barren_plateau(spec);
  for (const std::string& w : res.warnings) std::printf("  warning: %s\n", w.c_str());

  const BpFit* fit = nullptr;
  for (const BpFit& f : res.fits)
    if (f.wi == 1) fit = &f;
  ASSERT_NE(fit, nullptr);
  std::printf("  dE/dw1 variance decay rate %.5f over %d points\n", fit->rate, fit->points);
  EXPECT_EQ(fit->points, 6);  // the flat full-pool cell at n = 5 is skipped
  EXPECT_GE(fit->rate, 0.03);
  EXPECT_LE(fit->rate, 0.13);
  EXPECT_LT(fit->rate, 0.685);
  EXPECT_LE(report.seconds(), 1800.0);
}

// 10. Optimization-ratio trend: the rank correlation between the schedule
//     length and the median equidistant-to-optimized TTS ratio is positive
//     on the reduced ensemble. Individual ratios below 1 are permitted.
TEST(Acceptance, Criterion10OptimizationRatioTrendIsPositive) {
  CriterionReport report(10);
  const std::vector<RatioRow> rows = optimization_ratio(reduced_ensemble().pairs);
  ASSERT_FALSE(rows.empty());
  std::map<int, std::vector<double>> by_length;
  for (const RatioRow& row : rows) by_length[row.L].push_back(row.tts_ratio);
  ASSERT_GE(by_length.size(), 2u);
  std::vector<double> lengths, medians;
  for (auto& [L, ratios] : by_length) {
    lengths.push_back(static_cast<double>(L));
    medians.push_back(median(ratios));
    std::printf("  L=%d median ratio %.4f over %zu pairs\n", L, medians.back(), ratios.size());
  }
  const double rho = spearman(lengths, medians);
  std::printf("  spearman(L, median ratio) = %.4f\n", rho);
  EXPECT_GT(rho, 0.0);
}

// 11. Determinism: every CSV artifact the tool writes is byte-identical
//     across two runs with identical flags and seeds.
TEST(Acceptance, Criterion11ArtifactsAreByteStable) {
  CriterionReport report(11);
  const fs::path base = fs::temp_directory_path() / "rba_acceptance_det";
  fs::remove_all(base);
  const fs::path first = base / "a";
  const fs::path second = base / "b";

  const std::vector<std::pair<std::string, std::string>> dir_jobs = {
      {"ens", "ensemble --n-values 5,6 --r-values 4 --per-cell 2 --workers 1 --out-dir "},
      {"bp", "bp --n-values 5,6 --r-values 4 --per-cell 2 --samples 40 --workers 1 --out-dir "},
      {"thr", "thresholds --n-values 5,6 --r-values 4 --per-cell 2 --workers 1 --out-dir "},
      {"ratio", "ratio --n-values 5,6 --r-values 4 --per-cell 2 --workers 1 --out-dir "},
  };
  for (const auto& [name, prefix] : dir_jobs) {
    for (const fs::path& root : {first, second}) {
      const fs::path dir = root / name;
      fs::create_directories(dir);
      const RunResult r = run_tool(prefix + dir.string());
      ASSERT_EQ(r.exit_code, 0) << name << ": " << r.output;
    }
  }
  for (const fs::path& root : {first, second}) {
    ASSERT_EQ(run_tool("sweep -n 6 -r 4 -s 1 --csv " + (root / "sweep.csv").string()).exit_code,
              0);
    ASSERT_EQ(run_tool("rba -n 6 -r 4 -s 1 --L 2 --state-out " + (root / "state.csv").string() +
                       " --spectrum-out " + (root / "slices.csv").string())
                  .exit_code,
              0);
    ASSERT_EQ(
        run_tool("solve -n 6 -r 4 -s 1 --dump-energies " + (root / "diag.csv").string()).exit_code,
        0);
  }

  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(first)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), first);
    const std::string a = slurp(entry.path());
    ASSERT_FALSE(a.empty()) << rel;
    ASSERT_TRUE(fs::exists(second / rel)) << rel;
    EXPECT_EQ(a, slurp(second / rel)) << rel;
    ++compared;
  }
  std::printf("  compared %d artifacts byte for byte\n", compared);
  EXPECT_GE(compared, 12);
  fs::remove_all(base);
}
