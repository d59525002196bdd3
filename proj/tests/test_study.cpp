#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "rba/study.hpp"

using namespace rba;

TEST(Modes, NamesRoundTrip) {
  EXPECT_EQ(mode_name(ThresholdMode::BelowFirstExcited), "below_e1");
  EXPECT_EQ(mode_name(ThresholdMode::BelowSecondExcited), "below_e2");
  EXPECT_EQ(parse_mode("below_e1"), ThresholdMode::BelowFirstExcited);
  EXPECT_EQ(parse_mode("below-e2"), ThresholdMode::BelowSecondExcited);
  EXPECT_THROW(parse_mode("below_e3"), std::invalid_argument);
}

TEST(ExpandCells, SeedsAreDistinctAndDeterministic) {
  const std::vector<int> ns = {5, 6};
  const std::vector<Rational> rs = {Rational::of(4, 1)};
  const auto a = expand_cells(ns, rs, 3, 1);
  const auto b = expand_cells(ns, rs, 3, 1);
  ASSERT_EQ(a.size(), 6u);
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seed, b[i].seed);
    seeds.insert(a[i].seed);
  }
  EXPECT_EQ(seeds.size(), 6u);
  const auto c = expand_cells(ns, rs, 3, 2);
  EXPECT_NE(a[0].seed, c[0].seed);
}

TEST(ExpandCells, FullPoolCellsAdmitOneInstance) {
  const std::vector<int> ns = {5};
  const std::vector<Rational> rs = {Rational::of(8, 1)};  // 40 = whole pool
  const auto refs = expand_cells(ns, rs, 20, 1);
  EXPECT_EQ(refs.size(), 1u);
  const std::vector<Rational> over = {Rational::of(9, 1)};
  EXPECT_THROW(expand_cells(ns, over, 1, 1), std::invalid_argument);
}

TEST(Median, OddEvenAndErrors) {
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(median({7}), 7.0);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Spearman, MonotoneAndTiedCases) {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> up = {10, 20, 30, 40};
  const std::vector<double> down = {9, 7, 5, 3};
  EXPECT_DOUBLE_EQ(spearman(x, up), 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, down), -1.0);
  const std::vector<double> tied = {1, 1, 2, 2};
  const double rho = spearman(x, tied);
  EXPECT_GT(rho, 0.8);
  EXPECT_LT(rho, 1.0);
  const std::vector<double> flat = {5, 5, 5, 5};
  EXPECT_TRUE(std::isnan(spearman(x, flat)));
  EXPECT_THROW(spearman(x, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(IterationMedians, GroupsInFirstAppearanceOrder) {
  std::vector<IterationObs> obs = {
      {"grover", 6, Rational::of(4, 1), 1, 3},
      {"rba", 6, Rational::of(4, 1), 1, 2},
      {"grover", 6, Rational::of(4, 1), 2, 5},
      {"rba", 6, Rational::of(4, 1), 2, 4},
  };
  const auto rows = iteration_medians(obs);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].algorithm, "grover");
  EXPECT_DOUBLE_EQ(rows[0].median_iterations, 4.0);
  EXPECT_EQ(rows[1].algorithm, "rba");
  EXPECT_DOUBLE_EQ(rows[1].median_iterations, 3.0);
}

TEST(Ensemble, DeterministicAcrossWorkerCounts) {
  EnsembleSpec spec;
  spec.n_values = {5, 6};
  spec.r_values = {Rational::of(4, 1)};
  spec.instances_per_cell = 2;
  spec.workers = 1;
  const EnsembleResult a = run_ensemble(spec);
  spec.workers = 3;
  const EnsembleResult b = run_ensemble(spec);
  std::ostringstream sa, sb;
  write_tts_csv(a.tts, sa);
  write_tts_csv(b.tts, sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_TRUE(a.warnings.empty());
  // Three rows per instance: one Grover, two reflection variants.
  EXPECT_EQ(a.tts.size(), 12u);
  EXPECT_EQ(a.iterations.size(), 8u);
  // One threshold comparison per instance, and matched sweep pairs feed the
  // ratio series.
  EXPECT_EQ(a.thresholds.size(), 4u);
  EXPECT_FALSE(a.pairs.empty());
  const auto ratios = optimization_ratio(a.pairs);
  EXPECT_LE(ratios.size(), a.pairs.size());
  for (const auto& row : ratios) EXPECT_TRUE(std::isfinite(row.tts_ratio));
}

TEST(OptimizationRatio, DividesMatchedPairsAndSkipsNonFinite) {
  std::vector<SweepPairRow> pairs = {
      {6, Rational::of(4, 1), 1, 2, 30.0, 15.0},
      {6, Rational::of(4, 1), 1, 3, 10.0, 0.0},  // non-finite quotient
      {8, Rational::of(8, 1), 2, 1, 7.0, 14.0},
  };
  const auto rows = optimization_ratio(pairs);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].tts_ratio, 2.0);
  EXPECT_EQ(rows[0].L, 2);
  EXPECT_DOUBLE_EQ(rows[1].tts_ratio, 0.5);
}

TEST(Ensemble, SkipsDegenerateCellsWithWarning) {
  EnsembleSpec spec;
  spec.n_values = {5};
  spec.r_values = {Rational::of(8, 1)};  // full pool: flat clause spectrum
  spec.instances_per_cell = 2;
  spec.workers = 1;
  const EnsembleResult res = run_ensemble(spec);
  EXPECT_TRUE(res.tts.empty());
  ASSERT_EQ(res.warnings.size(), 1u);
  EXPECT_NE(res.warnings[0].find("skipped"), std::string::npos);
}

TEST(BarrenPlateau, TinyRunProducesRowsPerWeight) {
  BarrenPlateauSpec spec;
  spec.n_values = {6};
  spec.r_values = {Rational::of(8, 1)};
  spec.instances_per_cell = 1;
  spec.samples = 20;
  spec.workers = 1;
  const BpResult res = barren_plateau(spec);
  ASSERT_EQ(res.rows.size(), 2u);
  EXPECT_EQ(res.rows[0].wi, 1);
  EXPECT_EQ(res.rows[1].wi, 2);
  EXPECT_GT(res.rows[0].variance, 0.0);
  ASSERT_EQ(res.per_n.size(), 2u);
  // One n-point per weight cannot support a fit.
  EXPECT_TRUE(res.fits.empty());
  EXPECT_EQ(res.warnings.size(), 2u);
}

TEST(BarrenPlateau, ValidatesSpec) {
  BarrenPlateauSpec spec;
  spec.samples = 1;
  EXPECT_THROW(barren_plateau(spec), std::invalid_argument);
  spec.samples = 10;
  spec.w1_lo = 0.0;  // no room for the stencil below
  EXPECT_THROW(barren_plateau(spec), std::invalid_argument);
}

TEST(Thresholds, ComparesBothRulesOnBestSchedule) {
  ThresholdSpec spec;
  spec.n_values = {6};
  spec.r_values = {Rational::of(4, 1)};
  spec.instances_per_cell = 2;
  spec.workers = 1;
  const ThresholdResult res = threshold_study(spec);
  ASSERT_EQ(res.rows.size(), 2u);
  for (const auto& row : res.rows) {
    EXPECT_GE(row.p_below_e1, 0.0);
    EXPECT_LE(row.p_below_e1, 1.0);
    EXPECT_GE(row.p_below_e2, 0.0);
    EXPECT_LE(row.p_below_e2, 1.0);
    EXPECT_GT(row.min_gap01, 0.0);
    EXPECT_GT(row.min_gap02, row.min_gap01);  // wider threshold, wider gap
    EXPECT_GE(row.L, 1);
  }
  int wins = 0;
  for (const auto& row : res.rows)
    if (row.tts_below_e2 < row.tts_below_e1) ++wins;
  EXPECT_EQ(res.wins_below_e2, wins);
}

TEST(CsvWriters, HeadersAreStable) {
  std::ostringstream a, b, c, d, e, f;
  write_tts_csv({}, a);
  write_iterations_csv({}, b);
  write_ratio_csv({}, c);
  write_bp_csv({}, d);
  write_bp_fit_csv({}, e);
  write_threshold_csv({}, f);
  EXPECT_EQ(a.str(), "algorithm,variant,mode,n,r,seed,L_or_nit,p_success,tts\n");
  EXPECT_EQ(b.str(), "algorithm,n,r,median_iterations\n");
  EXPECT_EQ(c.str(), "n,r,seed,L,tts_ratio\n");
  EXPECT_EQ(d.str(), "n,r,seed,wi,variance\n");
  EXPECT_EQ(e.str(), "wi,rate,intercept,residual\n");
  EXPECT_EQ(f.str(),
            "n,r,seed,L,p_below_e1,tts_below_e1,p_below_e2,tts_below_e2,min_gap01,min_gap02\n");
}

TEST(CsvWriters, BpRowsNameTheWeight) {
  std::vector<BpRow> rows = {{8, Rational::of(8, 1), 9, 1, 0.5}, {8, Rational::of(8, 1), 9, 2, 0.25}};
  std::ostringstream os;
  write_bp_csv(rows, os);
  EXPECT_NE(os.str().find("8,8,9,w1,0.5"), std::string::npos);
  EXPECT_NE(os.str().find("8,8,9,w2,0.25"), std::string::npos);
}
