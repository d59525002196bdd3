#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rba/format.hpp"
#include "rba/grover.hpp"
#include "rba/problem.hpp"
#include "rba/schedule.hpp"

namespace rba {

std::string mode_name(ThresholdMode mode);        // "below_e1" / "below_e2"
ThresholdMode parse_mode(const std::string& name);

// One cell member of an instance ensemble. The seed fully determines the
// instance given (n, r).
struct InstanceRef {
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
};

// Expands (n, r, index) cells into per-instance seeds derived from the base
// seed. Cells whose clause count exhausts the whole pool admit exactly one
// instance and are capped accordingly.
std::vector<InstanceRef> expand_cells(std::span<const int> n_values,
                                      std::span<const Rational> r_values,
                                      int instances_per_cell, std::uint64_t base_seed);

struct EnsembleSpec {
  std::vector<int> n_values = {5, 6, 7, 8, 9, 10, 11, 12, 13};
  std::vector<Rational> r_values = {Rational::of(4, 1), Rational::of(6, 1), Rational::of(8, 1)};
  int instances_per_cell = 20;
  std::uint64_t base_seed = 1;
  double epsilon = 0.1;
  ThresholdMode mode = ThresholdMode::BelowFirstExcited;
  bool with_optimized = true;
  double fail_target = 0.2;  // iteration-count metric threshold
  int fail_target_max_L = 30;
  int workers = 0;  // 0 = hardware concurrency
  SweepConfig sweep;
};

struct TtsRow {
  std::string algorithm;  // "rba" / "grover"
  std::string variant;    // "equidistant" / "optimized" / "-"
  std::string mode;       // "below_e1" / "below_e2" / "-"
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
  int L_or_nit = 0;
  double p_success = 0.0;
  double tts = 0.0;
};

struct IterationObs {
  std::string algorithm;
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
  int iterations = 0;
};

struct RatioRow {
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
  int L = 0;
  double tts_ratio = 0.0;  // equidistant TTS / optimized TTS
};

// Matched equidistant/optimized TTS measurements at the same schedule length.
struct SweepPairRow {
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
  int L = 0;
  double tts_equidistant = 0.0;
  double tts_optimized = 0.0;
};

struct ThresholdRow {
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
  int L = 0;
  double p_below_e1 = 0.0;
  double tts_below_e1 = 0.0;
  double p_below_e2 = 0.0;
  double tts_below_e2 = 0.0;
  double min_gap01 = 0.0;
  double min_gap02 = 0.0;
};

struct EnsembleResult {
  std::vector<TtsRow> tts;
  std::vector<IterationObs> iterations;
  std::vector<SweepPairRow> pairs;
  std::vector<ThresholdRow> thresholds;
  int wins_below_e2 = 0;  // threshold rows where the wider threshold gave smaller TTS
  std::vector<std::string> warnings;
};

// Per instance: Grover at its closed-form optimum, an equidistant-L sweep,
// an optional optimized sweep, and a rerun of the best equidistant schedule
// under both threshold rules. Iteration observations record Grover's
// iterations to reach the failure target and the smallest schedule length
// whose failure probability beats the same target. Pair rows match the two
// sweeps at identical L over the lengths up to both sweeps' chosen optima;
// later entries only serve the stop rule and are not part of the dataset.
// Instances whose every assignment is optimal cannot be searched for and are
// skipped with a warning. Deterministic given the spec, independent of
// worker count.
EnsembleResult run_ensemble(const EnsembleSpec& spec);

struct IterationMedianRow {
  std::string algorithm;
  int n = 0;
  Rational r;
  double median_iterations = 0.0;
};

std::vector<IterationMedianRow> iteration_medians(std::span<const IterationObs> obs);

struct BarrenPlateauSpec {
  std::vector<int> n_values = {5, 6, 7, 8, 9, 10, 11, 12, 13};
  std::vector<Rational> r_values = {Rational::of(8, 1)};
  int instances_per_cell = 5;
  int samples = 5000;
  double h = 1e-4;  // central-difference step
  std::uint64_t base_seed = 1;
  int workers = 0;
  double w1_lo = 1.0 / 6.0, w1_hi = 1.0 / 2.0;
  double w2_lo = 1.0 / 2.0, w2_hi = 5.0 / 6.0;
};

struct BpRow {
  int n = 0;
  Rational r;
  std::uint64_t seed = 0;
  int wi = 1;  // which weight the gradient was taken against (1 or 2)
  double variance = 0.0;
};

struct BpPerN {
  int wi = 1;
  int n = 0;
  double median_variance = 0.0;
  double std_variance = 0.0;  // across instances
};

struct BpFit {
  int wi = 1;
  double rate = 0.0;  // minus the slope of ln(median variance) vs n
  double intercept = 0.0;
  double residual = 0.0;  // rms of the fit residuals
  int points = 0;
};

struct BpResult {
  std::vector<BpRow> rows;
  std::vector<BpPerN> per_n;
  std::vector<BpFit> fits;
  std::vector<std::string> warnings;
};

// Two-reflection gradient-variance study. For each sample, w1 and w2 are
// drawn uniformly from their intervals, the energy expectation of the final
// state is differentiated against each weight by central differences, and the
// per-instance variance of each gradient is recorded. Median variances per n
// feed a least-squares fit of their natural log against n; non-positive or
// non-finite medians are excluded from the fit.
BpResult barren_plateau(const BarrenPlateauSpec& spec);

// Derives the equidistant-to-optimized TTS ratio series from matched sweep
// pairs. Pairs whose quotient is not finite are skipped.
std::vector<RatioRow> optimization_ratio(std::span<const SweepPairRow> dataset);

struct ThresholdSpec {
  std::vector<int> n_values = {6, 8, 10};
  std::vector<Rational> r_values = {Rational::of(8, 1)};
  int instances_per_cell = 5;
  std::uint64_t base_seed = 1;
  double epsilon = 0.1;
  bool optimize = false;
  SweepConfig sweep;
  int workers = 0;
};

struct ThresholdResult {
  std::vector<ThresholdRow> rows;
  int wins_below_e2 = 0;  // rows where the wider threshold gave smaller TTS
  std::vector<std::string> warnings;
};

// Runs each instance's best schedule under both threshold rules and compares
// the resulting TTS and per-run minimum gaps.
ThresholdResult threshold_study(const ThresholdSpec& spec);

// Statistics helpers.
double median(std::vector<double> values);  // throws on empty input

// Tie-aware rank correlation. Returns NaN when either side has no rank
// variation; throws on mismatched or undersized inputs.
double spearman(std::span<const double> x, std::span<const double> y);

// CSV writers. All floats go through g17; rows are written in input order.
void write_tts_csv(std::span<const TtsRow> rows, std::ostream& out);
void write_iterations_csv(std::span<const IterationMedianRow> rows, std::ostream& out);
void write_ratio_csv(std::span<const RatioRow> rows, std::ostream& out);
void write_bp_csv(std::span<const BpRow> rows, std::ostream& out);
void write_bp_fit_csv(std::span<const BpFit> fits, std::ostream& out);
void write_threshold_csv(std::span<const ThresholdRow> rows, std::ostream& out);

}  // namespace rba
