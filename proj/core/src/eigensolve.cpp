#include "rba/eigensolve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Dense>

#include "rba/format.hpp"
#include "rba/rng.hpp"

namespace rba {

namespace {

constexpr double kBreakdown = 1e-13;
constexpr int kHarvestCap = 12;
constexpr std::size_t kLockedCap = 192;

double degen_tol(double e0) { return 1e-9 * std::max(1.0, std::abs(e0)); }

// Indices at which a new eigenvalue level begins in an ascending list.
std::vector<std::size_t> level_starts(const std::vector<double>& sorted_vals) {
  std::vector<std::size_t> starts;
  if (sorted_vals.empty()) return starts;
  starts.push_back(0);
  const double tol = degen_tol(sorted_vals.front());
  for (std::size_t i = 1; i < sorted_vals.size(); ++i)
    if (sorted_vals[i] - sorted_vals[i - 1] > tol) starts.push_back(i);
  return starts;
}

// Modified Gram-Schmidt sweep: removes the components of v along basis.
void orth_pass(StateVector& v, const std::vector<StateVector>& basis) {
  for (const auto& u : basis) axpy(-dot(v, u), u, v);
}

struct RunResult {
  std::vector<double> values;        // ascending
  std::vector<StateVector> vectors;  // orthonormal, orthogonal to the locked set
  bool random_started = false;
};

// One Lanczos run against the orthogonal complement of `locked`, with full
// reorthogonalization. Harvests every bottom Ritz pair whose true residual
// passes, restarting from the best Ritz vector if the basis grows too large.
RunResult extract_run(const InterpolatedHamiltonian& h, const std::vector<StateVector>& locked,
                      const StateVector* hint, std::uint64_t run_seed, double resid_tol,
                      int budget, int& matvecs_left) {
  const std::size_t d = h.dim();
  RunResult out;

  StateVector v(d);
  bool started = false;
  if (hint && hint->size() == d) {
    v = *hint;
    orth_pass(v, locked);
    orth_pass(v, locked);
    const double nv = norm(v);
    if (nv > 1e-3) {
      scale(v, 1.0 / nv);
      started = true;
    }
  }
  if (!started) {
    out.random_started = true;
    Rng rng(run_seed);
    for (int attempt = 0;; ++attempt) {
      for (auto& a : v.amps) a = rng.symmetric();
      scale(v, 1.0 / norm(v));
      orth_pass(v, locked);
      orth_pass(v, locked);
      const double nv = norm(v);
      if (nv > 1e-6) {
        scale(v, 1.0 / nv);
        break;
      }
      if (attempt >= 20)
        throw LanczosFailure("lanczos: no start vector orthogonal to the locked set", h.w,
                             budget - matvecs_left);
    }
  }

  std::vector<StateVector> V;
  V.push_back(std::move(v));
  std::vector<double> alphas, betas;
  StateVector work(d), ritz(d), tmp(d);
  const int m_cap = static_cast<int>(std::min<std::size_t>(d - locked.size(), 250));

  while (true) {
    if (matvecs_left <= 0)
      throw LanczosFailure("lanczos: matvec budget exhausted at w = " + g17(h.w), h.w, budget);
    const int m = static_cast<int>(V.size());
    h.apply(V.back(), work);
    --matvecs_left;
    const double alpha = dot(work, V.back());
    alphas.push_back(alpha);
    axpy(-alpha, V.back(), work);
    if (m >= 2) axpy(-betas.back(), V[m - 2], work);
    const double eta = norm(work);
    orth_pass(work, locked);
    orth_pass(work, V);
    double beta = norm(work);
    if (beta < 0.5 * eta) {
      orth_pass(work, locked);
      orth_pass(work, V);
      beta = norm(work);
    }

    const bool invariant = beta <= kBreakdown;
    const bool at_cap = m >= m_cap;
    const int stride = m <= 40 ? 1 : (m <= 120 ? 5 : 10);
    if (invariant || at_cap || m % stride == 0) {
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alphas.data(), m);
      Eigen::VectorXd sub =
          m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(betas.data(), m - 1))
                : Eigen::VectorXd(0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const auto& S = es.eigenvectors();  // columns ordered by ascending Ritz value

      for (int i = 0; i < m && static_cast<int>(out.values.size()) < kHarvestCap; ++i) {
        const double est = beta * std::abs(S(m - 1, i));
        if (est > resid_tol) break;
        std::fill(ritz.amps.begin(), ritz.amps.end(), 0.0);
        for (int j = 0; j < m; ++j) axpy(S(j, i), V[j], ritz);
        orth_pass(ritz, locked);
        orth_pass(ritz, out.vectors);
        double nr = norm(ritz);
        if (nr < 0.5) continue;  // ghost duplicate of an already-converged pair
        scale(ritz, 1.0 / nr);
        orth_pass(ritz, locked);
        orth_pass(ritz, out.vectors);
        nr = norm(ritz);
        if (nr < 0.5) continue;
        scale(ritz, 1.0 / nr);
        if (matvecs_left <= 0)
          throw LanczosFailure("lanczos: matvec budget exhausted at w = " + g17(h.w), h.w, budget);
        h.apply(ritz, tmp);
        --matvecs_left;
        const double rho = dot(ritz, tmp);
        axpy(-rho, ritz, tmp);
        if (norm(tmp) > 10.0 * resid_tol) break;
        out.values.push_back(rho);
        out.vectors.push_back(ritz);
      }
      if (!out.values.empty()) {
        // keep ascending order (re-orthogonalization can reorder marginally)
        std::vector<std::size_t> idx(out.values.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return out.values[a] < out.values[b]; });
        RunResult sorted;
        sorted.random_started = out.random_started;
        for (std::size_t i : idx) {
          sorted.values.push_back(out.values[i]);
          sorted.vectors.push_back(std::move(out.vectors[i]));
        }
        return sorted;
      }
      if (invariant)
        throw LanczosFailure("lanczos: invariant subspace without a convergent eigenpair", h.w,
                             budget - matvecs_left);
      if (at_cap) {
        // thick restart from the current best Ritz vector
        std::fill(work.amps.begin(), work.amps.end(), 0.0);
        for (int j = 0; j < m; ++j) axpy(S(j, 0), V[j], work);
        orth_pass(work, locked);
        const double nw = norm(work);
        if (nw <= kBreakdown)
          throw LanczosFailure("lanczos: restart vector vanished", h.w, budget - matvecs_left);
        scale(work, 1.0 / nw);
        V.clear();
        V.push_back(work);
        alphas.clear();
        betas.clear();
        continue;
      }
    }
    betas.push_back(beta);
    scale(work, 1.0 / beta);
    V.push_back(work);
  }
}

}  // namespace

SpectrumSlice lanczos_lowest(const InterpolatedHamiltonian& h, const LanczosOptions& opt) {
  const std::size_t d = h.dim();
  if (d < 4)
    throw std::invalid_argument("lanczos_lowest: dimension below 4, use dense_spectrum");
  if (opt.k_distinct < 2 || opt.k_distinct > 3)
    throw std::invalid_argument("lanczos_lowest: k_distinct must be 2 or 3");
  if (!(opt.resid_tol > 0.0) || opt.resid_tol > 1e-8)
    throw std::invalid_argument("lanczos_lowest: resid_tol must lie in (0, 1e-8]");
  if (!(h.w >= 0.0 && h.w <= 1.0))
    throw std::invalid_argument("lanczos_lowest: w outside [0, 1]");

  int matvecs_left = opt.max_matvecs;
  std::vector<double> vals;
  std::vector<StateVector> vecs;
  const std::uint64_t wbits = std::bit_cast<std::uint64_t>(h.w);

  bool complete = false;
  for (std::uint64_t run = 0; !complete && vecs.size() < d; ++run) {
    if (vecs.size() > kLockedCap)
      throw LanczosFailure("lanczos: locked-set cap exceeded (extreme degeneracy)", h.w,
                           opt.max_matvecs - matvecs_left);

    // Hints speed up the bulk extractions; once enough levels are visible the
    // remaining runs are random-started so one of them can certify
    // completeness.
    const auto starts = level_starts(vals);
    const bool looks_complete = static_cast<int>(starts.size()) >= opt.k_distinct;
    const StateVector* hint = nullptr;
    if (!looks_complete && opt.hints && vecs.size() < opt.hints->size())
      hint = &(*opt.hints)[vecs.size()];

    RunResult rr = extract_run(h, vecs, hint, derive_seed(opt.seed, {wbits, run}), opt.resid_tol,
                               opt.max_matvecs,
                               matvecs_left);
    const double min_harvest = rr.values.front();
    for (std::size_t i = 0; i < rr.values.size(); ++i) {
      const auto pos = std::upper_bound(vals.begin(), vals.end(), rr.values[i]) - vals.begin();
      vals.insert(vals.begin() + pos, rr.values[i]);
      vecs.insert(vecs.begin() + pos, std::move(rr.vectors[i]));
    }
    const auto after = level_starts(vals);
    if (static_cast<int>(after.size()) >= opt.k_distinct && rr.random_started) {
      // A random start converges to the minimum of the deflated operator, so
      // landing at or above the top requested level proves the levels below
      // it hold no further copies.
      const double level_k = vals[after[opt.k_distinct - 1]];
      if (min_harvest >= level_k - degen_tol(vals.front())) complete = true;
    }
  }

  const auto starts = level_starts(vals);
  if (starts.size() < 2)
    throw LanczosFailure("lanczos: spectrum shows a single level", h.w,
                         opt.max_matvecs - matvecs_left);

  SpectrumSlice s;
  s.w = h.w;
  s.e0 = vals[0];
  s.e1 = vals[starts[1]];
  if (starts.size() >= 3) s.e2 = vals[starts[2]];
  const std::size_t g_end = starts[1];
  const std::size_t x_end = starts.size() >= 3 ? starts[2] : vals.size();
  s.ground_basis.assign(vecs.begin(), vecs.begin() + g_end);
  s.first_excited_basis.assign(vecs.begin() + g_end, vecs.begin() + x_end);
  s.first_excited_complete = opt.k_distinct >= 3 || vecs.size() == d;
  return s;
}

DenseSpectrum dense_spectrum(const InterpolatedHamiltonian& h) {
  if (h.n() > 10)
    throw std::invalid_argument("dense_spectrum: n > 10 is not supported, use lanczos_lowest");
  if (!(h.w >= 0.0 && h.w <= 1.0))
    throw std::invalid_argument("dense_spectrum: w outside [0, 1]");
  const std::size_t d = h.dim();
  const int nq = h.n();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  const double a = (1.0 - h.w) * h.pair->norm.h0_scale;
  for (std::size_t b = 0; b < d; ++b) {
    M(b, b) = h.w * h.pair->h1_diag[b] + a * nq;
    for (int k = 0; k < nq; ++k) {
      const std::size_t j = b ^ (std::size_t{1} << k);
      M(b, j) = -a;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense_spectrum: eigensolver failed");

  DenseSpectrum out;
  out.values.resize(d);
  out.vectors.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    out.values[i] = es.eigenvalues()(i);
    out.vectors[i] = StateVector(d);
    for (std::size_t b = 0; b < d; ++b) out.vectors[i][b] = es.eigenvectors()(b, i);
  }
  return out;
}

SpectrumSlice slice_from_dense(const DenseSpectrum& dense, double w, int k_distinct) {
  if (k_distinct < 2 || k_distinct > 3)
    throw std::invalid_argument("slice_from_dense: k_distinct must be 2 or 3");
  const auto starts = level_starts(dense.values);
  if (starts.size() < 2) throw std::runtime_error("slice_from_dense: spectrum shows a single level");
  SpectrumSlice s;
  s.w = w;
  s.e0 = dense.values[0];
  s.e1 = dense.values[starts[1]];
  if (starts.size() >= 3) s.e2 = dense.values[starts[2]];
  const std::size_t g_end = starts[1];
  const std::size_t x_end = starts.size() >= 3 ? starts[2] : dense.values.size();
  s.ground_basis.assign(dense.vectors.begin(), dense.vectors.begin() + g_end);
  s.first_excited_basis.assign(dense.vectors.begin() + g_end, dense.vectors.begin() + x_end);
  s.first_excited_complete = true;
  return s;
}

std::vector<SpectrumSlice> slice_schedule(const ProblemContext& ctx,
                                          std::span<const double> weights, int k_distinct,
                                          const LanczosOptions& base) {
  SliceCache cache(ctx, k_distinct, base);
  std::vector<SpectrumSlice> out;
  out.reserve(weights.size());
  for (double w : weights) out.push_back(cache.get(w));
  return out;
}

SliceCache::SliceCache(const ProblemContext& ctx, int k_distinct, LanczosOptions base)
    : ctx_(&ctx), k_distinct_(k_distinct), base_(base) {
  if (k_distinct < 2 || k_distinct > 3)
    throw std::invalid_argument("SliceCache: k_distinct must be 2 or 3");
  base_.hints = nullptr;
}

SpectrumSlice SliceCache::compute(double w) {
  if (!(w >= 0.0 && w <= 1.0))
    throw std::invalid_argument("slice: weight " + g17(w) + " outside [0, 1]");
  const InterpolatedHamiltonian h{&ctx_->ham, w};
  ++solves_;
  if (ctx_->dim() < 4) return slice_from_dense(dense_spectrum(h), w, k_distinct_);

  LanczosOptions o = base_;
  o.k_distinct = k_distinct_;
  const HintEntry* nearest = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& e : hints_) {
    const double dist = std::abs(e.w - w);
    if (dist < best_dist) {
      best_dist = dist;
      nearest = &e;
    }
  }
  if (nearest) o.hints = &nearest->vectors;

  SpectrumSlice s;
  try {
    s = lanczos_lowest(h, o);
  } catch (const LanczosFailure&) {
    if (ctx_->n() > 10) throw;
    s = slice_from_dense(dense_spectrum(h), w, k_distinct_);
  }

  HintEntry entry;
  entry.w = w;
  entry.vectors.reserve(s.ground_basis.size() + s.first_excited_basis.size());
  for (const auto& v : s.ground_basis) entry.vectors.push_back(v);
  for (const auto& v : s.first_excited_basis) entry.vectors.push_back(v);
  if (hints_.size() >= kMaxHints) {
    std::size_t victim = 0;
    double worst = -1.0;
    for (std::size_t i = 0; i < hints_.size(); ++i) {
      const double dist = std::abs(hints_[i].w - w);
      if (dist > worst) {
        worst = dist;
        victim = i;
      }
    }
    hints_.erase(hints_.begin() + victim);
  }
  hints_.push_back(std::move(entry));
  return s;
}

const SpectrumSlice& SliceCache::get(double w) {
  auto it = exact_.find(w);
  if (it != exact_.end()) {
    it->second.stamp = ++stamp_;
    return it->second.slice;
  }
  SpectrumSlice s = compute(w);
  if (exact_.size() >= kMaxExact) {
    auto victim = exact_.begin();
    for (auto j = exact_.begin(); j != exact_.end(); ++j)
      if (j->second.stamp < victim->second.stamp) victim = j;
    exact_.erase(victim);
  }
  auto [ins, inserted] = exact_.emplace(w, ExactEntry{std::move(s), ++stamp_});
  (void)inserted;
  return ins->second.slice;
}

void write_slices_csv(std::span<const SpectrumSlice> slices, std::ostream& out) {
  out << "w,e0,e1,e2,deg0,gap01,gap02\n";
  for (const auto& s : slices) {
    out << g17(s.w) << ',' << g17(s.e0) << ',' << g17(s.e1) << ',';
    if (s.e2) out << g17(*s.e2);
    out << ',' << s.deg0() << ',' << g17(s.gap01()) << ',';
    if (auto g = s.gap02()) out << g17(*g);
    out << '\n';
  }
}

}  // namespace rba
