#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rba/rational.hpp"

namespace rba {

// One literal of a 2-clause. var indexes a variable in [0, n); a negated
// literal is satisfied when its variable is assigned FALSE.
struct Literal {
  int var = 0;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend bool operator<(const Literal& a, const Literal& b) {
    return a.var != b.var ? a.var < b.var : a.negated < b.negated;
  }
};

// Disjunction of two literals over distinct variables, kept in canonical
// order (first.var < second.var).
struct Clause {
  Literal first;
  Literal second;

  // Sorts the literals; throws if both touch the same variable.
  static Clause make(Literal a, Literal b);

  friend bool operator==(const Clause&, const Clause&) = default;
  friend bool operator<(const Clause& a, const Clause& b) {
    if (a.first < b.first) return true;
    if (b.first < a.first) return false;
    return a.second < b.second;
  }
};

// A MAX-2SAT instance. Assignments are n-bit basis indices: bit k holds the
// value of variable k, with 1 = TRUE. Clauses are pairwise distinct and
// stored sorted, so equal instances compare equal structurally.
struct SatInstance {
  int n = 0;
  std::vector<Clause> clauses;
  std::uint64_t seed = 0;

  friend bool operator==(const SatInstance&, const SatInstance&) = default;

  Rational ratio() const;  // |clauses| / n, reduced
};

bool literal_satisfied(const Literal& lit, std::uint64_t assignment);
bool clause_satisfied(const Clause& c, std::uint64_t assignment);
int count_satisfied(const SatInstance& inst, std::uint64_t assignment);

// Draws an instance uniformly from all clause sets of size r*n without
// replacement. The pool holds 4*C(n,2) distinct clauses (every unordered
// variable pair under every polarity), so r*n must not exceed it, and r*n
// must be an exact integer. Requires n >= 2. Fully determined by
// (n, r, seed); the result records the seed, except that a request for the
// entire pool records seed 0 since every seed yields that same instance.
SatInstance generate(int n, const Rational& r, std::uint64_t seed);

// Number of clauses available to generate() for a given n.
std::int64_t clause_pool_size(int n);

struct BruteForceResult {
  int max_satisfied = 0;
  std::vector<std::uint64_t> optimal_assignments;  // ascending
  int ground_degeneracy = 0;                       // == optimal_assignments.size()
};

// Exhaustive scan over all 2^n assignments. Guarded to n <= 20.
BruteForceResult brute_force(const SatInstance& inst);

// Serialization. JSON round-trips every field; the WCNF form stores the seed
// in a comment line and otherwise follows the standard weighted-CNF layout
// with unit weights. save()/load() dispatch on the file extension
// (".json" vs ".wcnf"/".cnf").
void save_json(const SatInstance& inst, std::ostream& out);
SatInstance load_json(std::istream& in);
void save_wcnf(const SatInstance& inst, std::ostream& out);
SatInstance load_wcnf(std::istream& in);
void save(const SatInstance& inst, const std::filesystem::path& path);
SatInstance load(const std::filesystem::path& path);

}  // namespace rba
