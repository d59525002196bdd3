#include "rba/instance.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rba/rng.hpp"

namespace rba {

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

Rational Rational::parse(std::string_view text) {
  const auto parse_int = [](std::string_view s) -> std::int64_t {
    if (s.empty()) throw std::invalid_argument("Rational: empty component");
    std::size_t pos = 0;
    std::int64_t v;
    try {
      v = std::stoll(std::string(s), &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("Rational: not an integer: '" + std::string(s) + "'");
    }
    if (pos != s.size())
      throw std::invalid_argument("Rational: trailing characters in '" + std::string(s) + "'");
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational::of(parse_int(text), 1);
  return Rational::of(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::int64_t Rational::times_exact(std::int64_t n) const {
  const std::int64_t prod = num * n;
  if (prod % den != 0)
    throw std::invalid_argument("ratio " + str() + " times " + std::to_string(n) +
                                " is not an integer");
  return prod / den;
}

Clause Clause::make(Literal a, Literal b) {
  if (a.var == b.var)
    throw std::invalid_argument("clause literals must touch distinct variables (got variable " +
                                std::to_string(a.var) + " twice)");
  if (b.var < a.var) std::swap(a, b);
  return Clause{a, b};
}

Rational SatInstance::ratio() const {
  return Rational::of(static_cast<std::int64_t>(clauses.size()), n);
}

bool literal_satisfied(const Literal& lit, std::uint64_t assignment) {
  const bool value = (assignment >> lit.var) & 1u;
  return value != lit.negated;
}

bool clause_satisfied(const Clause& c, std::uint64_t assignment) {
  return literal_satisfied(c.first, assignment) || literal_satisfied(c.second, assignment);
}

int count_satisfied(const SatInstance& inst, std::uint64_t assignment) {
  int sat = 0;
  for (const auto& c : inst.clauses) sat += clause_satisfied(c, assignment) ? 1 : 0;
  return sat;
}

std::int64_t clause_pool_size(int n) {
  return 2LL * n * (n - 1);  // 4 * C(n, 2)
}

namespace {

void validate_instance(const SatInstance& inst) {
  if (inst.n < 2) throw std::invalid_argument("instance needs at least 2 variables");
  if (inst.n > 63) throw std::invalid_argument("instance too large (n > 63)");
  for (std::size_t i = 0; i < inst.clauses.size(); ++i) {
    const Clause& c = inst.clauses[i];
    if (c.first.var < 0 || c.second.var >= inst.n)
      throw std::invalid_argument("clause " + std::to_string(i) +
                                  " references a variable outside [0, n)");
    if (c.first.var >= c.second.var)
      throw std::invalid_argument("clause " + std::to_string(i) + " is not in canonical order");
  }
  for (std::size_t i = 1; i < inst.clauses.size(); ++i) {
    if (inst.clauses[i - 1] == inst.clauses[i])
      throw std::invalid_argument("duplicate clause at position " + std::to_string(i));
    if (inst.clauses[i] < inst.clauses[i - 1])
      throw std::invalid_argument("clauses are not sorted at position " + std::to_string(i));
  }
}

Clause pool_clause(int n, std::int64_t index) {
  // Pair index first, then 2 bits of polarity.
  const std::int64_t pair = index / 4;
  const int pol = static_cast<int>(index % 4);
  // Unrank the pair (i, j), i < j, from the lexicographic enumeration.
  std::int64_t k = pair;
  int i = 0;
  while (k >= n - 1 - i) {
    k -= n - 1 - i;
    ++i;
  }
  const int j = i + 1 + static_cast<int>(k);
  return Clause::make(Literal{i, (pol & 1) != 0}, Literal{j, (pol & 2) != 0});
}

}  // namespace

SatInstance generate(int n, const Rational& r, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate: n must be at least 2");
  if (n > 24) throw std::invalid_argument("generate: n must be at most 24");
  if (r.num < 0) throw std::invalid_argument("generate: ratio must be non-negative");
  const std::int64_t m = r.times_exact(n);
  const std::int64_t pool = clause_pool_size(n);
  if (m > pool)
    throw std::invalid_argument("generate: " + std::to_string(m) + " clauses requested but only " +
                                std::to_string(pool) + " distinct clauses exist for n = " +
                                std::to_string(n));

  std::vector<std::int64_t> indices(pool);
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m)}));
  // Partial Fisher-Yates: after i steps the first i entries are a uniform
  // sample without replacement.
  for (std::int64_t i = 0; i < m; ++i) {
    const std::int64_t j = i + static_cast<std::int64_t>(rng.below(pool - i));
    std::swap(indices[i], indices[j]);
  }

  SatInstance inst;
  inst.n = n;
  // A request for the whole pool admits exactly one instance, so the seed is
  // immaterial; pin it so the emitted files are identical across seeds.
  inst.seed = (m == pool) ? 0 : seed;
  inst.clauses.reserve(m);
  for (std::int64_t i = 0; i < m; ++i) inst.clauses.push_back(pool_clause(n, indices[i]));
  std::sort(inst.clauses.begin(), inst.clauses.end());
  validate_instance(inst);
  return inst;
}

BruteForceResult brute_force(const SatInstance& inst) {
  validate_instance(inst);
  if (inst.n > 20) throw std::invalid_argument("brute_force: n > 20 is not supported");
  const std::uint64_t dim = std::uint64_t{1} << inst.n;
  BruteForceResult out;
  out.max_satisfied = -1;
  for (std::uint64_t b = 0; b < dim; ++b) {
    const int sat = count_satisfied(inst, b);
    if (sat > out.max_satisfied) {
      out.max_satisfied = sat;
      out.optimal_assignments.clear();
    }
    if (sat == out.max_satisfied) out.optimal_assignments.push_back(b);
  }
  out.ground_degeneracy = static_cast<int>(out.optimal_assignments.size());
  return out;
}

void save_json(const SatInstance& inst, std::ostream& out) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["r"] = inst.ratio().str();
  j["seed"] = inst.seed;
  auto& arr = j["clauses"] = nlohmann::json::array();
  for (const auto& c : inst.clauses)
    arr.push_back({c.first.var, c.first.negated ? 1 : 0, c.second.var, c.second.negated ? 1 : 0});
  out << j.dump(2) << '\n';
}

SatInstance load_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("instance JSON: ") + e.what());
  }
  SatInstance inst;
  try {
    inst.n = j.at("n").get<int>();
    inst.seed = j.value("seed", std::uint64_t{0});
    for (const auto& row : j.at("clauses")) {
      if (!row.is_array() || row.size() != 4)
        throw std::invalid_argument("instance JSON: each clause needs [var, neg, var, neg]");
      inst.clauses.push_back(Clause::make(Literal{row[0].get<int>(), row[1].get<int>() != 0},
                                          Literal{row[2].get<int>(), row[3].get<int>() != 0}));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("instance JSON: ") + e.what());
  }
  std::sort(inst.clauses.begin(), inst.clauses.end());
  validate_instance(inst);
  if (j.contains("r")) {
    const Rational r = Rational::parse(j.at("r").get<std::string>());
    if (!(r == inst.ratio()))
      throw std::invalid_argument("instance JSON: declared ratio " + r.str() +
                                  " does not match " + inst.ratio().str());
  }
  return inst;
}

void save_wcnf(const SatInstance& inst, std::ostream& out) {
  out << "c seed " << inst.seed << '\n';
  out << "p wcnf " << inst.n << ' ' << inst.clauses.size() << '\n';
  for (const auto& c : inst.clauses) {
    const auto lit = [](const Literal& l) { return (l.negated ? -1 : 1) * (l.var + 1); };
    out << "1 " << lit(c.first) << ' ' << lit(c.second) << " 0\n";
  }
}

SatInstance load_wcnf(std::istream& in) {
  SatInstance inst;
  std::uint64_t seed = 0;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::size_t expected = 0;
  const auto fail = [&](const std::string& why) {
    throw std::invalid_argument("wcnf line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank
    if (tok == "c") {
      std::string key;
      if (ss >> key && key == "seed") ss >> seed;
      continue;
    }
    if (tok == "p") {
      std::string fmt;
      int n = 0;
      long m = -1;
      if (!(ss >> fmt >> n >> m) || fmt != "wcnf") fail("expected 'p wcnf <n> <m>'");
      if (have_header) fail("duplicate header");
      have_header = true;
      inst.n = n;
      expected = static_cast<std::size_t>(m);
      continue;
    }
    if (!have_header) fail("clause before 'p wcnf' header");
    long weight = 0, a = 0, b = 0, zero = -1;
    std::istringstream cs(line);
    if (!(cs >> weight >> a >> b >> zero) || zero != 0) fail("expected '<w> <lit> <lit> 0'");
    if (weight != 1) fail("only unit clause weights are supported");
    const auto to_literal = [&](long v) {
      if (v == 0) fail("literal 0 inside clause");
      const int var = static_cast<int>((v < 0 ? -v : v) - 1);
      if (var >= inst.n) fail("literal " + std::to_string(v) + " outside 1.." +
                              std::to_string(inst.n));
      return Literal{var, v < 0};
    };
    const Literal first = to_literal(a);
    const Literal second = to_literal(b);
    try {
      inst.clauses.push_back(Clause::make(first, second));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (!have_header) throw std::invalid_argument("wcnf: missing 'p wcnf' header");
  if (inst.clauses.size() != expected)
    throw std::invalid_argument("wcnf: header promises " + std::to_string(expected) +
                                " clauses, found " + std::to_string(inst.clauses.size()));
  inst.seed = seed;
  std::sort(inst.clauses.begin(), inst.clauses.end());
  try {
    validate_instance(inst);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("wcnf: ") + e.what());
  }
  return inst;
}

namespace {

bool has_extension(const std::filesystem::path& path, std::string_view ext) {
  std::string e = path.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

}  // namespace

void save(const SatInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (has_extension(path, ".json"))
    save_json(inst, out);
  else if (has_extension(path, ".wcnf") || has_extension(path, ".cnf"))
    save_wcnf(inst, out);
  else
    throw std::invalid_argument("unknown instance format: " + path.string() +
                                " (expected .json, .wcnf or .cnf)");
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SatInstance load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (has_extension(path, ".json")) return load_json(in);
  if (has_extension(path, ".wcnf") || has_extension(path, ".cnf")) return load_wcnf(in);
  throw std::invalid_argument("unknown instance format: " + path.string() +
                              " (expected .json, .wcnf or .cnf)");
}

}  // namespace rba
