#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rba {

// Exact clause-to-variable ratio. Always stored reduced with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den);

  // Accepts "8" or "7/2". Throws std::invalid_argument on anything else.
  static Rational parse(std::string_view text);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const;

  // this * n when the product is an exact integer; throws otherwise.
  std::int64_t times_exact(std::int64_t n) const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
};

}  // namespace rba
