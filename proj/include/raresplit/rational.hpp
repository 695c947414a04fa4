#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace raresplit {

/// Arbitrary-precision exact rational used for branch weights and exact probabilities.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "3", "0.25", "-1.5" or "1/3" exactly. Throws std::invalid_argument.
Rational parse_rational(std::string_view text);

double to_double(const Rational& value);
std::string to_string(const Rational& value);

/// Score value: exact rational with a signed 64-bit numerator and unsigned 64-bit
/// denominator, which is also its wire representation. Always kept in lowest terms
/// with a positive denominator.
class Score {
 public:
  constexpr Score() = default;
  constexpr Score(std::int64_t integer) : num_(integer), den_(1) {}  // NOLINT(implicit)
  Score(std::int64_t numerator, std::uint64_t denominator);

  static Score parse(std::string_view text);
  static Score from_rational(const Rational& value);

  std::int64_t numerator() const { return num_; }
  std::uint64_t denominator() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  Rational to_rational() const;
  std::string to_string() const;

  friend bool operator==(const Score& a, const Score& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend std::strong_ordering operator<=>(const Score& a, const Score& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * static_cast<__int128>(b.den_);
    const __int128 rhs = static_cast<__int128>(b.num_) * static_cast<__int128>(a.den_);
    return lhs <=> rhs;
  }

 private:
  std::int64_t num_ = 0;
  std::uint64_t den_ = 1;
};

}  // namespace raresplit
