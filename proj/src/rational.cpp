#include "raresplit/rational.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace raresplit {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational value;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    auto strip = [](std::string_view v) {
      std::string t(v);
      t.erase(0, std::min(t.find_first_not_of('0'), t.size() - 1));
      return t;
    };
    boost::multiprecision::cpp_int n{strip(num)}, d{strip(den)};
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    value = Rational(n, d);
  } else {
    auto dot = body.find('.');
    auto whole = body.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
    if ((whole.empty() && frac.empty()) || (!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (dot != std::string_view::npos && frac.empty())) {
      throw std::invalid_argument("malformed number '" + std::string(text) + "'");
    }
    std::string all = std::string(whole) + std::string(frac);
    // cpp_int treats a leading zero as an octal prefix.
    all.erase(0, std::min(all.find_first_not_of('0'), all.size() - 1));
    boost::multiprecision::cpp_int digits{all};
    boost::multiprecision::cpp_int scale = boost::multiprecision::pow(boost::multiprecision::cpp_int(10), static_cast<unsigned>(frac.size()));
    value = Rational(digits, scale);
  }
  return negative ? Rational(-value) : value;
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string to_string(const Rational& value) {
  const auto num = boost::multiprecision::numerator(value);
  const auto den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Score::Score(std::int64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) throw std::invalid_argument("score with zero denominator");
  const std::uint64_t mag = numerator < 0 ? static_cast<std::uint64_t>(-(numerator + 1)) + 1 : static_cast<std::uint64_t>(numerator);
  const std::uint64_t g = std::gcd(mag, denominator);
  num_ = g > 1 ? numerator / static_cast<std::int64_t>(g) : numerator;
  den_ = denominator / (g ? g : 1);
}

Score Score::parse(std::string_view text) { return from_rational(parse_rational(text)); }

Score Score::from_rational(const Rational& value) {
  const auto num = boost::multiprecision::numerator(value);
  const auto den = boost::multiprecision::denominator(value);
  if (num > std::numeric_limits<std::int64_t>::max() || num < std::numeric_limits<std::int64_t>::min() ||
      den > std::numeric_limits<std::uint64_t>::max()) {
    throw std::out_of_range("score " + raresplit::to_string(value) + " does not fit 64-bit parts");
  }
  return Score(num.convert_to<std::int64_t>(), den.convert_to<std::uint64_t>());
}

Rational Score::to_rational() const {
  return Rational(boost::multiprecision::cpp_int(num_), boost::multiprecision::cpp_int(den_));
}

std::string Score::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace raresplit
