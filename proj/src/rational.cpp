#include "drsim/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace drsim {

namespace {

std::int64_t parse_int(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  std::int64_t v = 0;
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) throw std::invalid_argument("bad integer");
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad digit in number");
    v = v * 10 + (s[i] - '0');
  }
  return neg ? -v : v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    const std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) return Rational(parse_int(text));
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = text.substr(dot + 1);
  const bool neg = !whole.empty() && whole[0] == '-';
  if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole.remove_prefix(1);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
  const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
  Rational r(w * den + f, den);
  return neg ? -r : r;
}

Rational rational_from_double(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite number");
  const bool neg = value < 0;
  double x = std::fabs(value);
  // Convergents h/k of the continued fraction of x.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(rest);
    if (a_d > 9e15) break;
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double frac = rest - a_d;
    if (std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - x) <= 1e-12 * std::max(1.0, x) ||
        frac < 1e-15) {
      break;
    }
    rest = 1.0 / frac;
  }
  if (k1 == 0) throw std::invalid_argument("cannot approximate number as a fraction");
  Rational r(h1, k1);
  return neg ? -r : r;
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::int64_t floor_of(const Rational& r) {
  const std::int64_t q = r.numerator() / r.denominator();
  return (r.numerator() % r.denominator() != 0 && r.numerator() < 0) ? q - 1 : q;
}

std::int64_t ceil_of(const Rational& r) {
  const std::int64_t q = r.numerator() / r.denominator();
  return (r.numerator() % r.denominator() != 0 && r.numerator() > 0) ? q + 1 : q;
}

}  // namespace drsim
