#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <string>
#include <string_view>

namespace drsim {

using Rational = boost::rational<std::int64_t>;

// Accepts "p/q", integers and decimals ("0.25"). Decimals are read exactly.
Rational parse_rational(std::string_view text);
// Nearest fraction with denominator <= max_den (continued fractions); used
// for JSON numbers, which arrive as doubles.
Rational rational_from_double(double value, std::int64_t max_den = 1000000);
std::string to_string(const Rational& r);
double to_double(const Rational& r);
std::int64_t floor_of(const Rational& r);
std::int64_t ceil_of(const Rational& r);

}  // namespace drsim
