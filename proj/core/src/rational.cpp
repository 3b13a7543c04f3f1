#include "overloadx/rational.hpp"

#include <charconv>
#include <numeric>
#include <stdexcept>

namespace overloadx {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) {
    throw std::invalid_argument("rational must be positive, got " + std::to_string(num) + "/" +
                                std::to_string(den));
  }
  const auto g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("malformed rational \"" + std::string(whole) +
                                "\" (expected \"j/k\" with positive integers)");
  }
  return v;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return Rational(parse_int(text, text), 1);
  }
  return Rational(parse_int(text.substr(0, slash), text), parse_int(text.substr(slash + 1), text));
}

std::string Rational::to_string() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace overloadx
