#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace overloadx {

/// Positive rational j/k kept in lowest terms. Queue-ratio parameters are
/// stored this way so the difference-process lattice has exact jump sizes.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den);

  /// Parses "j/k" or a bare integer "j". Throws std::invalid_argument on
  /// anything else, including decimal strings such as "0.5".
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_one() const { return num_ == 1 && den_ == 1; }

  std::string to_string() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

}  // namespace overloadx
