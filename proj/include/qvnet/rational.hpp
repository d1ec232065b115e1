#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace qvnet {

/// Exact rational number over 64-bit integers.
///
/// Always stored in lowest terms with a positive denominator, so equality is
/// structural. Intermediate products are computed in 128 bits; a result that
/// does not fit back into 64 bits throws `Error(ErrorCode::overflow)`.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  [[nodiscard]] constexpr std::int64_t num() const noexcept { return num_; }
  [[nodiscard]] constexpr std::int64_t den() const noexcept { return den_; }

  [[nodiscard]] bool is_zero() const noexcept { return num_ == 0; }
  [[nodiscard]] bool is_integer() const noexcept { return den_ == 1; }
  [[nodiscard]] double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  /// Largest integer not greater than the value.
  [[nodiscard]] std::int64_t floor() const noexcept;
  /// Value minus floor(); always in [0, 1).
  [[nodiscard]] Rational frac() const;

  /// "p/q", or "p" for integers.
  [[nodiscard]] std::string to_string() const;

  /// Accepts "p", "p/q", and terminating decimals such as "0.125" or "-2.5".
  static Rational parse(std::string_view text);

  /// Closest rational with denominator at most `max_den` (continued fractions).
  static Rational approximate(double value, std::int64_t max_den = 1'000'000'000);

  /// Largest multiple of 1/den not above this value.
  [[nodiscard]] Rational quantize(std::int64_t den) const;

  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  friend Rational operator-(const Rational& v) { return Rational(0) - v; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
    const __int128 l = static_cast<__int128>(lhs.num_) * rhs.den_;
    const __int128 r = static_cast<__int128>(rhs.num_) * lhs.den_;
    return l <=> r;
  }

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace qvnet
