#include "qvnet/rational.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "qvnet/error.hpp"

namespace qvnet {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr __int128 kMax = std::numeric_limits<std::int64_t>::max();
constexpr __int128 kMin = std::numeric_limits<std::int64_t>::min();

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw Error(ErrorCode::parse_error, "not a rational: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = from_wide(num, den);
}

Rational Rational::from_wide(__int128 num, __int128 den) {
  if (den == 0) throw Error(ErrorCode::parse_error, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax || num < kMin || den > kMax) {
    throw Error(ErrorCode::overflow, "rational out of 64-bit range");
  }
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

std::int64_t Rational::floor() const noexcept {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

Rational Rational::frac() const { return *this - Rational(floor()); }

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
  const std::string_view whole = text;
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto n = parse_int(text.substr(0, slash), whole);
    const auto d = parse_int(text.substr(slash + 1), whole);
    if (d == 0) throw Error(ErrorCode::parse_error, "zero denominator in '" + std::string(whole) + "'");
    return {n, d};
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const bool negative = !text.empty() && text.front() == '-';
    const auto int_part = text.substr(0, dot);
    const auto frac_part = text.substr(dot + 1);
    if (frac_part.size() > 18) throw Error(ErrorCode::parse_error, "too many decimals in '" + std::string(whole) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    const std::int64_t ip =
        (int_part.empty() || int_part == "-" || int_part == "+") ? 0 : parse_int(int_part, whole);
    const std::int64_t fp = frac_part.empty() ? 0 : parse_int(frac_part, whole);
    if (fp < 0) throw Error(ErrorCode::parse_error, "not a rational: '" + std::string(whole) + "'");
    const Rational magnitude = Rational(ip < 0 ? -ip : ip) + Rational(fp, scale);
    return negative ? -magnitude : magnitude;
  }
  return {parse_int(text, whole)};
}

Rational Rational::approximate(double value, std::int64_t max_den) {
  if (!std::isfinite(value)) throw Error(ErrorCode::overflow, "non-finite value");
  // Continued-fraction convergents h/k.
  __int128 h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = value;
  for (int i = 0; i < 64; ++i) {
    const double a = std::floor(x);
    if (std::fabs(a) > 9e18) break;
    const auto ai = static_cast<__int128>(a);
    const __int128 h2 = ai * h1 + h0;
    const __int128 k2 = ai * k1 + k0;
    if (k2 > max_den || h2 > kMax || h2 < kMin) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double rem = x - a;
    if (rem < 1e-15) break;
    x = 1.0 / rem;
  }
  if (k1 == 0) throw Error(ErrorCode::overflow, "cannot approximate value");
  return from_wide(h1, k1);
}

Rational Rational::quantize(std::int64_t den) const {
  if (den_ <= den && den % den_ == 0) return *this;
  const __int128 scaled = static_cast<__int128>(num_) * den;
  __int128 q = scaled / den_;
  if (scaled % den_ != 0 && scaled < 0) --q;
  return from_wide(q, den);
}

Rational& Rational::operator+=(const Rational& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_ + static_cast<__int128>(rhs.num_) * den_,
                    static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_ - static_cast<__int128>(rhs.num_) * den_,
                    static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator*=(const Rational& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.num_, static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw Error(ErrorCode::overflow, "division by zero");
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_, static_cast<__int128>(den_) * rhs.num_);
  return *this;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_node: return "UnknownNode";
    case ErrorCode::duplicate_link: return "DuplicateLink";
    case ErrorCode::self_loop: return "SelfLoop";
    case ErrorCode::negative_rate: return "NegativeRate";
    case ErrorCode::duplicate_node: return "DuplicateNode";
    case ErrorCode::non_monotonic_tick: return "NonMonotonicTick";
    case ErrorCode::insufficient_keys: return "InsufficientKeys";
    case ErrorCode::no_path: return "NoPath";
    case ErrorCode::invalid_quota: return "InvalidQuota";
    case ErrorCode::empty_subconn_set: return "EmptySubconnSet";
    case ErrorCode::unknown_subconnection: return "UnknownSubConnection";
    case ErrorCode::empty_qvnet: return "EmptyQVNet";
    case ErrorCode::numerical_failure: return "NumericalFailure";
    case ErrorCode::qvnet_not_found: return "QVNetNotFound";
    case ErrorCode::missing_static_route: return "MissingStaticRoute";
    case ErrorCode::invalid_pair: return "InvalidPair";
    case ErrorCode::invalid_rule: return "InvalidRule";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::validation_error: return "ValidationError";
    case ErrorCode::overflow: return "Overflow";
  }
  return "Unknown";
}

}  // namespace qvnet
