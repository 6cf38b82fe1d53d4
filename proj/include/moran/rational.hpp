#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstring>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "moran/error.hpp"

namespace moran {

using Rational = mpq_class;
using Integer = mpz_class;

// Accepts "p", "p/q" with an optional leading sign; whitespace is not allowed.
inline Rational parse_rational(std::string_view text) {
  auto digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  std::string_view body = text;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) body.remove_prefix(1);
  const auto slash = body.find('/');
  const bool ok = slash == std::string_view::npos
                      ? digits(body)
                      : digits(body.substr(0, slash)) && digits(body.substr(slash + 1));
  if (!ok) fail(ErrorCode::MalformedRational, "'" + std::string(text) + "'");
  std::string canonical(text.front() == '+' ? text.substr(1) : text);
  Rational value;
  if (value.set_str(canonical, 10) != 0) fail(ErrorCode::MalformedRational, "'" + std::string(text) + "'");
  if (value.get_den() == 0) fail(ErrorCode::MalformedRational, "zero denominator in '" + std::string(text) + "'");
  value.canonicalize();
  return value;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Nearest double, ties to even. mpq_get_d alone truncates toward zero.
inline double to_double(const Rational& q) {
  const double toward_zero = q.get_d();
  if (Rational(toward_zero) == q) return toward_zero;
  const double away = std::nextafter(toward_zero, q > 0 ? std::numeric_limits<double>::infinity()
                                                        : -std::numeric_limits<double>::infinity());
  if (!std::isfinite(away)) return toward_zero;
  const Rational near_gap = abs(q - Rational(toward_zero)), far_gap = abs(Rational(away) - q);
  if (near_gap != far_gap) return near_gap < far_gap ? toward_zero : away;
  std::int64_t bits = 0;
  std::memcpy(&bits, &toward_zero, sizeof bits);
  return bits % 2 == 0 ? toward_zero : away;
}

inline Rational pow(const Rational& base, unsigned long exponent) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  return out;
}

inline Integer ceil(const Rational& q) {
  Integer out;
  mpz_cdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

inline bool fits_u64(const Integer& z) {
  return z >= 0 && mpz_sizeinbase(z.get_mpz_t(), 2) <= 64;
}

inline std::uint64_t to_u64(const Integer& z) {
  if (!fits_u64(z)) fail(ErrorCode::WeightOverflow, "integer " + z.get_str() + " exceeds 64 bits");
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, z.get_mpz_t());
  return out;
}

inline Integer from_u64(std::uint64_t v) {
  Integer out;
  mpz_import(out.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return out;
}

// Saturating conversion for step budgets, which can exceed 2^64 for large graphs.
inline std::uint64_t saturate_u64(const Integer& z) {
  if (z <= 0) return 0;
  return fits_u64(z) ? to_u64(z) : std::numeric_limits<std::uint64_t>::max();
}

}  // namespace moran
