#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ergolab {

enum class ErrorKind {
  InvalidInput,
  EmptyDomain,
  DegenerateInput,
  UnsupportedModulus,
  NotCombinable,
  Exhausted,
  Refuted,
  Internal,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library. The kind lets callers (and the CLI)
/// distinguish bad input from a genuinely violated mathematical identity.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

using BigInt = mpz_class;
using Rational = mpq_class;

Rational make_rational(const BigInt& num, const BigInt& den);
Rational make_rational(long num, long den);

/// Parses "p/q" or an integer literal. The result is canonical.
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& x);

BigInt floor_of(const Rational& x);
/// Fractional part, the representative in [0,1).
Rational frac(const Rational& x);
/// Distance to the nearest integer, in [0,1/2].
Rational circle_norm(const Rational& x);

BigInt lcm(const BigInt& a, const BigInt& b);
BigInt binomial(unsigned long n, unsigned long k);
Rational power(const Rational& base, unsigned long exp);

double to_double(const Rational& x);

// Fixed-width modular helpers for the hot enumeration loops. Moduli must be
// below 2^63.
inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}
inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  const std::uint64_t s = a + b;
  return (s >= m || s < a) ? s - m : s;
}
std::uint64_t to_u64(const BigInt& x);
bool fits_u63(const BigInt& x);

/// e(phase) with phase given exactly as a rational; the reduction mod 1 is
/// exact so only the final cos/sin is inexact.
struct UnitPhase {
  double cos_v;
  double sin_v;
};
UnitPhase unit_phase(const Rational& phase);

}  // namespace ergolab
