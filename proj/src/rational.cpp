#include "ergolab/rational.hpp"

#include <cmath>
#include <numbers>

namespace ergolab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::EmptyDomain: return "empty-domain";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::UnsupportedModulus: return "unsupported-modulus";
    case ErrorKind::NotCombinable: return "not-combinable";
    case ErrorKind::Exhausted: return "exhausted";
    case ErrorKind::Refuted: return "refuted";
    case ErrorKind::Internal: return "internal-error";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) {
  throw LabError(kind, std::string(to_string(kind)) + ": " + what);
}

Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) fail(ErrorKind::InvalidInput, "zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Rational make_rational(long num, long den) {
  return make_rational(BigInt(num), BigInt(den));
}

Rational parse_rational(std::string_view text) {
  const std::string s(text);
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(s));
    return make_rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::InvalidInput, "malformed rational '" + s + "'");
  }
}

std::string format_rational(const Rational& x) {
  if (x.get_den() == 1) return x.get_num().get_str();
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

BigInt floor_of(const Rational& x) {
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return q;
}

Rational frac(const Rational& x) {
  Rational r = x - Rational(floor_of(x));
  r.canonicalize();
  return r;
}

Rational circle_norm(const Rational& x) {
  const Rational f = frac(x);
  const Rational g = 1 - f;
  return f < g ? f : g;
}

BigInt lcm(const BigInt& a, const BigInt& b) {
  BigInt out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

BigInt binomial(unsigned long n, unsigned long k) {
  BigInt out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

Rational power(const Rational& base, unsigned long exp) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exp);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exp);
  out.canonicalize();
  return out;
}

double to_double(const Rational& x) { return x.get_d(); }

std::uint64_t to_u64(const BigInt& x) {
  if (x < 0 || !fits_u63(x)) fail(ErrorKind::InvalidInput, "integer does not fit 63 bits: " + x.get_str());
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, x.get_mpz_t());
  return out;
}

bool fits_u63(const BigInt& x) { return x >= 0 && mpz_sizeinbase(x.get_mpz_t(), 2) <= 63; }

UnitPhase unit_phase(const Rational& phase) {
  const Rational f = frac(phase);
  // Quarter turns come out exact; everything else goes through libm.
  if (f == 0) return {1.0, 0.0};
  if (f == Rational(1, 2)) return {-1.0, 0.0};
  if (f == Rational(1, 4)) return {0.0, 1.0};
  if (f == Rational(3, 4)) return {0.0, -1.0};
  const double angle = 2.0 * std::numbers::pi * f.get_d();
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace ergolab
