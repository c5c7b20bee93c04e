#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "ergolab/rational.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

/// beta in T^r together with its common denominator. Irrational frequencies
/// are represented by rational approximations; `generating` records intent only.
struct Frequency {
  TorusPoint beta;
  BigInt q = 1;
  bool generating = false;
  std::string label;

  Frequency() = default;
  explicit Frequency(TorusPoint beta, bool generating = false, std::string label = {});
  std::size_t dim() const { return beta.dim(); }
  /// beta_i * q, each in [0, q).
  std::vector<BigInt> numerators() const;
};

// Continued-fraction convergents, exact.
std::vector<Rational> sqrt_convergents(unsigned long D, std::size_t count);
std::vector<Rational> golden_convergents(std::size_t count);
/// Last convergent of the named number ("sqrt2", "sqrt3", "sqrt5", "golden", ...)
/// with denominator <= max_den.
Rational convergent_below(const std::string& name, const BigInt& max_den);
/// floor(q * theta) / q computed with integer square roots.
Rational lattice_approximation(const std::string& name, const BigInt& q);

/// Each coordinate is its own convergent; q is the lcm of the denominators.
Frequency convergent_frequency(const std::vector<std::string>& names, const BigInt& max_den);
/// All coordinates share the denominator q.
Frequency lattice_frequency(const std::vector<std::string>& names, const BigInt& q);
/// Comma-separated list of "p/q" literals and/or names; names use max_den.
Frequency parse_frequency(const std::string& text, const BigInt& max_den, bool generating);

/// Residues a mod q with ||a/q - c_i|| < width, per coordinate. The open
/// interval (q(c-w), q(c+w)) is turned into an exact integer window once.
class ResidueWindows {
 public:
  ResidueWindows() = default;
  ResidueWindows(const TorusPoint& center, const Rational& width, std::uint64_t q);
  bool inside(std::size_t i, std::uint64_t a) const {
    const std::uint64_t t = a >= lo_[i] ? a - lo_[i] : a + (q_ - lo_[i]);
    return t < len_[i];
  }
  std::size_t dim() const { return lo_.size(); }
  std::uint64_t modulus() const { return q_; }

 private:
  std::uint64_t q_ = 1;
  std::vector<std::uint64_t> lo_;
  std::vector<std::uint64_t> len_;
};

/// BH(beta, y; k, eps) = { n : n beta in U }.
struct BohrHammingBall {
  Frequency freq;
  ApproxHammingBall ball;

  BohrHammingBall() = default;
  BohrHammingBall(Frequency freq, ApproxHammingBall ball);
  bool proper() const { return freq.generating; }
};

/// Fast membership over residues n mod q; needs q < 2^63.
class BohrEvaluator {
 public:
  explicit BohrEvaluator(const BohrHammingBall& bh);
  bool contains_residue(std::uint64_t n_mod_q) const;
  std::uint64_t modulus() const { return q_; }

 private:
  std::uint64_t q_;
  std::size_t k_;
  std::vector<std::uint64_t> nums_;
  ResidueWindows windows_;
};

bool bh_contains(const BohrHammingBall& bh, const BigInt& n);
/// Reference path: builds n*beta as a TorusPoint and calls ball_contains.
bool bh_contains_exact(const BohrHammingBall& bh, const BigInt& n);

using IntSet = std::vector<std::int64_t>;  // sorted, unique

struct SqrtSet {
  IntSet elems;
  std::int64_t N = 0;
  double density = 0.0;
};

/// { n in [1,N] : n^2 in BH }.
SqrtSet sqrt_set_enumerate(const BohrHammingBall& bh, std::int64_t N);
/// { n in [1,N] : n in BH }.
IntSet bh_enumerate(const BohrHammingBall& bh, std::int64_t N);

IntSet normalize_set(IntSet s);
IntSet dilate(const IntSet& s, std::int64_t m);
/// { n : m n in S }.
IntSet divide(const IntSet& s, std::int64_t m);
/// S^{^2} = { s^2 : s in S }.
IntSet squares(const IntSet& s);
IntSet set_union(const IntSet& a, const IntSet& b);

struct DensityReport {
  double density = 0.0;
  Rational measure;
  double gap = 0.0;
};

/// Empirical density of sqrt(BH) in [1,N] against m(U). Diagnostic only;
/// requires a proper ball, N >= 1000 and N <= q/100.
DensityReport density_vs_measure(const BohrHammingBall& bh, std::int64_t N);

/// {N, elems: [[start, length], ...]} with maximal runs.
nlohmann::json set_to_json(const IntSet& s, std::int64_t N);
IntSet set_from_json(const nlohmann::json& j);

}  // namespace ergolab
