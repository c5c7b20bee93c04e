#pragma once

#include <nlohmann/json.hpp>

#include <complex>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "ergolab/rational.hpp"
#include "ergolab/torus.hpp"

namespace ergolab {

using Complex = std::complex<double>;

/// chi(x) = e(n . x) on T^r (or on Z_q^d with x scaled by 1/q).
struct Character {
  std::vector<std::int64_t> n;

  Character() = default;
  explicit Character(std::vector<std::int64_t> freq) : n(std::move(freq)) {}
  std::size_t dim() const { return n.size(); }
  bool is_trivial() const;
  auto operator<=>(const Character&) const = default;
};

/// Character value at a torus point, with the phase reduced exactly.
Complex character_value(const Character& chi, const TorusPoint& s);
Rational character_phase(const Character& chi, const TorusPoint& s);

/// Function on Z_q^d stored row-major: idx = ((x0*q + x1)*q + ...).
template <typename Scalar>
class Grid {
 public:
  Grid() = default;
  Grid(int d, std::uint64_t q) : d_(d), q_(q) {
    if (d < 1 || q < 1) fail(ErrorKind::InvalidInput, "grid needs d >= 1 and q >= 1");
    std::uint64_t n = 1;
    for (int i = 0; i < d; ++i) {
      if (n > (std::uint64_t{1} << 28) / q) fail(ErrorKind::InvalidInput, "grid too large");
      n *= q;
    }
    values_.assign(n, Scalar(0));
  }

  int dim() const { return d_; }
  std::uint64_t modulus() const { return q_; }
  std::size_t size() const { return values_.size(); }

  Scalar& operator[](std::size_t i) { return values_[i]; }
  const Scalar& operator[](std::size_t i) const { return values_[i]; }
  Scalar& at(const std::vector<std::int64_t>& x) { return values_[index(x)]; }
  const Scalar& at(const std::vector<std::int64_t>& x) const { return values_[index(x)]; }

  std::vector<Scalar>& values() { return values_; }
  const std::vector<Scalar>& values() const { return values_; }

  std::size_t index(const std::vector<std::int64_t>& x) const {
    if (x.size() != static_cast<std::size_t>(d_)) fail(ErrorKind::InvalidInput, "grid coordinate dimension mismatch");
    std::size_t idx = 0;
    const auto q = static_cast<std::int64_t>(q_);
    for (auto c : x) idx = idx * q_ + static_cast<std::size_t>(((c % q) + q) % q);
    return idx;
  }

  std::vector<std::int64_t> coords(std::size_t idx) const {
    std::vector<std::int64_t> x(d_);
    for (int i = d_ - 1; i >= 0; --i) {
      x[i] = static_cast<std::int64_t>(idx % q_);
      idx /= q_;
    }
    return x;
  }

  bool same_shape(const Grid& other) const { return d_ == other.d_ && q_ == other.q_; }

 private:
  int d_ = 0;
  std::uint64_t q_ = 0;
  std::vector<Scalar> values_;
};

using GridFunction = Grid<Complex>;
using ExactGrid = Grid<Rational>;

GridFunction to_complex(const ExactGrid& f);

using CoefficientTable = std::map<Character, Complex>;

/// Centered representative of n mod q, in (-q/2, q/2].
std::int64_t centered(std::int64_t n, std::uint64_t q);

/// Coefficient grid F[n] = q^{-d} sum_x f(x) e(-n.x/q). Direct summation for
/// q^d <= 4096, FFT above.
GridFunction dft(const GridFunction& f);
GridFunction dft_direct(const GridFunction& f);
GridFunction dft_fft(const GridFunction& f);
/// f(x) = sum_n F[n] e(n.x/q).
GridFunction inverse_dft(const GridFunction& coeffs);

/// Characters indexed by centered representatives.
CoefficientTable to_table(const GridFunction& coeffs, bool drop_zeros = false);

/// q^{-d} sum_x |f(x)|^2.
double l2_norm_squared(const GridFunction& f);
/// sum_n |F[n]|^2.
double coefficient_energy(const GridFunction& coeffs);
double coefficient_energy(const CoefficientTable& table);

/// (f*g)(x) = q^{-d} sum_y f(y) g(x-y).
GridFunction convolve(const GridFunction& f, const GridFunction& g);

/// Closed-form Fourier coefficient of 1_V (normalized: divided by m(V)).
/// Coefficients that vanish by index structure are returned as exact zeros.
Complex cylinder_fourier(const Cylinder& V, bool normalized, const Character& chi);
bool cylinder_fourier_vanishes(const Cylinder& V, const Character& chi);

/// chi(s) * c; exact zero stays exact zero.
Complex translate_coefficient(Complex c, const Character& chi, const TorusPoint& s);

struct TopK {
  std::vector<Character> selected;
  /// Largest |f^| among characters not selected (0 if none).
  double residual = 0.0;
  double bound_sqrt_k = 0.0;   // normBound * k^{-1/2}
  double bound_sqrt_k1 = 0.0;  // normBound * (1+k)^{-1/2}
};

/// The k characters of largest |f^|, ties broken lexicographically. Zero
/// coefficients are never selected. An optional filter restricts the family.
TopK top_k_characters(const CoefficientTable& table, long k, double norm_bound,
                      const std::function<bool(const Character&)>& keep = {});

/// Cylinder subordinate to U whose index set omits, for every chi_j, an index
/// where chi_j has a nonzero entry.
Cylinder annihilating_cylinder(const ApproxHammingBall& U, const std::vector<Character>& chars);

struct Uniformizer {
  Cylinder cylinder;
  TopK top;
};

/// top_k over nontrivial characters (k = U.k) composed with annihilation.
Uniformizer uniformizing_cylinder(const ApproxHammingBall& U, const CoefficientTable& table,
                                  double norm_bound = 1.0);

nlohmann::json to_json(const CoefficientTable& table);
CoefficientTable table_from_json(const nlohmann::json& j);

/// Binary layout: "GRIDFN01", uint32 d, uint32 q, then q^d (re, im) f64 pairs,
/// all little-endian.
void write_grid(std::ostream& out, const GridFunction& f);
GridFunction read_grid(std::istream& in);

}  // namespace ergolab
