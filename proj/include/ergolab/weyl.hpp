#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "ergolab/bohr.hpp"
#include "ergolab/harmonic.hpp"

namespace ergolab {

/// S(x, y) = (x + alpha, y + x) on T^d x T^d.
struct WeylSystem {
  std::size_t d = 0;
  Frequency alpha;

  WeylSystem() = default;
  explicit WeylSystem(Frequency alpha);
  bool periodic_model() const { return !alpha.generating; }
};

using PointPair = std::pair<TorusPoint, TorusPoint>;

PointPair weyl_step(const WeylSystem& W, const TorusPoint& x, const TorusPoint& y);
/// S^n(x, y) = (x + n alpha, y + n x + C(n,2) alpha), exact; n may be negative.
PointPair orbit(const WeylSystem& W, const TorusPoint& x, const TorusPoint& y, const BigInt& n);
/// chi(x + alpha) = e(n . alpha) chi(x): the phase n . alpha mod 1.
Rational eigenvalue_phase(const WeylSystem& W, const Character& chi);

/// Trigonometric polynomial f(x,y) = sum c_{a,b} e(a.x + b.y).
struct BiCharacter {
  Character chi;  // x part
  Character psi;  // y part
  auto operator<=>(const BiCharacter&) const = default;
};
using TrigPoly = std::map<BiCharacter, Complex>;

TrigPoly kronecker_projection(const TrigPoly& f);
double l2_norm_squared(const TrigPoly& f);
Complex evaluate(const TrigPoly& f, const TorusPoint& x, const TorusPoint& y);
/// Real-valued check: c_{-a,-b} = conj(c_{a,b}) within tol.
bool is_real(const TrigPoly& f, double tol = 1e-12);

nlohmann::json to_json(const TrigPoly& f);
TrigPoly trig_from_json(const nlohmann::json& j);

/// n -> integral of f * S^n f * S^{2n} f for a trig polynomial. Character
/// orthogonality collapses the integral to a finite coefficient sum; triples
/// whose frequency constraint depends on n are precomputed per n.
class TripleCorrelation {
 public:
  TripleCorrelation(const WeylSystem& W, const TrigPoly& f);
  Complex at(std::uint64_t n) const;

 private:
  struct Triple {
    Complex coeff;
    std::uint64_t lin;   // coefficient of n
    std::uint64_t b1;    // coefficient of C(n,2)
    std::uint64_t b2;    // coefficient of C(2n,2)
  };
  Complex phase_sum(const std::vector<Triple>& triples, std::uint64_t n) const;
  std::uint64_t q_;
  std::vector<Triple> steady_;
  std::map<std::uint64_t, std::vector<Triple>> sporadic_;
};

/// Closed form of L3 for generating alpha: sum_a c'(a) c'(-2a) c'(a), the
/// 3AP integral of the Kronecker projection.
Complex l3_closed_form(const TrigPoly& f);

/// g(n^2 l^2 beta) with g = 1_V / norm, evaluated on exact residues.
class CylinderWeight {
 public:
  CylinderWeight(const Cylinder& V, const Frequency& beta, std::int64_t ell, Rational norm);
  /// Whether n^2 l^2 beta lies in V.
  bool hit(std::uint64_t n) const;
  const Rational& norm() const { return norm_; }
  std::uint64_t modulus() const { return q_; }

 private:
  std::uint64_t q_;
  std::uint64_t ell2_;
  std::vector<std::size_t> idx_;
  std::vector<std::uint64_t> nums_;
  ResidueWindows windows_;
  Rational norm_;
};

struct TracePoint {
  std::int64_t N;
  double value;
};

struct AveragesTrace {
  std::vector<TracePoint> checkpoints;
  std::int64_t final_N = 0;
  nlohmann::json metadata;
  double final_value() const { return checkpoints.empty() ? 0.0 : checkpoints.back().value; }
};

/// Checkpoints 10, 100, ... below N, then N itself.
std::vector<std::int64_t> checkpoint_ladder(std::int64_t N);

/// (1/N) sum_{n=1}^{N} g(n^2 l^2 beta) * integral f S^n f S^{2n} f; a null
/// weight means g = 1.
AveragesTrace weighted_average(const WeylSystem& W, const TrigPoly& f, const CylinderWeight* weight, std::int64_t N);
AveragesTrace l3_average(const WeylSystem& W, const TrigPoly& f, std::int64_t N);

// ---- finite models ------------------------------------------------------

/// A measure-preserving permutation of a finite set with uniform measure.
class FiniteSystem {
 public:
  virtual ~FiniteSystem() = default;
  virtual std::size_t size() const = 0;
  /// T^n(state) for n >= 0.
  virtual std::size_t power(std::size_t state, std::uint64_t n) const = 0;
  /// Smallest-known P with T^P = id.
  virtual std::uint64_t period() const = 0;
};

/// x -> x + v on Z_q^d.
class RotationModel : public FiniteSystem {
 public:
  RotationModel(std::uint64_t q, std::vector<std::uint64_t> step);
  std::size_t size() const override { return size_; }
  std::size_t power(std::size_t state, std::uint64_t n) const override;
  std::uint64_t period() const override { return q_; }
  int dim() const { return static_cast<int>(step_.size()); }
  std::uint64_t modulus() const { return q_; }

 private:
  std::uint64_t q_;
  std::vector<std::uint64_t> step_;
  std::size_t size_;
};

/// The Weyl map on Z_q^d x Z_q^d for alpha = a / q; states are grid indices
/// of dimension 2d with the x block first.
class WeylGridModel : public FiniteSystem {
 public:
  explicit WeylGridModel(const WeylSystem& W);
  std::size_t size() const override { return size_; }
  std::size_t power(std::size_t state, std::uint64_t n) const override;
  std::uint64_t period() const override { return q_ % 2 == 1 ? q_ : 2 * q_; }
  std::uint64_t modulus() const { return q_; }
  std::size_t dim() const { return a_.size(); }

 private:
  std::uint64_t q_;
  std::vector<std::uint64_t> a_;
  std::size_t size_;
};

/// Exact I(n) = E_x f(x) f(T^n x) f(T^{2n} x) for n in [0, count).
std::vector<Rational> triple_integrals(const FiniteSystem& sys, const ExactGrid& f, std::uint64_t count);

/// mu(A cap T^{-n} A cap T^{-2n} A), exact.
Rational triple_intersection(const FiniteSystem& sys, const std::vector<bool>& A, std::uint64_t n);

struct TripleMax {
  std::int64_t n = 0;
  Rational value;
};
/// Max over n in S cap [0, N]; `empty-domain` when that range is empty.
TripleMax min_triple_intersection(const FiniteSystem& sys, const std::vector<bool>& A, const IntSet& S,
                                  std::int64_t N);

/// Average over x of f restricted to the y block: f'(x) = E_y f(x, y).
template <typename Scalar>
Grid<Scalar> kronecker_projection(const Grid<Scalar>& f) {
  if (f.dim() % 2 != 0) fail(ErrorKind::InvalidInput, "pair model needs an even grid dimension");
  const int d = f.dim() / 2;
  Grid<Scalar> out(d, f.modulus());
  const std::size_t block = out.size();
  for (std::size_t x = 0; x < block; ++x) {
    Scalar acc(0);
    for (std::size_t y = 0; y < block; ++y) acc += f[x * block + y];
    out[x] = acc / Scalar(static_cast<long>(block));
  }
  return out;
}

/// Hits of n^2 l^2 beta in V, bucketed by n mod `base` over one joint period.
struct WeightProfile {
  std::uint64_t base = 1;
  std::uint64_t period = 1;  // lcm(base, q_beta)
  std::vector<std::uint64_t> hits;
  std::uint64_t total = 0;
};
WeightProfile weight_profile(std::uint64_t base, const CylinderWeight& weight);

struct PeriodicAverages {
  Rational weighted;      // A over one full period
  Rational l3_period;     // same with g = 1
  Rational closed_form;   // 3AP integral of f'
  std::uint64_t period = 0;
};

/// Full-period averages on a periodic Weyl model. `norm` replaces the
/// weight's own normalization when given (e.g. the mass of V under the
/// joining, which makes g average to 1 along n^2 l^2 beta).
PeriodicAverages periodic_averages(const WeylGridModel& model, const std::vector<Rational>& integrals,
                                   const ExactGrid& f, const CylinderWeight& weight,
                                   const std::optional<Rational>& norm = std::nullopt);
PeriodicAverages periodic_averages(const WeylGridModel& model, const ExactGrid& f, const CylinderWeight& weight,
                                   const std::optional<Rational>& norm = std::nullopt);

}  // namespace ergolab
