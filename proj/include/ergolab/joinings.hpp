#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <vector>

#include "ergolab/harmonic.hpp"
#include "ergolab/weyl.hpp"

namespace ergolab {

/// Vector of numerators mod q; the torus point is v / q.
using ModVec = std::vector<std::uint64_t>;

/// Finite subgroup of a product of tori, all coordinates sharing denominator q.
struct SubgroupModel {
  std::uint64_t q = 1;
  std::vector<std::size_t> dims;  // block sizes of the ambient product
  std::vector<ModVec> basis;      // generators
  BigInt order = 1;
  std::vector<ModVec> elements;   // sorted; empty when too large to enumerate

  std::size_t rank() const;
  bool enumerated() const { return !elements.empty(); }
  bool contains(const ModVec& v) const;
};

/// Closure of <u>. Elements are listed when q <= 10^6; otherwise only the
/// one-vector basis and the order q / gcd(q, numerators) are kept.
SubgroupModel cyclic_closure(const std::vector<Rational>& u, std::vector<std::size_t> dims = {});
/// Subgroup generated by `gens` (enumerated; at most 2 * 10^6 elements).
SubgroupModel subgroup_closure(std::uint64_t q, std::vector<std::size_t> dims, std::vector<ModVec> gens);

/// sum_j c_j m_{Gamma_j} with Gamma_j = shift_j + base.
struct AffineJoining {
  SubgroupModel base;
  std::vector<ModVec> cosets;
  std::vector<Rational> weights;

  std::uint64_t q() const { return base.q; }
  /// sum_j c_j E_{h in base} F(shift_j + h).
  Rational integrate(const std::function<Rational(const ModVec&)>& F) const;
  Complex integrate_complex(const std::function<Complex(const ModVec&)>& F) const;
};

/// Occurrence counts of a finitely supported measure.
using MeasureCounts = std::map<ModVec, std::uint64_t>;

/// Stabilizer-based decomposition: base = { h : mu(x + h) = mu(x) for all x },
/// so mu is uniform on every coset and the weights are the coset masses.
AffineJoining affine_from_measure(std::uint64_t q, std::vector<std::size_t> dims, const MeasureCounts& mu);

ModVec add_mod(const ModVec& a, const ModVec& b, std::uint64_t q);
ModVec scale_mod(const ModVec& a, std::uint64_t n, std::uint64_t q);
TorusPoint to_point(const ModVec& v, std::uint64_t q, std::size_t begin, std::size_t count);
/// Numerators of rational vectors over their common denominator.
ModVec lift(const std::vector<Rational>& u, std::uint64_t q);
std::uint64_t common_modulus(const std::vector<std::vector<Rational>>& vectors);

/// Lemma-style limit data for n c + n^2 u in (T^d)^4 x T^r.
struct JoiningExtraction {
  std::size_t d = 0, r = 0;
  std::uint64_t q = 1;           // common denominator
  std::uint64_t period = 1;      // lcm(ord c, ord u)
  ModVec c, u;
  SubgroupModel g3ap;            // <c> = {(s, t, 2s, 2t, 0)}
  AffineJoining phi;             // G3AP + closure(u), ambient cosets
  AffineJoining gamma;           // law of m^2 (w1, w2), (w1, w2) coordinates
  std::vector<Rational> orbit_weights;  // frequency of n with n c + n^2 u in each phi coset
};

/// Requires c = (c_s, c_t, 2c_s, 2c_t, 0) with ord c_s, ord c_t, ord u
/// pairwise coprime, and u = (0, w1, 0, 4 w1, w2).
JoiningExtraction extract_affine_joining(const std::vector<Rational>& c, const std::vector<Rational>& u,
                                         std::size_t d, std::size_t r);

using AmbientFunction = std::function<Rational(const ModVec&)>;
/// (1/P) sum_{n<P} F(n c + n^2 u).
Rational orbit_average(const JoiningExtraction& J, const AmbientFunction& F);
/// sum_j c_j E_{Phi_j} F.
Rational coset_average(const JoiningExtraction& J, const AmbientFunction& F);
/// sum_j c_j E_{s,t} E_{w in Lambda_j} F(s, t + w1, 2s, 2t + 4 w1, w2).
Rational gamma_form(const JoiningExtraction& J, const AmbientFunction& F);

/// Gamma-mass of V: sum_j c_j E_{Gamma_j} 1_V(w2).
Rational joining_mass(const AffineJoining& G, std::size_t d, const Cylinder& V);

/// Weight function of w2 used inside f *_Gamma g.
using JoiningWeight = std::function<Rational(const TorusPoint&)>;
JoiningWeight normalized_cylinder(const Cylinder& V, const Rational& norm);

/// (f *_Gamma g)(x, y) = sum_j c_j E_{w in Gamma_j} f(x, y + 2 w1) g(w2) on a
/// pair grid Z_q^d x Z_q^d. 2 w1 must land on the grid.
template <typename Scalar>
Grid<Scalar> star_kernel(const Grid<Scalar>& f, const JoiningWeight& g, const AffineJoining& G);

/// integral of psi(2 w1) g(w2) dm_Gamma.
Complex joining_factor(const AffineJoining& G, std::size_t d, const Character& psi, const JoiningWeight& g);

struct Annihilation {
  Cylinder cylinder;
  std::vector<std::size_t> removed;  // 0-based
  bool exact = false;                // structural zero on every coset
  double residual = 0.0;             // max_j |integral chi_j(w1) g(w2) dm_Gamma|
  std::string rule;                  // "first-index", "exhaustive" or "min-residual"
};

/// Cylinder subordinate to U with integral chi_j(w1) g(w2) dm_Gamma = 0 for
/// each j, proven coset by coset: chi_j is nontrivial on
/// H_I = { w in base : w2_i = 0 for i in I }.
Annihilation annihilate_over_joining(const ApproxHammingBall& U, const AffineJoining& G,
                                     const std::vector<Character>& chars);

struct JoiningUniformizer {
  Annihilation annihilation;
  TopK top;
  std::vector<BiCharacter> selected;
};

/// Top-k (chi, psi) with psi nontrivial, then annihilate psi^2 over Gamma.
JoiningUniformizer uniformize_over_joining(const TrigPoly& f, const ApproxHammingBall& U, const AffineJoining& G,
                                           double norm_bound = 1.0);
/// Grid version; even q is rejected since psi -> psi^2 must be injective.
/// Also checks the coefficient formula of f *_Gamma g against star_kernel.
JoiningUniformizer uniformize_over_joining(const GridFunction& f, const ApproxHammingBall& U,
                                           const AffineJoining& G, double norm_bound = 1.0);

/// Fourier table of a pair grid keyed by (chi, psi), centered representatives.
TrigPoly pair_table(const GridFunction& f);

nlohmann::json to_json(const SubgroupModel& H);
SubgroupModel subgroup_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AffineJoining& G);
AffineJoining joining_from_json(const nlohmann::json& j);

// ---- template implementation ---------------------------------------------

namespace detail {
template <typename Scalar>
Scalar from_rational(const Rational& v) {
  if constexpr (std::is_same_v<Scalar, Rational>) return v;
  else return Scalar(v.get_d());
}
/// Aggregated (y-shift index, weight) pairs for the star kernel.
std::vector<std::pair<std::vector<std::int64_t>, Rational>> star_shifts(const AffineJoining& G, std::size_t d,
                                                                        std::uint64_t grid_q, const JoiningWeight& g);
}  // namespace detail

template <typename Scalar>
Grid<Scalar> star_kernel(const Grid<Scalar>& f, const JoiningWeight& g, const AffineJoining& G) {
  if (f.dim() % 2 != 0) fail(ErrorKind::InvalidInput, "star kernel needs a pair grid");
  const std::size_t d = static_cast<std::size_t>(f.dim() / 2);
  const auto shifts = detail::star_shifts(G, d, f.modulus(), g);
  std::vector<std::pair<std::vector<std::int64_t>, Scalar>> ws;
  for (const auto& [s, w] : shifts) ws.emplace_back(s, detail::from_rational<Scalar>(w));
  Grid<Scalar> out(f.dim(), f.modulus());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto xy = f.coords(i);
    Scalar acc(0);
    for (const auto& [s, w] : ws) {
      auto p = xy;
      for (std::size_t k = 0; k < d; ++k) p[d + k] += s[k];
      acc += w * f.at(p);
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace ergolab
