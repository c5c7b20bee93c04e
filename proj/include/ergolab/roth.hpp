#pragma once

#include <optional>
#include <vector>

#include "ergolab/harmonic.hpp"

namespace ergolab {

/// Subgroup K of Z_q^d, kept as generators plus the enumerated element indices.
struct GridSubgroup {
  int d = 0;
  std::uint64_t q = 0;
  std::vector<std::vector<std::int64_t>> generators;
  std::vector<std::size_t> elements;  // row-major indices, sorted
};

GridSubgroup subgroup_from_generators(int d, std::uint64_t q, std::vector<std::vector<std::int64_t>> generators);
/// The coordinate subgroup whose free axes range over Z_q and others are 0.
GridSubgroup coordinate_subgroup(int d, std::uint64_t q, const std::vector<int>& free_axes);

/// True when chi_n is trivial on K, i.e. chi_n is a character of W = Z/K.
bool in_quotient_dual(const GridSubgroup& K, const std::vector<std::int64_t>& n);

/// f'(z) = mean over y in K of f(z + y).
template <typename Scalar>
Grid<Scalar> quotient_project(const Grid<Scalar>& f, const GridSubgroup& K) {
  if (f.dim() != K.d || f.modulus() != K.q) fail(ErrorKind::InvalidInput, "subgroup does not live in the grid's group");
  Grid<Scalar> out(f.dim(), f.modulus());
  std::vector<std::vector<std::int64_t>> offsets;
  for (auto e : K.elements) offsets.push_back(f.coords(e));
  const Scalar count(static_cast<long>(offsets.size()));
  for (std::size_t z = 0; z < f.size(); ++z) {
    const auto zc = f.coords(z);
    Scalar acc(0);
    for (const auto& off : offsets) {
      auto p = zc;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += off[i];
      acc += f.at(p);
    }
    out[z] = acc / count;
  }
  return out;
}

/// I = E_{z,t} f0(z) f1(z+t) f2(z+2t) by direct summation.
template <typename Scalar>
Scalar roth_form_direct(const Grid<Scalar>& f0, const Grid<Scalar>& f1, const Grid<Scalar>& f2) {
  if (!f0.same_shape(f1) || !f0.same_shape(f2)) fail(ErrorKind::InvalidInput, "forms need grids of one shape");
  const std::size_t size = f0.size();
  const int d = f0.dim();
  const auto q = static_cast<std::int64_t>(f0.modulus());
  std::vector<std::int64_t> coords(size * d);
  for (std::size_t i = 0; i < size; ++i) {
    const auto c = f0.coords(i);
    for (int j = 0; j < d; ++j) coords[i * d + j] = c[j];
  }
  Scalar total(0);
  for (std::size_t z = 0; z < size; ++z) {
    if (f0[z] == Scalar(0)) continue;
    Scalar inner(0);
    for (std::size_t t = 0; t < size; ++t) {
      std::size_t i1 = 0, i2 = 0;
      for (int j = 0; j < d; ++j) {
        const std::int64_t zc = coords[z * d + j], tc = coords[t * d + j];
        i1 = i1 * q + static_cast<std::size_t>((zc + tc) % q);
        i2 = i2 * q + static_cast<std::size_t>((zc + 2 * tc) % q);
      }
      inner += f1[i1] * f2[i2];
    }
    total += f0[z] * inner;
  }
  const Scalar n(static_cast<long>(size));
  return total / (n * n);
}

/// I = sum_tau f0^(tau) f1^(-2 tau) f2^(tau). Odd q only.
Complex roth_form_spectral(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2);

struct RothValue {
  Complex direct;
  Complex spectral;
};
/// Both paths; a disagreement beyond 1e-9 raises `refuted`.
RothValue roth_form(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2);

struct GapReport {
  Complex I;
  Complex I_W;       // all three functions projected
  Complex I_2;       // only f2 projected
  double gap = 0.0;  // |I - I_W|
  double kappa = 0.0;
  double norm0 = 0.0;
  double norm1 = 0.0;
  double bound = 0.0;  // kappa * ||f0|| * ||f1||
  std::vector<std::int64_t> kappa_at;  // character realizing kappa
  bool ok = false;
};

/// Computes the report without any modulus restriction or assertion, with
/// kappa measured as max |f2^(chi)| over chi outside W^.
GapReport quotient_gap_values(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2,
                              const GridSubgroup& K);

/// Checked version: odd q, the kappa precondition verified against the
/// measured coefficients, and gap <= bound + 1e-9 asserted.
GapReport quotient_gap_bound(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2,
                             const GridSubgroup& K, std::optional<double> kappa = std::nullopt);

}  // namespace ergolab
