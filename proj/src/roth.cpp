#include "ergolab/roth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ergolab {

GridSubgroup subgroup_from_generators(int d, std::uint64_t q, std::vector<std::vector<std::int64_t>> generators) {
  GridSubgroup K;
  K.d = d;
  K.q = q;
  K.generators = std::move(generators);
  const Grid<char> shape(d, q);
  std::set<std::size_t> seen{0};
  std::vector<std::size_t> frontier{0};
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (auto e : frontier) {
      const auto c = shape.coords(e);
      for (const auto& g : K.generators) {
        if (g.size() != static_cast<std::size_t>(d)) fail(ErrorKind::InvalidInput, "generator dimension mismatch");
        auto p = c;
        for (int i = 0; i < d; ++i) p[i] += g[i];
        const auto idx = shape.index(p);
        if (seen.insert(idx).second) next.push_back(idx);
      }
    }
    frontier = std::move(next);
  }
  K.elements.assign(seen.begin(), seen.end());
  return K;
}

GridSubgroup coordinate_subgroup(int d, std::uint64_t q, const std::vector<int>& free_axes) {
  std::vector<std::vector<std::int64_t>> gens;
  for (int axis : free_axes) {
    if (axis < 0 || axis >= d) fail(ErrorKind::InvalidInput, "axis out of range");
    std::vector<std::int64_t> g(d, 0);
    g[axis] = 1;
    gens.push_back(g);
  }
  return subgroup_from_generators(d, q, std::move(gens));
}

bool in_quotient_dual(const GridSubgroup& K, const std::vector<std::int64_t>& n) {
  const auto q = static_cast<std::int64_t>(K.q);
  for (const auto& g : K.generators) {
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < g.size(); ++i) dot = (dot + (n[i] % q) * (g[i] % q)) % q;
    if (dot != 0) return false;
  }
  return true;
}

Complex roth_form_spectral(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2) {
  if (!f0.same_shape(f1) || !f0.same_shape(f2)) fail(ErrorKind::InvalidInput, "forms need grids of one shape");
  if (f0.modulus() % 2 == 0)
    fail(ErrorKind::UnsupportedModulus, "spectral path needs odd q so that tau -> tau^2 is injective (q = " +
                                            std::to_string(f0.modulus()) + ")");
  const auto F0 = dft(f0), F1 = dft(f1), F2 = dft(f2);
  Complex total = 0.0;
  for (std::size_t t = 0; t < F0.size(); ++t) {
    auto minus2 = F0.coords(t);
    for (auto& v : minus2) v *= -2;
    total += F0[t] * F1.at(minus2) * F2[t];
  }
  return total;
}

RothValue roth_form(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2) {
  RothValue out;
  out.direct = roth_form_direct(f0, f1, f2);
  out.spectral = roth_form_spectral(f0, f1, f2);
  if (std::abs(out.direct - out.spectral) > 1e-9) {
    std::ostringstream msg;
    msg << "direct " << out.direct << " and spectral " << out.spectral << " disagree";
    fail(ErrorKind::Refuted, msg.str());
  }
  return out;
}

GapReport quotient_gap_values(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2,
                              const GridSubgroup& K) {
  GapReport r;
  const auto p0 = quotient_project(f0, K), p1 = quotient_project(f1, K), p2 = quotient_project(f2, K);
  r.I = roth_form_direct(f0, f1, f2);
  r.I_W = roth_form_direct(p0, p1, p2);
  r.I_2 = roth_form_direct(f0, f1, p2);
  r.gap = std::abs(r.I - r.I_W);
  const auto F2 = dft(f2);
  for (std::size_t i = 0; i < F2.size(); ++i) {
    const auto n = F2.coords(i);
    if (in_quotient_dual(K, n)) continue;
    if (std::abs(F2[i]) > r.kappa) {
      r.kappa = std::abs(F2[i]);
      r.kappa_at = n;
    }
  }
  r.norm0 = std::sqrt(l2_norm_squared(f0));
  r.norm1 = std::sqrt(l2_norm_squared(f1));
  r.bound = r.kappa * r.norm0 * r.norm1;
  r.ok = r.gap <= r.bound + 1e-9;
  return r;
}

GapReport quotient_gap_bound(const GridFunction& f0, const GridFunction& f1, const GridFunction& f2,
                             const GridSubgroup& K, std::optional<double> kappa) {
  if (f0.modulus() % 2 == 0)
    fail(ErrorKind::UnsupportedModulus, "gap bound needs odd q (q = " + std::to_string(f0.modulus()) + ")");
  auto r = quotient_gap_values(f0, f1, f2, K);
  if (kappa) {
    if (r.kappa > *kappa + 1e-12) {
      std::ostringstream msg;
      msg << "|f2^(chi)| = " << r.kappa << " exceeds kappa = " << *kappa << " at chi = (";
      for (std::size_t i = 0; i < r.kappa_at.size(); ++i) msg << (i ? "," : "") << centered(r.kappa_at[i], K.q);
      msg << ")";
      fail(ErrorKind::InvalidInput, msg.str());
    }
    r.kappa = *kappa;
    r.bound = r.kappa * r.norm0 * r.norm1;
    r.ok = r.gap <= r.bound + 1e-9;
  }
  if (std::abs(r.I_2 - r.I_W) > 1e-9) fail(ErrorKind::Refuted, "I_W differs between the two projection routes");
  if (!r.ok) {
    std::ostringstream msg;
    msg << "gap " << r.gap << " exceeds bound " << r.bound;
    fail(ErrorKind::Refuted, msg.str());
  }
  return r;
}

}  // namespace ergolab
