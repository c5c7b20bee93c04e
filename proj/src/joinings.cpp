#include "ergolab/joinings.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace ergolab {

namespace {

struct ModVecHash {
  std::size_t operator()(const ModVec& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto x : v) h = (h ^ x) * 1099511628211ULL;
    return h;
  }
};
using ModVecSet = std::unordered_set<ModVec, ModVecHash>;

constexpr std::size_t kEnumerationLimit = 2'000'000;

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

std::uint64_t order_of(const ModVec& v, std::uint64_t q) {
  std::uint64_t g = q;
  for (auto x : v) g = gcd_u64(g, x);
  return q / g;
}

std::size_t total_dim(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{0});
}

ModVec block(const ModVec& v, std::size_t begin, std::size_t count) {
  return ModVec(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(begin + count));
}

}  // namespace

ModVec add_mod(const ModVec& a, const ModVec& b, std::uint64_t q) {
  ModVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = addmod(a[i], b[i], q);
  return out;
}

ModVec scale_mod(const ModVec& a, std::uint64_t n, std::uint64_t q) {
  ModVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = mulmod(n % q, a[i], q);
  return out;
}

TorusPoint to_point(const ModVec& v, std::uint64_t q, std::size_t begin, std::size_t count) {
  std::vector<Rational> coords;
  for (std::size_t i = begin; i < begin + count; ++i)
    coords.push_back(make_rational(BigInt(static_cast<unsigned long>(v[i])), BigInt(static_cast<unsigned long>(q))));
  return TorusPoint(std::move(coords));
}

std::uint64_t common_modulus(const std::vector<std::vector<Rational>>& vectors) {
  BigInt q = 1;
  for (const auto& v : vectors)
    for (const auto& c : v) q = lcm(q, c.get_den());
  if (q > BigInt(1UL << 40)) fail(ErrorKind::UnsupportedModulus, "common denominator " + q.get_str() + " too large");
  return to_u64(q);
}

ModVec lift(const std::vector<Rational>& u, std::uint64_t q) {
  ModVec out;
  const BigInt Q(static_cast<unsigned long>(q));
  for (const auto& c : u) {
    const Rational scaled = frac(c) * Q;
    if (scaled.get_den() != 1) fail(ErrorKind::InvalidInput, "denominator does not divide the modulus");
    out.push_back(to_u64(scaled.get_num()));
  }
  return out;
}

std::size_t SubgroupModel::rank() const { return total_dim(dims); }

bool SubgroupModel::contains(const ModVec& v) const {
  if (enumerated()) return std::binary_search(elements.begin(), elements.end(), v);
  // cyclic fallback: v = n * basis[0] for some n, decided coordinatewise
  if (basis.size() != 1) fail(ErrorKind::Internal, "membership on a non-enumerated group needs a cyclic basis");
  const std::uint64_t ord = to_u64(order);
  for (std::uint64_t n = 0; n < ord; ++n)
    if (scale_mod(basis[0], n, q) == v) return true;
  return false;
}

SubgroupModel subgroup_closure(std::uint64_t q, std::vector<std::size_t> dims, std::vector<ModVec> gens) {
  SubgroupModel H;
  H.q = q;
  H.dims = std::move(dims);
  const std::size_t m = H.rank();
  for (auto& g : gens) {
    if (g.size() != m) fail(ErrorKind::InvalidInput, "generator rank mismatch");
    for (auto& x : g) x %= q;
  }
  H.basis = std::move(gens);
  ModVecSet seen{ModVec(m, 0)};
  std::vector<ModVec> frontier{ModVec(m, 0)};
  while (!frontier.empty()) {
    std::vector<ModVec> next;
    for (const auto& e : frontier)
      for (const auto& g : H.basis) {
        auto v = add_mod(e, g, q);
        if (seen.insert(v).second) {
          if (seen.size() > kEnumerationLimit) fail(ErrorKind::InvalidInput, "subgroup too large to enumerate");
          next.push_back(std::move(v));
        }
      }
    frontier = std::move(next);
  }
  H.elements.assign(seen.begin(), seen.end());
  std::sort(H.elements.begin(), H.elements.end());
  H.order = static_cast<unsigned long>(H.elements.size());
  return H;
}

SubgroupModel cyclic_closure(const std::vector<Rational>& u, std::vector<std::size_t> dims) {
  if (u.empty()) fail(ErrorKind::InvalidInput, "cyclic closure needs a non-empty vector");
  if (dims.empty()) dims = {u.size()};
  if (total_dim(dims) != u.size()) fail(ErrorKind::InvalidInput, "dims do not add up to the vector length");
  const std::uint64_t q = common_modulus({u});
  const ModVec v = lift(u, q);
  SubgroupModel H;
  H.q = q;
  H.dims = std::move(dims);
  H.basis = {v};
  const std::uint64_t ord = order_of(v, q);
  H.order = static_cast<unsigned long>(ord);
  if (q <= 1'000'000) {
    for (std::uint64_t n = 0; n < ord; ++n) H.elements.push_back(scale_mod(v, n, q));
    std::sort(H.elements.begin(), H.elements.end());
  }
  return H;
}

Rational AffineJoining::integrate(const std::function<Rational(const ModVec&)>& F) const {
  Rational total = 0;
  const Rational size(static_cast<unsigned long>(base.elements.size()));
  for (std::size_t j = 0; j < cosets.size(); ++j) {
    Rational acc = 0;
    for (const auto& h : base.elements) acc += F(add_mod(cosets[j], h, q()));
    total += weights[j] * acc / size;
  }
  return total;
}

Complex AffineJoining::integrate_complex(const std::function<Complex(const ModVec&)>& F) const {
  Complex total = 0.0;
  const double size = static_cast<double>(base.elements.size());
  for (std::size_t j = 0; j < cosets.size(); ++j) {
    Complex acc = 0.0;
    for (const auto& h : base.elements) acc += F(add_mod(cosets[j], h, q()));
    total += weights[j].get_d() * acc / size;
  }
  return total;
}

AffineJoining affine_from_measure(std::uint64_t q, std::vector<std::size_t> dims, const MeasureCounts& mu) {
  if (mu.empty()) fail(ErrorKind::EmptyDomain, "measure has empty support");
  std::unordered_map<ModVec, std::uint64_t, ModVecHash> mass(mu.begin(), mu.end());
  std::uint64_t total = 0;
  std::map<std::uint64_t, std::vector<const ModVec*>> by_count;
  for (const auto& [x, c] : mu) {
    if (c == 0) fail(ErrorKind::InvalidInput, "measure counts must be positive");
    total += c;
    by_count[c].push_back(&x);
  }
  // anchor on the rarest mass value: stabilizer elements map it into its own class
  const auto& rare = std::min_element(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
                       return a.second.size() < b.second.size();
                     })->second;
  const ModVec& x0 = *rare.front();
  std::vector<ModVec> stab;
  for (const ModVec* x : rare) {
    ModVec h(x0.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = (x->at(i) + q - x0[i]) % q;
    bool ok = true;
    for (const auto& [y, c] : mu) {
      const auto it = mass.find(add_mod(y, h, q));
      if (it == mass.end() || it->second != c) {
        ok = false;
        break;
      }
    }
    if (ok) stab.push_back(std::move(h));
  }
  std::sort(stab.begin(), stab.end());

  AffineJoining G;
  G.base.q = q;
  G.base.dims = std::move(dims);
  G.base.elements = stab;
  G.base.order = static_cast<unsigned long>(stab.size());
  // greedy generating set
  ModVecSet span{ModVec(x0.size(), 0)};
  for (const auto& h : stab) {
    if (span.count(h)) continue;
    G.base.basis.push_back(h);
    std::vector<ModVec> grow(span.begin(), span.end());
    for (std::size_t i = 0; i < grow.size(); ++i) {
      auto v = add_mod(grow[i], h, q);
      if (span.insert(v).second) grow.push_back(std::move(v));
    }
  }

  ModVecSet assigned;
  for (const auto& [x, c] : mu) {
    if (assigned.count(x)) continue;
    ModVec rep = x;
    for (const auto& h : stab) {
      auto v = add_mod(x, h, q);
      rep = std::min(rep, v);
      assigned.insert(std::move(v));
    }
    G.cosets.push_back(rep);
    G.weights.push_back(make_rational(BigInt(static_cast<unsigned long>(c)) * static_cast<unsigned long>(stab.size()),
                                      BigInt(static_cast<unsigned long>(total))));
  }
  Rational sum = 0;
  for (const auto& w : G.weights) sum += w;
  if (sum != 1) fail(ErrorKind::Internal, "coset weights do not sum to 1");
  return G;
}

JoiningExtraction extract_affine_joining(const std::vector<Rational>& c, const std::vector<Rational>& u,
                                         std::size_t d, std::size_t r) {
  const std::size_t m = 4 * d + r;
  if (d == 0 || c.size() != m || u.size() != m)
    fail(ErrorKind::InvalidInput, "c and u must have length 4d + r");
  JoiningExtraction J;
  J.d = d;
  J.r = r;
  J.q = common_modulus({c, u});
  const std::uint64_t q = J.q;
  J.c = lift(c, q);
  J.u = lift(u, q);

  const ModVec cs = block(J.c, 0, d), ct = block(J.c, d, d);
  if (block(J.c, 2 * d, d) != scale_mod(cs, 2, q) || block(J.c, 3 * d, d) != scale_mod(ct, 2, q) ||
      block(J.c, 4 * d, r) != ModVec(r, 0))
    fail(ErrorKind::DegenerateInput, "c is not of the form (s, t, 2s, 2t, 0)");
  const ModVec w1 = block(J.u, d, d), w2 = block(J.u, 4 * d, r);
  if (block(J.u, 0, d) != ModVec(d, 0) || block(J.u, 2 * d, d) != ModVec(d, 0) ||
      block(J.u, 3 * d, d) != scale_mod(w1, 4, q))
    fail(ErrorKind::DegenerateInput, "u is not of the form (0, w1, 0, 4 w1, w2)");

  const std::uint64_t os = order_of(cs, q), ot = order_of(ct, q), ou = order_of(J.u, q);
  if (gcd_u64(os, ot) != 1)
    fail(ErrorKind::DegenerateInput, "c does not generate the finite 3AP group: ord(s) = " + std::to_string(os) +
                                         " and ord(t) = " + std::to_string(ot) + " share a factor");
  if (gcd_u64(os * ot, ou) != 1)
    fail(ErrorKind::DegenerateInput, "ord(c) = " + std::to_string(os * ot) + " and ord(u) = " + std::to_string(ou) +
                                         " share a factor, so the orbit does not split");
  J.period = os * ot * ou;
  if (J.period > 20'000'000) fail(ErrorKind::InvalidInput, "period too long for exact extraction");

  const std::vector<std::size_t> ambient{d, d, d, d, r};
  J.g3ap = subgroup_closure(q, ambient, {J.c});

  MeasureCounts law;
  for (std::uint64_t n = 0; n < ou; ++n) {
    const std::uint64_t n2 = mulmod(n, n, q);
    ModVec w = scale_mod(w1, n2, q);
    const ModVec b = scale_mod(w2, n2, q);
    w.insert(w.end(), b.begin(), b.end());
    ++law[w];
  }
  J.gamma = affine_from_measure(q, {d, r}, law);

  auto embed = [&](const ModVec& w) {
    ModVec v(m, 0);
    for (std::size_t i = 0; i < d; ++i) {
      v[d + i] = w[i];
      v[3 * d + i] = mulmod(4, w[i], q);
    }
    for (std::size_t i = 0; i < r; ++i) v[4 * d + i] = w[d + i];
    return v;
  };
  std::vector<ModVec> gens = J.g3ap.basis;
  for (const auto& b : J.gamma.base.basis) gens.push_back(embed(b));
  J.phi.base = subgroup_closure(q, ambient, gens);
  const ModVecSet phi0(J.phi.base.elements.begin(), J.phi.base.elements.end());

  std::map<ModVec, Rational> merged;
  for (std::size_t j = 0; j < J.gamma.cosets.size(); ++j) {
    const ModVec shift = embed(J.gamma.cosets[j]);
    ModVec rep = shift;
    for (const auto& h : J.phi.base.elements) rep = std::min(rep, add_mod(shift, h, q));
    merged[rep] += J.gamma.weights[j];
  }
  for (const auto& [rep, w] : merged) {
    J.phi.cosets.push_back(rep);
    J.phi.weights.push_back(w);
  }

  // independent weights: frequency of n c + n^2 u in each coset over one period
  std::vector<std::uint64_t> hits(J.phi.cosets.size(), 0);
  for (std::uint64_t n = 0; n < J.period; ++n) {
    const ModVec v = add_mod(scale_mod(J.c, n, q), scale_mod(J.u, mulmod(n % q, n % q, q), q), q);
    bool found = false;
    for (std::size_t j = 0; j < J.phi.cosets.size() && !found; ++j) {
      ModVec diff(m);
      for (std::size_t i = 0; i < m; ++i) diff[i] = (v[i] + q - J.phi.cosets[j][i]) % q;
      if (phi0.count(diff)) {
        ++hits[j];
        found = true;
      }
    }
    if (!found) fail(ErrorKind::Internal, "orbit point outside every coset");
  }
  for (std::size_t j = 0; j < hits.size(); ++j) {
    J.orbit_weights.push_back(make_rational(BigInt(static_cast<unsigned long>(hits[j])),
                                            BigInt(static_cast<unsigned long>(J.period))));
    if (J.orbit_weights.back() != J.phi.weights[j])
      fail(ErrorKind::Internal, "orbit frequencies disagree with the coset masses");
  }
  return J;
}

Rational orbit_average(const JoiningExtraction& J, const AmbientFunction& F) {
  Rational total = 0;
  for (std::uint64_t n = 0; n < J.period; ++n)
    total += F(add_mod(scale_mod(J.c, n, J.q), scale_mod(J.u, mulmod(n % J.q, n % J.q, J.q), J.q), J.q));
  return total / Rational(static_cast<unsigned long>(J.period));
}

Rational coset_average(const JoiningExtraction& J, const AmbientFunction& F) { return J.phi.integrate(F); }

Rational gamma_form(const JoiningExtraction& J, const AmbientFunction& F) {
  const std::size_t d = J.d, r = J.r, m = 4 * d + r;
  const std::uint64_t q = J.q;
  Rational total = 0;
  const Rational inner_size(static_cast<unsigned long>(J.g3ap.elements.size() * J.gamma.base.elements.size()));
  for (std::size_t j = 0; j < J.gamma.cosets.size(); ++j) {
    Rational acc = 0;
    for (const auto& h : J.gamma.base.elements) {
      const ModVec w = add_mod(J.gamma.cosets[j], h, q);
      for (const auto& e : J.g3ap.elements) {
        // e = (s, t, 2s, 2t, 0); move to (s, t + w1, 2s, 2t + 4 w1, w2)
        ModVec v = e;
        for (std::size_t i = 0; i < d; ++i) {
          v[d + i] = addmod(v[d + i], w[i], q);
          v[3 * d + i] = addmod(v[3 * d + i], mulmod(4, w[i], q), q);
        }
        for (std::size_t i = 0; i < r; ++i) v[4 * d + i] = addmod(v[4 * d + i], w[d + i], q);
        (void)m;
        acc += F(v);
      }
    }
    total += J.gamma.weights[j] * acc / inner_size;
  }
  return total;
}

Rational joining_mass(const AffineJoining& G, std::size_t d, const Cylinder& V) {
  const std::size_t r = G.base.rank() - d;
  if (V.r != r) fail(ErrorKind::InvalidInput, "cylinder dimension does not match the joining");
  return G.integrate([&](const ModVec& w) { return Rational(cylinder_contains(V, to_point(w, G.q(), d, r)) ? 1 : 0); });
}

JoiningWeight normalized_cylinder(const Cylinder& V, const Rational& norm) {
  if (norm <= 0) fail(ErrorKind::DegenerateInput, "cylinder has zero mass; cannot normalize");
  return [V, norm](const TorusPoint& w2) { return cylinder_contains(V, w2) ? Rational(1) / norm : Rational(0); };
}

namespace detail {

std::vector<std::pair<std::vector<std::int64_t>, Rational>> star_shifts(const AffineJoining& G, std::size_t d,
                                                                        std::uint64_t grid_q, const JoiningWeight& g) {
  const std::uint64_t Q = G.q();
  const std::size_t r = G.base.rank() - d;
  std::map<std::vector<std::int64_t>, Rational> acc;
  const Rational size(static_cast<unsigned long>(G.base.elements.size()));
  for (std::size_t j = 0; j < G.cosets.size(); ++j)
    for (const auto& h : G.base.elements) {
      const ModVec w = add_mod(G.cosets[j], h, Q);
      std::vector<std::int64_t> shift(d);
      for (std::size_t i = 0; i < d; ++i) {
        const unsigned __int128 num = static_cast<unsigned __int128>(2 * w[i]) * grid_q;
        if (num % Q != 0) fail(ErrorKind::InvalidInput, "2 w1 does not land on the grid");
        shift[i] = static_cast<std::int64_t>((num / Q) % grid_q);
      }
      const Rational gw = g(to_point(w, Q, d, r));
      if (gw == 0) continue;
      acc[shift] += G.weights[j] * gw / size;
    }
  return {acc.begin(), acc.end()};
}

}  // namespace detail

Complex joining_factor(const AffineJoining& G, std::size_t d, const Character& psi, const JoiningWeight& g) {
  const std::uint64_t Q = G.q();
  const std::size_t r = G.base.rank() - d;
  if (psi.dim() != d) fail(ErrorKind::InvalidInput, "character dimension does not match w1");
  return G.integrate_complex([&](const ModVec& w) {
    const Rational gw = g(to_point(w, Q, d, r));
    if (gw == 0) return Complex(0.0);
    Rational phase = 0;
    for (std::size_t i = 0; i < d; ++i)
      phase += Rational(2 * psi.n[i]) * make_rational(BigInt(static_cast<unsigned long>(w[i])), BigInt(static_cast<unsigned long>(Q)));
    const auto u = unit_phase(phase);
    return Complex(u.cos_v, u.sin_v) * gw.get_d();
  });
}

namespace {

// chi nontrivial on H_I = { w in base : w2_i = 0 for i in kept }
bool nontrivial_on(const AffineJoining& G, std::size_t d, const Character& chi, const std::vector<bool>& kept) {
  const std::uint64_t Q = G.q();
  for (const auto& h : G.base.elements) {
    bool in_h = true;
    for (std::size_t i = 0; i < kept.size() && in_h; ++i) in_h = !kept[i] || h[d + i] == 0;
    if (!in_h) continue;
    unsigned __int128 dot = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const std::uint64_t n = static_cast<std::uint64_t>(((chi.n[i] % static_cast<std::int64_t>(Q)) + static_cast<std::int64_t>(Q)) %
                                                         static_cast<std::int64_t>(Q));
      dot += static_cast<unsigned __int128>(n) * h[i];
    }
    if (dot % Q != 0) return true;
  }
  return false;
}

std::vector<bool> kept_from_removed(std::size_t r, const std::vector<std::size_t>& removed) {
  std::vector<bool> kept(r, true);
  for (auto i : removed) kept[i] = false;
  return kept;
}

Cylinder cylinder_from_kept(const ApproxHammingBall& U, const std::vector<bool>& kept) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (kept[i]) idx.push_back(i);
  return Cylinder(std::move(idx), U.center, U.eps);
}

double max_residual(const AffineJoining& G, std::size_t d, const std::vector<Character>& chars, const Cylinder& V) {
  const auto g = normalized_cylinder(V, cylinder_measure(V));
  double worst = 0.0;
  for (const auto& chi : chars) {
    const std::uint64_t Q = G.q();
    const std::size_t r = V.r;
    const Complex v = G.integrate_complex([&](const ModVec& w) {
      const Rational gw = g(to_point(w, Q, d, r));
      if (gw == 0) return Complex(0.0);
      Rational phase = 0;
      for (std::size_t i = 0; i < d; ++i)
        phase += Rational(chi.n[i]) * make_rational(BigInt(static_cast<unsigned long>(w[i])), BigInt(static_cast<unsigned long>(Q)));
      const auto u = unit_phase(phase);
      return Complex(u.cos_v, u.sin_v) * gw.get_d();
    });
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

// all size-k subsets of {0..r-1} in lexicographic order
template <typename Visit>
bool for_each_subset(std::size_t r, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    if (visit(pick)) return true;
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == r - k + (i - 1)) --i;
    if (i == 0) return false;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

}  // namespace

Annihilation annihilate_over_joining(const ApproxHammingBall& U, const AffineJoining& G,
                                     const std::vector<Character>& chars) {
  const std::size_t rank = G.base.rank();
  if (rank <= U.r) fail(ErrorKind::InvalidInput, "joining has no w1 block");
  const std::size_t d = rank - U.r;
  for (const auto& chi : chars) {
    if (chi.dim() != d) fail(ErrorKind::InvalidInput, "character dimension does not match w1");
    if (chi.is_trivial()) fail(ErrorKind::InvalidInput, "trivial character cannot be annihilated");
  }
  const std::size_t r = U.r, k = U.k;
  auto all_nontrivial = [&](const std::vector<bool>& kept) {
    return std::all_of(chars.begin(), chars.end(), [&](const Character& chi) { return nontrivial_on(G, d, chi, kept); });
  };

  Annihilation out;
  // first-index rule: smallest l_j with chi_j nontrivial on H_{all minus l_j}
  std::vector<bool> removed(r, false);
  bool rule_ok = true;
  for (const auto& chi : chars) {
    bool found = false;
    for (std::size_t l = 0; l < r && !found; ++l) {
      std::vector<bool> kept(r, true);
      kept[l] = false;
      if (nontrivial_on(G, d, chi, kept)) {
        removed[l] = true;
        found = true;
      }
    }
    rule_ok = rule_ok && found;
  }
  std::size_t count = static_cast<std::size_t>(std::count(removed.begin(), removed.end(), true));
  if (rule_ok && count <= k) {
    for (std::size_t i = r; i-- > 0 && count < k;)
      if (!removed[i]) {
        removed[i] = true;
        ++count;
      }
    std::vector<bool> kept(r);
    for (std::size_t i = 0; i < r; ++i) kept[i] = !removed[i];
    if (all_nontrivial(kept)) {
      out.cylinder = cylinder_from_kept(U, kept);
      out.exact = true;
      out.rule = "first-index";
    }
  }
  if (!out.exact) {
    for_each_subset(r, k, [&](const std::vector<std::size_t>& pick) {
      const auto kept = kept_from_removed(r, pick);
      if (!all_nontrivial(kept)) return false;
      out.cylinder = cylinder_from_kept(U, kept);
      out.exact = true;
      out.rule = "exhaustive";
      return true;
    });
  }
  if (!out.exact) {
    double best = -1.0;
    for_each_subset(r, k, [&](const std::vector<std::size_t>& pick) {
      const auto V = cylinder_from_kept(U, kept_from_removed(r, pick));
      const double res = max_residual(G, d, chars, V);
      if (best < 0 || res < best - 1e-15) {
        best = res;
        out.cylinder = V;
      }
      return false;
    });
    out.rule = "min-residual";
  }
  for (std::size_t i = 0; i < r; ++i)
    if (!std::binary_search(out.cylinder.indices.begin(), out.cylinder.indices.end(), i)) out.removed.push_back(i);
  out.residual = out.exact ? 0.0 : max_residual(G, d, chars, out.cylinder);
  return out;
}

namespace {

Character concat(const BiCharacter& b) {
  Character c = b.chi;
  c.n.insert(c.n.end(), b.psi.n.begin(), b.psi.n.end());
  return c;
}

JoiningUniformizer uniformize_table(const TrigPoly& f, const ApproxHammingBall& U, const AffineJoining& G,
                                    double norm_bound) {
  JoiningUniformizer out;
  std::size_t d = 0;
  CoefficientTable flat;
  std::map<Character, BiCharacter> back;
  for (const auto& [key, c] : f) {
    d = key.psi.dim();
    const auto flat_key = concat(key);
    flat[flat_key] = c;
    back[flat_key] = key;
  }
  std::vector<Character> targets;
  if (U.k > 0 && !flat.empty()) {
    out.top = top_k_characters(flat, static_cast<long>(U.k), norm_bound, [d](const Character& c) {
      return std::any_of(c.n.end() - static_cast<std::ptrdiff_t>(d), c.n.end(), [](std::int64_t v) { return v != 0; });
    });
    for (const auto& c : out.top.selected) {
      const BiCharacter& key = back.at(c);
      out.selected.push_back(key);
      Character sq = key.psi;
      for (auto& v : sq.n) v *= 2;
      targets.push_back(sq);
    }
  }
  out.annihilation = annihilate_over_joining(U, G, targets);
  return out;
}

}  // namespace

TrigPoly pair_table(const GridFunction& f) {
  if (f.dim() % 2 != 0) fail(ErrorKind::InvalidInput, "pair grid needs an even dimension");
  const std::size_t d = static_cast<std::size_t>(f.dim() / 2);
  const auto F = dft(f);
  TrigPoly out;
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (F[i] == Complex(0.0)) continue;
    auto n = F.coords(i);
    for (auto& v : n) v = centered(v, F.modulus());
    BiCharacter key{Character({n.begin(), n.begin() + static_cast<std::ptrdiff_t>(d)}),
                    Character({n.begin() + static_cast<std::ptrdiff_t>(d), n.end()})};
    out.emplace(std::move(key), F[i]);
  }
  return out;
}

JoiningUniformizer uniformize_over_joining(const TrigPoly& f, const ApproxHammingBall& U, const AffineJoining& G,
                                           double norm_bound) {
  return uniformize_table(f, U, G, norm_bound);
}

JoiningUniformizer uniformize_over_joining(const GridFunction& f, const ApproxHammingBall& U, const AffineJoining& G,
                                           double norm_bound) {
  if (f.modulus() % 2 == 0)
    fail(ErrorKind::UnsupportedModulus, "psi -> psi^2 is not injective for even q = " + std::to_string(f.modulus()));
  auto out = uniformize_table(pair_table(f), U, G, norm_bound);
  const std::size_t d = static_cast<std::size_t>(f.dim() / 2);
  const Cylinder& V = out.annihilation.cylinder;
  Rational mass = joining_mass(G, d, V);
  if (mass == 0) mass = cylinder_measure(V);
  const auto g = normalized_cylinder(V, mass);
  const auto conv = dft(star_kernel(f, g, G));
  const auto F = dft(f);
  std::map<std::vector<std::int64_t>, Complex> factors;
  for (std::size_t i = 0; i < F.size(); ++i) {
    auto n = F.coords(i);
    std::vector<std::int64_t> psi(n.begin() + static_cast<std::ptrdiff_t>(d), n.end());
    for (auto& v : psi) v = centered(v, f.modulus());
    auto it = factors.find(psi);
    if (it == factors.end()) it = factors.emplace(psi, joining_factor(G, d, Character(psi), g)).first;
    if (std::abs(conv[i] - F[i] * it->second) > 1e-9)
      fail(ErrorKind::Refuted, "coefficient formula for f *_Gamma g fails");
  }
  return out;
}

nlohmann::json to_json(const SubgroupModel& H) {
  return {{"q", H.q}, {"dims", H.dims}, {"basis", H.basis}, {"order", H.order.get_str()}};
}

SubgroupModel subgroup_from_json(const nlohmann::json& j) {
  auto basis = j.at("basis").get<std::vector<ModVec>>();
  const auto q = j.at("q").get<std::uint64_t>();
  auto dims = j.at("dims").get<std::vector<std::size_t>>();
  if (basis.size() == 1) {
    std::vector<Rational> u;
    for (auto v : basis[0]) u.push_back(make_rational(BigInt(static_cast<unsigned long>(v)), BigInt(static_cast<unsigned long>(q))));
    auto H = cyclic_closure(u, dims);
    if (H.q != q) {
      // the reduced denominator may be smaller; rescale into the declared modulus
      return subgroup_closure(q, std::move(dims), std::move(basis));
    }
    return H;
  }
  return subgroup_closure(q, std::move(dims), std::move(basis));
}

nlohmann::json to_json(const AffineJoining& G) {
  nlohmann::json cosets = nlohmann::json::array();
  for (const auto& c : G.cosets) cosets.push_back(to_json(to_point(c, G.q(), 0, c.size())));
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : G.weights) weights.push_back(format_rational(w));
  return {{"base", to_json(G.base)}, {"cosets", cosets}, {"weights", weights}};
}

AffineJoining joining_from_json(const nlohmann::json& j) {
  AffineJoining G;
  G.base = subgroup_from_json(j.at("base"));
  for (const auto& c : j.at("cosets")) G.cosets.push_back(lift(point_from_json(c).coords(), G.q()));
  for (const auto& w : j.at("weights")) G.weights.push_back(parse_rational(w.get<std::string>()));
  if (G.cosets.size() != G.weights.size()) fail(ErrorKind::InvalidInput, "cosets and weights differ in length");
  Rational sum = 0;
  for (const auto& w : G.weights) {
    if (w < 0 || w > 1) fail(ErrorKind::InvalidInput, "weights must lie in [0, 1]");
    sum += w;
  }
  if (sum != 1) fail(ErrorKind::InvalidInput, "weights must sum to 1");
  return G;
}

}  // namespace ergolab
