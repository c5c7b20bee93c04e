#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "ergolab/joinings.hpp"

using namespace ergolab;

namespace {

std::vector<Rational> rv(std::initializer_list<std::pair<long, long>> xs) {
  std::vector<Rational> out;
  for (auto [p, q] : xs) out.push_back(make_rational(p, q));
  return out;
}

// Pseudo-random rational test function on ambient vectors.
AmbientFunction hashed(std::uint64_t salt) {
  return [salt](const ModVec& v) {
    std::uint64_t h = salt;
    for (auto x : v) h = (h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2))) * 0xff51afd7ed558ccdULL;
    return make_rational(static_cast<long>((h >> 33) % 17), 16);
  };
}

Complex e(double t) { return std::polar(1.0, 2.0 * std::numbers::pi * t); }

// Extraction data for alpha = 1/qa and beta = b/qb with d = r = 1.
JoiningExtraction extract_pair(long qa, long b, long qb) {
  const auto c = rv({{1, 3}, {1, 5}, {2, 3}, {2, 5}, {0, 1}});
  const Rational w1 = make_rational(1, 2 * qa);
  const std::vector<Rational> u{Rational(0), w1, Rational(0), frac(4 * w1), make_rational(b, qb)};
  return extract_affine_joining(c, u, 1, 1);
}

}  // namespace

TEST_CASE("cyclic closures") {
  const auto H = cyclic_closure(rv({{1, 4}}));
  CHECK(H.q == 4);
  CHECK(H.order == 4);
  CHECK(H.elements == std::vector<ModVec>{{0}, {1}, {2}, {3}});

  const auto H6 = cyclic_closure(rv({{1, 2}, {1, 3}}));
  CHECK(H6.order == 6);
  std::vector<ModVec> oracle;
  for (std::uint64_t n = 0; n < 6; ++n) oracle.push_back({(3 * n) % 6, (2 * n) % 6});
  std::sort(oracle.begin(), oracle.end());
  CHECK(H6.elements == oracle);
  CHECK(H6.contains({3, 2}));
  CHECK_FALSE(H6.contains({1, 0}));

  CHECK(cyclic_closure(rv({{0, 1}, {0, 1}})).order == 1);
}

TEST_CASE("subgroup closure and projections") {
  const auto H = subgroup_closure(6, {1, 1}, {{2, 0}, {0, 3}});
  CHECK(H.order == 6);
  // pi_1 and pi_2 of the closure of <(a, b)> are the closures of <a> and <b>
  const auto J = cyclic_closure(rv({{2, 7}, {3, 5}}), {1, 1});
  std::set<std::uint64_t> p1, p2;
  for (const auto& v : J.elements) {
    p1.insert(v[0]);
    p2.insert(v[1]);
  }
  CHECK(p1.size() == 7);
  CHECK(p2.size() == 5);
}

TEST_CASE("affine decomposition of a measure") {
  // counts 2,1,2,1 on Z_4: stabilizer {0,2}
  const MeasureCounts mu{{{0}, 2}, {{1}, 1}, {{2}, 2}, {{3}, 1}};
  const auto G = affine_from_measure(4, {1}, mu);
  CHECK(G.base.order == 2);
  REQUIRE(G.cosets.size() == 2);
  Rational total = 0;
  for (const auto& w : G.weights) total += w;
  CHECK(total == 1);
  const auto F = [](const ModVec& v) { return Rational(static_cast<long>(v[0] * v[0])); };
  // oracle: (2*0 + 1*1 + 2*4 + 1*9) / 6
  CHECK(G.integrate(F) == make_rational(18, 6));

  const MeasureCounts uniform{{{0, 0}, 1}, {{2, 4}, 1}, {{4, 2}, 1}};
  const auto U = affine_from_measure(6, {1, 1}, uniform);
  CHECK(U.cosets.size() == 1);
  CHECK(U.weights[0] == 1);
  CHECK(U.base.order == 3);
}

TEST_CASE("averaging identity across frequency regimes") {
  for (auto [qa, b, qb] : {std::tuple{7L, 1L, 7L}, {7L, 1L, 11L}, {7L, 2L, 7L}, {11L, 3L, 13L}, {7L, 0L, 1L}}) {
    const auto J = extract_pair(qa, b, qb);
    Rational sum = 0;
    for (const auto& w : J.gamma.weights) {
      CHECK(w > 0);
      sum += w;
    }
    CHECK(sum == 1);
    for (std::uint64_t salt : {1u, 2u, 3u}) {
      const auto F = hashed(salt);
      const Rational lhs = orbit_average(J, F);
      CHECK(lhs == coset_average(J, F));
      CHECK(lhs == gamma_form(J, F));
    }
  }
}

TEST_CASE("beta equal to alpha gives a diagonal joining") {
  const auto J = extract_pair(7, 1, 7);
  // w1 = m^2 / 14 and w2 = m^2 / 7, so w2 = 2 w1 on every coset
  for (std::size_t j = 0; j < J.gamma.cosets.size(); ++j)
    for (const auto& h : J.gamma.base.elements) {
      const auto w = add_mod(J.gamma.cosets[j], h, J.q);
      CHECK(w[1] == (2 * w[0]) % J.q);
    }
}

TEST_CASE("zero drift collapses gamma to a point mass") {
  const auto c = rv({{1, 3}, {1, 5}, {2, 3}, {2, 5}, {0, 1}});
  const std::vector<Rational> u(5, Rational(0));
  const auto J = extract_affine_joining(c, u, 1, 1);
  CHECK(J.gamma.base.order == 1);
  REQUIRE(J.gamma.cosets.size() == 1);
  CHECK(J.gamma.cosets[0] == ModVec{0, 0});
}

TEST_CASE("weights do not depend on the generator of the 3AP group") {
  const Rational w1 = make_rational(1, 14);
  const std::vector<Rational> u{Rational(0), w1, Rational(0), 4 * w1, make_rational(1, 11)};
  const auto J1 = extract_affine_joining(rv({{1, 3}, {1, 5}, {2, 3}, {2, 5}, {0, 1}}), u, 1, 1);
  const auto J2 = extract_affine_joining(rv({{2, 3}, {2, 5}, {1, 3}, {4, 5}, {0, 1}}), u, 1, 1);
  auto a = J1.gamma.weights, b = J2.gamma.weights;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("malformed extraction inputs") {
  const auto u = rv({{0, 1}, {1, 14}, {0, 1}, {2, 7}, {1, 7}});
  try {
    extract_affine_joining(rv({{1, 3}, {1, 5}, {1, 3}, {2, 5}, {0, 1}}), u, 1, 1);
    FAIL("accepted a non-3AP c");
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInput);
  }
  // ord(c_s) = 7 shares a factor with ord(u) = 14
  CHECK_THROWS_AS(extract_affine_joining(rv({{1, 7}, {1, 5}, {2, 7}, {2, 5}, {0, 1}}), u, 1, 1), LabError);
  CHECK_THROWS_AS(extract_affine_joining(rv({{1, 3}}), u, 1, 1), LabError);
}

TEST_CASE("star kernel on a diagonal Z_5 joining") {
  AffineJoining G;
  G.base = subgroup_closure(5, {1, 1}, {{1, 1}});
  G.cosets = {{0, 0}};
  G.weights = {Rational(1)};
  const std::vector<Rational> gt{Rational(2), Rational(0), Rational(1, 2), Rational(3, 2), Rational(1)};
  const JoiningWeight g = [&](const TorusPoint& w) { return gt[static_cast<std::size_t>(Rational(w[0] * 5).get_num().get_si())]; };
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<long> v(0, 9);
  ExactGrid f(2, 5);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = make_rational(v(rng), 9);
  const auto K = star_kernel(f, g, G);
  for (long x = 0; x < 5; ++x)
    for (long y = 0; y < 5; ++y) {
      Rational acc = 0;
      for (long t = 0; t < 5; ++t) acc += f.at({x, y + 2 * t}) * gt[t];
      CHECK(K.at({x, y}) == acc / 5);
    }
  // g averages to 1, so the x marginal is preserved
  CHECK(kronecker_projection(K).values() == kronecker_projection(f).values());
}

TEST_CASE("star kernel over the full product is the x marginal") {
  AffineJoining G;
  G.base = subgroup_closure(5, {1, 1}, {{1, 0}, {0, 1}});
  G.cosets = {{0, 0}};
  G.weights = {Rational(1)};
  const Cylinder V({0}, TorusPoint({Rational(0)}), Rational(1, 4));
  const auto g = normalized_cylinder(V, joining_mass(G, 1, V));
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<long> v(0, 9);
  ExactGrid f(2, 5);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = make_rational(v(rng), 9);
  const auto K = star_kernel(f, g, G);
  const auto fp = kronecker_projection(f);
  for (long x = 0; x < 5; ++x)
    for (long y = 0; y < 5; ++y) CHECK(K.at({x, y}) == fp.at({x}));
}

TEST_CASE("annihilation: full product reduces to the plain rule") {
  AffineJoining G;
  G.base = subgroup_closure(5, {1, 3}, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
  G.cosets = {{0, 0, 0, 0}};
  G.weights = {Rational(1)};
  const ApproxHammingBall U(TorusPoint::zero(3), 1, Rational(1, 10));
  const auto a = annihilate_over_joining(U, G, {Character({2})});
  CHECK(a.exact);
  CHECK(a.residual == 0.0);
  CHECK(a.cylinder.indices.size() == 2);
  const ApproxHammingBall U0(TorusPoint::zero(3), 0, Rational(1, 10));
  const auto z = annihilate_over_joining(U0, G, {});
  CHECK(z.cylinder.indices == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(annihilate_over_joining(U, G, {Character({0})}), LabError);
}

TEST_CASE("annihilation on a Z_6 joining with an order-2 character") {
  AffineJoining G;
  // w1 is tied to the first w2 coordinate, the second one is free
  G.base = subgroup_closure(6, {1, 2}, {{1, 1, 0}, {0, 0, 1}});
  G.cosets = {{0, 0, 0}, {0, 3, 0}};
  G.weights = {make_rational(2, 3), make_rational(1, 3)};
  const ApproxHammingBall U(TorusPoint::zero(2), 1, Rational(1, 5));
  const Character chi({3});
  const auto a = annihilate_over_joining(U, G, {chi});
  CHECK(a.exact);
  const auto V = a.cylinder;
  // enumeration oracle for the integral of chi(w1) 1_V(w2)
  Complex acc = 0;
  for (std::size_t j = 0; j < G.cosets.size(); ++j)
    for (const auto& h : G.base.elements) {
      const auto w = add_mod(G.cosets[j], h, 6);
      if (cylinder_contains(V, to_point(w, 6, 1, 2))) acc += G.weights[j].get_d() * e(3.0 * w[0] / 6) / double(G.base.elements.size());
    }
  CHECK(std::abs(acc) < 1e-12);
}

TEST_CASE("inexact annihilation reports the true residual") {
  AffineJoining G;
  G.base = cyclic_closure(rv({{1, 7}, {1, 7}, {3, 7}}), {1, 2});
  G.cosets = {{0, 0, 0}};
  G.weights = {Rational(1)};
  const ApproxHammingBall U(TorusPoint::zero(2), 1, Rational(1, 5));
  const Character chi({1});
  const auto a = annihilate_over_joining(U, G, {chi});
  CHECK_FALSE(a.exact);
  CHECK(a.rule == "min-residual");
  const auto mass = cylinder_measure(a.cylinder);  // g = 1_V / m(V)
  Complex acc = 0;
  for (const auto& w : G.base.elements)
    if (cylinder_contains(a.cylinder, to_point(w, 7, 1, 2))) acc += e(double(w[0]) / 7);
  acc /= double(G.base.elements.size()) * mass.get_d();
  CHECK(a.residual == doctest::Approx(std::abs(acc)).epsilon(1e-12));
}

TEST_CASE("uniformizing over a joining") {
  AffineJoining G;
  G.base = subgroup_closure(5, {1, 3}, {{1, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
  G.cosets = {{0, 0, 0, 0}};
  G.weights = {Rational(1)};
  const ApproxHammingBall U(TorusPoint::zero(3), 2, Rational(1, 8));
  GridFunction f(2, 5);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = f.coords(i);
    f[i] = 0.5 + 0.2 * std::cos(2 * std::numbers::pi * double(x[0] + 2 * x[1]) / 5);
  }
  const auto u = uniformize_over_joining(f, U, G);
  CHECK(u.annihilation.exact);
  const auto g = normalized_cylinder(u.annihilation.cylinder, joining_mass(G, 1, u.annihilation.cylinder));
  const auto K = dft(star_kernel(f, g, G));
  const auto F = dft(f);
  for (std::size_t i = 0; i < K.size(); ++i) {
    const auto n = K.coords(i);
    if (n[1] != 0) CHECK(std::abs(K[i]) < 1e-12);
    const Complex factor = joining_factor(G, 1, Character({2 * centered(n[1], 5)}), g);
    CHECK(std::abs(K[i] - F[i] * factor) < 1e-12);
  }

  GridFunction even(2, 4);
  try {
    uniformize_over_joining(even, U, G);
    FAIL("even modulus accepted");
  } catch (const LabError& err) {
    CHECK(err.kind() == ErrorKind::UnsupportedModulus);
  }
}

TEST_CASE("k = 9 residual on a random unit trig polynomial") {
  std::vector<ModVec> gens{ModVec(11, 0), ModVec(11, 1)};
  gens[0][0] = 1;
  gens[1][0] = 0;
  AffineJoining G;
  G.base = subgroup_closure(7, {1, 10}, gens);
  G.cosets = {ModVec(11, 0)};
  G.weights = {Rational(1)};
  const ApproxHammingBall U(TorusPoint::zero(10), 9, Rational(1, 8));
  std::mt19937_64 rng(67);
  std::normal_distribution<double> gauss;
  TrigPoly f;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) f[{Character({a}), Character({b})}] = Complex(gauss(rng), gauss(rng));
  const double norm = std::sqrt(l2_norm_squared(f));
  for (auto& [k, c] : f) c /= norm;
  const auto u = uniformize_over_joining(f, U, G);
  CHECK(u.selected.size() == 9);
  const auto g = normalized_cylinder(u.annihilation.cylinder, joining_mass(G, 1, u.annihilation.cylinder));
  double worst = 0;
  for (const auto& [k, c] : f) {
    if (k.psi.is_trivial()) continue;
    worst = std::max(worst, std::abs(c * joining_factor(G, 1, k.psi, g)));
  }
  CHECK(worst < 1.0 / 3.0);
}

TEST_CASE("json round trips") {
  const auto J = extract_pair(7, 1, 11);
  const auto G2 = joining_from_json(to_json(J.gamma));
  CHECK(G2.cosets == J.gamma.cosets);
  CHECK(G2.weights == J.gamma.weights);
  CHECK(G2.base.order == J.gamma.base.order);
  const auto H = subgroup_from_json(to_json(J.g3ap));
  CHECK(H.elements == J.g3ap.elements);
}
