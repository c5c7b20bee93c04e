#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ergolab/harmonic.hpp"

using namespace ergolab;

namespace {

Complex e(double t) { return std::polar(1.0, 2.0 * std::numbers::pi * t); }

// Midpoint rule for (1/m(V)) int_V e(-n.x) dx over a one- or two-dimensional torus.
Complex quadrature_1d(double y, double eta, std::int64_t n, int points) {
  Complex acc = 0;
  const double h = 2 * eta / points;
  for (int i = 0; i < points; ++i) acc += e(-double(n) * (y - eta + (i + 0.5) * h));
  return acc / double(points);
}

GridFunction random_grid(int d, std::uint64_t q, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  GridFunction f(d, q);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = Complex(g(rng), g(rng));
  return f;
}

}  // namespace

TEST_CASE("cylinder fourier closed form matches quadrature") {
  const Cylinder V({0}, TorusPoint({Rational(1, 2)}), Rational(1, 4));
  const Complex c = cylinder_fourier(V, true, Character({1}));
  CHECK(c.real() == doctest::Approx(-2.0 / std::numbers::pi).epsilon(1e-12));
  CHECK(std::abs(c.imag()) < 1e-12);
  const Complex quad = quadrature_1d(0.5, 0.25, 1, 1000000);
  CHECK(std::abs(c - quad) < 1e-6);

  // unnormalized scales by m(V) = 1/2
  CHECK(std::abs(cylinder_fourier(V, false, Character({1})) - 0.5 * c) < 1e-15);
  CHECK(cylinder_fourier(V, true, Character({0})) == Complex(1.0, 0.0));

  const Cylinder V2({1}, TorusPoint({Rational(1, 3), Rational(1, 5)}), Rational(1, 7));
  CHECK(std::abs(cylinder_fourier(V2, true, Character({0, 3})) - quadrature_1d(0.2, 1.0 / 7, 3, 200000)) < 1e-6);
  CHECK(cylinder_fourier(V2, true, Character({2, 0})) == Complex(0.0, 0.0));
  CHECK(cylinder_fourier(V2, true, Character({2, 1})) == Complex(0.0, 0.0));
  CHECK(cylinder_fourier_vanishes(V2, Character({1, 1})));
}

TEST_CASE("normalized cylinder coefficients are bounded by one") {
  const Cylinder V({0, 2}, TorusPoint({Rational(1, 3), Rational(0), Rational(3, 8)}), Rational(1, 9));
  for (int a = -6; a <= 6; ++a)
    for (int b = -6; b <= 6; ++b) CHECK(std::abs(cylinder_fourier(V, true, Character({a, 0, b}))) <= 1.0 + 1e-15);
}

TEST_CASE("translate coefficient") {
  const Complex c = translate_coefficient(1.0, Character({1}), TorusPoint({Rational(1, 4)}));
  CHECK(c == Complex(0.0, 1.0));
  CHECK(translate_coefficient(Complex(0.3, 0.2), Character({5}), TorusPoint::zero(1)) == Complex(0.3, 0.2));
  CHECK(translate_coefficient(0.0, Character({3}), TorusPoint({Rational(1, 7)})) == Complex(0.0, 0.0));
}

TEST_CASE("dft basics") {
  GridFunction one(1, 5);
  for (std::size_t i = 0; i < 5; ++i) one[i] = 1.0;
  const auto F = dft(one);
  CHECK(std::abs(F[0] - 1.0) < 1e-14);
  for (std::size_t i = 1; i < 5; ++i) CHECK(std::abs(F[i]) < 1e-14);

  GridFunction delta(1, 9);
  delta[0] = 1.0;
  const auto D = dft(delta);
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(D[i] - 1.0 / 9) < 1e-15);

  std::mt19937_64 rng(3);
  const auto f = random_grid(2, 7, rng);
  const auto back = inverse_dft(dft(f));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(back[i] - f[i]) < 1e-12);
}

TEST_CASE("fft and direct dft agree") {
  std::mt19937_64 rng(11);
  for (auto [d, q] : {std::pair{1, 64}, {2, 9}, {2, 12}, {3, 5}}) {
    const auto f = random_grid(d, q, rng);
    const auto a = dft_direct(f), b = dft_fft(f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
  }
}

TEST_CASE("plancherel and convolution") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t)
    for (std::uint64_t q : {3, 5, 7})
      for (int d : {1, 2}) {
        const auto f = random_grid(d, q, rng), g = random_grid(d, q, rng);
        CHECK(std::abs(coefficient_energy(dft(f)) - l2_norm_squared(f)) < 1e-9);
        const auto lhs = dft(convolve(f, g));
        const auto F = dft(f), G = dft(g);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(lhs[i] - F[i] * G[i]) < 1e-9);
      }
}

TEST_CASE("centered representatives and tables") {
  CHECK(centered(3, 5) == -2);
  CHECK(centered(2, 5) == 2);
  CHECK(centered(2, 4) == 2);
  CHECK(centered(-1, 7) == -1);
  GridFunction f(1, 5);
  f[1] = 1.0;
  const auto table = to_table(dft(f), true);
  CHECK(table.size() == 5);
  CHECK(table.count(Character({-2})) == 1);
}

TEST_CASE("top k selection") {
  CoefficientTable t{{Character({1}), 0.9}, {Character({2}), 0.3}, {Character({3}), 0.1}};
  const auto top = top_k_characters(t, 1, 1.0);
  REQUIRE(top.selected.size() == 1);
  CHECK(top.selected[0] == Character({1}));
  CHECK(top.residual == doctest::Approx(0.3));
  CHECK(top.bound_sqrt_k == doctest::Approx(1.0));

  // ties go to the lexicographically smallest tuple
  CoefficientTable tie{{Character({2}), 0.5}, {Character({-1}), 0.5}, {Character({0}), 0.5}};
  const auto tt = top_k_characters(tie, 2, 1.0);
  CHECK(tt.selected == std::vector<Character>{Character({-1}), Character({0})});

  CoefficientTable zero{{Character({1}), 0.0}, {Character({2}), 0.0}};
  const auto tz = top_k_characters(zero, 3, 1.0);
  CHECK(tz.selected.empty());
  CHECK(tz.residual == 0.0);

  CHECK_THROWS_AS(top_k_characters(t, 0, 1.0), LabError);
}

TEST_CASE("top k residual bound on random unit tables") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 25; ++trial)
    for (long k : {1, 4, 9, 16}) {
      CoefficientTable t;
      for (int n = -20; n <= 20; ++n) t[Character({n})] = Complex(g(rng), g(rng)) * std::exp(-0.1 * std::abs(n) * trial);
      const double norm = std::sqrt(coefficient_energy(t));
      for (auto& [c, v] : t) v /= norm;
      const auto top = top_k_characters(t, k, 1.0);
      CHECK(top.residual < 1.0 / std::sqrt(1.0 + k) + 1e-12);
    }
}

TEST_CASE("annihilating cylinder") {
  const ApproxHammingBall U3(TorusPoint::zero(3), 1, Rational(1, 10));
  const auto V = annihilating_cylinder(U3, {Character({0, 2, 0})});
  CHECK(V.indices == std::vector<std::size_t>{0, 2});

  const ApproxHammingBall U4(TorusPoint::zero(4), 2, Rational(1, 10));
  const auto W = annihilating_cylinder(U4, {Character({1, 0, 0, 0}), Character({1, 0, 0, 0})});
  CHECK(W.indices == std::vector<std::size_t>{1, 2});
  CHECK(cylinder_fourier(W, true, Character({1, 0, 0, 0})) == Complex(0.0, 0.0));

  const ApproxHammingBall U0(TorusPoint::zero(3), 0, Rational(1, 10));
  CHECK(annihilating_cylinder(U0, {}).indices == std::vector<std::size_t>{0, 1, 2});

  CHECK_THROWS_AS(annihilating_cylinder(U3, {Character({0, 0, 0})}), LabError);
}

TEST_CASE("annihilation survives every translate") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> n(-3, 3);
  std::uniform_int_distribution<long> num(0, 999);
  const ApproxHammingBall U(TorusPoint::zero(6), 3, Rational(1, 8));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Character> chars;
    while (chars.size() < 3) {
      std::vector<std::int64_t> v(6);
      for (auto& x : v) x = n(rng);
      Character c(v);
      if (!c.is_trivial()) chars.push_back(c);
    }
    const auto V = annihilating_cylinder(U, chars);
    CHECK(V.indices.size() == 3);
    for (const auto& c : chars)
      for (int s = 0; s < 5; ++s) {
        std::vector<Rational> x(6);
        for (auto& xi : x) xi = Rational(num(rng), 1000);
        CHECK(translate_coefficient(cylinder_fourier(V, true, c), c, TorusPoint(x)) == Complex(0.0, 0.0));
      }
  }
}

TEST_CASE("uniformizing cylinder kills the top characters") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> n(-2, 2);
  const ApproxHammingBall U(TorusPoint::zero(6), 4, Rational(1, 8));
  CoefficientTable t;
  for (int i = 0; i < 40; ++i) {
    std::vector<std::int64_t> v(6);
    for (auto& x : v) x = n(rng);
    t[Character(v)] = Complex(g(rng), g(rng));
  }
  const double norm = std::sqrt(coefficient_energy(t));
  for (auto& [c, v] : t) v /= norm;
  const auto u = uniformizing_cylinder(U, t);
  for (const auto& c : u.top.selected) CHECK(cylinder_fourier(u.cylinder, true, c) == Complex(0.0, 0.0));
  double worst = 0;
  for (const auto& [c, v] : t)
    if (!c.is_trivial()) worst = std::max(worst, std::abs(v * cylinder_fourier(u.cylinder, true, c)));
  CHECK(worst < 0.5);
}

TEST_CASE("table json and grid binary round trips") {
  CoefficientTable t{{Character({1, -2}), Complex(0.5, -0.25)}, {Character({0, 0}), 1.0}};
  CHECK(table_from_json(to_json(t)) == t);

  std::mt19937_64 rng(31);
  const auto f = random_grid(2, 5, rng);
  std::stringstream ss;
  write_grid(ss, f);
  const auto g = read_grid(ss);
  CHECK(g.same_shape(f));
  CHECK(g.values() == f.values());
  std::stringstream bad("NOTAGRID");
  CHECK_THROWS_AS(read_grid(bad), LabError);
}
