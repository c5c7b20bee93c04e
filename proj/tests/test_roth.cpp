#include <doctest.h>

#include <cmath>
#include <random>

#include "ergolab/roth.hpp"

using namespace ergolab;

namespace {

GridFunction random_grid(int d, std::uint64_t q, std::mt19937_64& rng, bool complex_values = true) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction f(d, q);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = Complex(u(rng), complex_values ? u(rng) : 0.0);
  return f;
}

GridFunction constant(int d, std::uint64_t q, Complex c) {
  GridFunction f(d, q);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = c;
  return f;
}

}  // namespace

TEST_CASE("subgroups and the quotient dual") {
  const auto K = coordinate_subgroup(2, 5, {1});
  CHECK(K.elements.size() == 5);
  CHECK(in_quotient_dual(K, {3, 0}));
  CHECK_FALSE(in_quotient_dual(K, {3, 1}));
  const auto D = subgroup_from_generators(2, 6, {{2, 3}});
  CHECK(D.elements.size() == 6);
  CHECK(in_quotient_dual(D, {3, 2}));  // 2*3 + 3*2 = 12 = 0 mod 6
  CHECK_THROWS_AS(coordinate_subgroup(2, 5, {2}), LabError);
}

TEST_CASE("quotient projection") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<long> v(0, 12);
  ExactGrid f(2, 5);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = make_rational(v(rng), 12);

  const auto row = quotient_project(f, coordinate_subgroup(2, 5, {1}));
  for (long x = 0; x < 5; ++x) {
    Rational m = 0;
    for (long y = 0; y < 5; ++y) m += f.at({x, y});
    for (long y = 0; y < 5; ++y) CHECK(row.at({x, y}) == m / 5);
  }
  CHECK(quotient_project(row, coordinate_subgroup(2, 5, {1})).values() == row.values());

  Rational mean = 0, pmean = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    mean += f[i];
    pmean += row[i];
  }
  CHECK(mean == pmean);

  const auto whole = quotient_project(f, coordinate_subgroup(2, 5, {0, 1}));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(whole[i] == mean / 25);
  CHECK(quotient_project(f, coordinate_subgroup(2, 5, {})).values() == f.values());

  // Fourier support: f'^ = f^ on the quotient dual and 0 elsewhere
  GridFunction fc(2, 5);
  for (std::size_t i = 0; i < f.size(); ++i) fc[i] = f[i].get_d();
  const auto K = coordinate_subgroup(2, 5, {1});
  const auto F = dft(fc), P = dft(quotient_project(fc, K));
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (in_quotient_dual(K, F.coords(i))) CHECK(std::abs(P[i] - F[i]) < 1e-12);
    else CHECK(std::abs(P[i]) < 1e-12);
  }
}

TEST_CASE("roth form examples") {
  CHECK(roth_form(constant(2, 3, 1.0), constant(2, 3, 1.0), constant(2, 3, 1.0)).direct == Complex(1.0, 0.0));
  ExactGrid ind(1, 5);
  ind[0] = 1;
  CHECK(roth_form_direct(ind, ind, ind) == make_rational(1, 25));
  GridFunction indc(1, 5);
  indc[0] = 1.0;
  CHECK(std::abs(roth_form_spectral(indc, indc, indc) - 0.04) < 1e-15);
}

TEST_CASE("direct and spectral paths agree") {
  std::mt19937_64 rng(73);
  for (std::uint64_t q : {3, 5, 7, 9})
    for (int d : {1, 2})
      for (int t = 0; t < 10; ++t) {
        const auto f0 = random_grid(d, q, rng), f1 = random_grid(d, q, rng), f2 = random_grid(d, q, rng);
        const auto v = roth_form(f0, f1, f2);
        CHECK(std::abs(v.direct - v.spectral) < 1e-9);
      }
  GridFunction e(1, 4);
  try {
    roth_form_spectral(e, e, e);
    FAIL("even q accepted");
  } catch (const LabError& err) {
    CHECK(err.kind() == ErrorKind::UnsupportedModulus);
  }
}

TEST_CASE("gap bound on random trials") {
  std::mt19937_64 rng(79);
  const auto K = coordinate_subgroup(2, 5, {1});
  for (int t = 0; t < 50; ++t) {
    const auto f0 = random_grid(2, 5, rng, false), f1 = random_grid(2, 5, rng, false), f2 = random_grid(2, 5, rng, false);
    const auto r = quotient_gap_bound(f0, f1, f2, K);
    CHECK(r.ok);
    CHECK(r.gap <= r.bound + 1e-9);
    CHECK(std::abs(r.I_2 - r.I_W) < 1e-9);
  }
}

TEST_CASE("gap vanishes for invariant f2 or zero inputs") {
  std::mt19937_64 rng(83);
  const auto K = coordinate_subgroup(2, 7, {1});
  const auto f0 = random_grid(2, 7, rng), f1 = random_grid(2, 7, rng);
  const auto f2 = quotient_project(random_grid(2, 7, rng), K);
  const auto r = quotient_gap_bound(f0, f1, f2, K);
  CHECK(r.gap < 1e-12);
  CHECK(r.kappa < 1e-12);
  const auto z = quotient_gap_bound(constant(2, 7, 0.0), f1, f2, K);
  CHECK(std::abs(z.I) == 0.0);
  CHECK(std::abs(z.I_W) == 0.0);
}

TEST_CASE("kappa precondition is checked") {
  std::mt19937_64 rng(89);
  const auto K = coordinate_subgroup(2, 5, {1});
  const auto f = random_grid(2, 5, rng, false);
  try {
    quotient_gap_bound(f, f, f, K, 1e-6);
    FAIL("kappa violation accepted");
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::InvalidInput);
    CHECK(std::string(e.what()).find("chi") != std::string::npos);
  }
}

TEST_CASE("even modulus witness breaks the bound") {
  // Z_2 x Z_2, K = {0} x Z_2
  const auto K = coordinate_subgroup(2, 2, {1});
  GridFunction f(2, 2), one = constant(2, 2, 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto x = f.coords(i);
    f[i] = 0.5 * (std::pow(-1.0, double(x[1])) + std::pow(-1.0, double(x[0] + x[1])));
  }
  const auto r = quotient_gap_values(f, one, f, K);
  CHECK(r.gap == doctest::Approx(0.5));
  CHECK(r.bound == doctest::Approx(std::sqrt(0.125)));
  CHECK(r.gap > r.bound);
  try {
    quotient_gap_bound(f, one, f, K);
    FAIL("even modulus accepted");
  } catch (const LabError& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedModulus);
  }
}
