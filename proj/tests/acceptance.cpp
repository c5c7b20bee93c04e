// One line per acceptance criterion; exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ergolab/certificates.hpp"
#include "ergolab/harmonic.hpp"
#include "ergolab/joinings.hpp"
#include "ergolab/lab.hpp"
#include "ergolab/roth.hpp"
#include "ergolab/weyl.hpp"

using namespace ergolab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Rational rat(long p, long q) { return make_rational(p, q); }

GridFunction random_grid(int d, std::uint64_t q, std::mt19937_64& rng, bool complex_values) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridFunction f(d, q);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = Complex(u(rng), complex_values ? u(rng) : 0.0);
  return f;
}

Outcome annihilation_exactness() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> entry(-3, 3), num(0, 9999), coin(0, 2);
  long batches = 0, zeros = 0;
  for (std::size_t r = 2; r <= 12; ++r)
    for (std::size_t k = 1; k <= 4 && k < r; ++k) {
      const ApproxHammingBall U(TorusPoint::zero(r), k, rat(1, 8));
      for (int b = 0; b < 200; ++b) {
        std::vector<Character> chars;
        while (chars.size() < k) {
          std::vector<std::int64_t> n(r, 0);
          for (auto& x : n)
            if (coin(rng) == 0) x = entry(rng);
          Character c(n);
          if (!c.is_trivial()) chars.push_back(c);
        }
        const auto V = annihilating_cylinder(U, chars);
        if (V.indices.size() != r - k) return {false, "cylinder has the wrong index count"};
        for (const auto& c : chars) {
          const Complex base = cylinder_fourier(V, true, c);
          if (base != Complex(0.0, 0.0)) return {false, "nonzero target coefficient"};
          for (int t = 0; t < 20; ++t) {
            std::vector<Rational> s(r);
            for (auto& x : s) x = rat(num(rng), 10000);
            if (translate_coefficient(base, c, TorusPoint(s)) != Complex(0.0, 0.0))
              return {false, "translate broke the zero"};
            ++zeros;
          }
        }
        ++batches;
      }
    }
  return {true, std::to_string(batches) + " batches, " + std::to_string(zeros) + " translated zeros"};
}

Outcome topk_residual() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> len(1, 400);
  double worst_ratio = 0;
  for (long k : {1, 4, 9, 16})
    for (int t = 0; t < 100; ++t) {
      CoefficientTable table;
      const int n = len(rng);
      const double decay = 0.02 * (t % 10);
      for (int i = 0; i < n; ++i) table[Character({i - n / 2, i % 3})] = Complex(g(rng), g(rng)) * std::exp(-decay * i);
      const double norm = std::sqrt(coefficient_energy(table));
      for (auto& [c, v] : table) v /= norm;
      const auto top = top_k_characters(table, k, 1.0);
      const double bound = 1.0 / std::sqrt(1.0 + k);
      if (!(top.residual < bound + 1e-12)) return {false, "k = " + std::to_string(k) + " residual " + std::to_string(top.residual)};
      worst_ratio = std::max(worst_ratio, top.residual / bound);
    }
  std::ostringstream s;
  s << "400 tables, worst residual/bound = " << worst_ratio;
  return {true, s.str()};
}

Outcome plancherel_convolution() {
  std::mt19937_64 rng(3);
  double worst = 0;
  for (std::uint64_t q : {3, 5, 7})
    for (int d : {1, 2})
      for (int t = 0; t < 100; ++t) {
        const auto f = random_grid(d, q, rng, true), h = random_grid(d, q, rng, true);
        worst = std::max(worst, std::abs(coefficient_energy(dft(f)) - l2_norm_squared(f)));
        const auto lhs = dft(convolve(f, h));
        const auto F = dft(f), H = dft(h);
        for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - F[i] * H[i]));
      }
  std::ostringstream s;
  s << "600 trials, max error " << worst;
  return {worst < 1e-9, s.str()};
}

Outcome spectral_identity() {
  std::mt19937_64 rng(4);
  double worst = 0;
  for (std::uint64_t q : {3, 5, 7, 9})
    for (int d : {1, 2})
      for (int t = 0; t < 100; ++t) {
        const auto f0 = random_grid(d, q, rng, true), f1 = random_grid(d, q, rng, true), f2 = random_grid(d, q, rng, true);
        worst = std::max(worst, std::abs(roth_form_direct(f0, f1, f2) - roth_form_spectral(f0, f1, f2)));
      }
  bool rejected = false;
  try {
    GridFunction e(2, 4);
    roth_form_spectral(e, e, e);
  } catch (const LabError& err) {
    rejected = err.kind() == ErrorKind::UnsupportedModulus;
  }
  std::ostringstream s;
  s << "800 trials, max |direct - spectral| " << worst << ", q = 4 " << (rejected ? "rejected" : "ACCEPTED");
  return {worst < 1e-9 && rejected, s.str()};
}

Outcome quotient_gap() {
  std::mt19937_64 rng(5);
  const auto K = coordinate_subgroup(2, 5, {1});
  double min_margin = 1e9;
  for (int t = 0; t < 200; ++t) {
    const auto f0 = random_grid(2, 5, rng, false), f1 = random_grid(2, 5, rng, false), f2 = random_grid(2, 5, rng, false);
    const auto r = quotient_gap_values(f0, f1, f2, K);
    if (!(r.gap <= r.bound + 1e-9)) return {false, "trial " + std::to_string(t) + " violates the bound"};
    min_margin = std::min(min_margin, r.bound - r.gap);
  }
  std::ostringstream s;
  s << "200 trials, smallest margin " << min_margin;
  return {true, s.str()};
}

Outcome affine_averaging() {
  struct Regime {
    const char* name;
    std::vector<Rational> u;
    std::size_t r;
  };
  const Rational w = rat(1, 7);  // alpha = 2/7, w1 = alpha / 2
  const std::vector<Regime> regimes{
      {"beta = alpha", {0, w, 0, frac(4 * w), rat(2, 7)}, 1},
      {"jointly generic", {0, w, 0, frac(4 * w), rat(1, 11)}, 1},
      {"beta = 2 alpha", {0, w, 0, frac(4 * w), rat(4, 7)}, 1},
      {"two-dimensional beta", {0, rat(1, 13), 0, rat(4, 13), rat(5, 13), rat(1, 2)}, 2},
      {"zero drift", {0, 0, 0, 0, 0}, 1},
  };
  long checks = 0;
  for (const auto& R : regimes) {
    std::vector<Rational> c{rat(1, 3), rat(1, 5), rat(2, 3), rat(2, 5)};
    for (std::size_t i = 0; i < R.r; ++i) c.push_back(0);
    const auto J = extract_affine_joining(c, R.u, 1, R.r);
    if (J.q > 2000) return {false, std::string(R.name) + ": modulus above 2000"};
    for (std::uint64_t salt = 1; salt <= 20; ++salt) {
      const AmbientFunction F = [salt](const ModVec& v) {
        std::uint64_t h = salt;
        for (auto x : v) h = (h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2))) * 0xff51afd7ed558ccdULL;
        return make_rational(static_cast<long>((h >> 33) % 101), 100);
      };
      const Rational lhs = orbit_average(J, F);
      if (lhs != coset_average(J, F) || lhs != gamma_form(J, F))
        return {false, std::string(R.name) + ": averaging identity fails"};
      ++checks;
    }
  }
  return {true, "5 regimes, " + std::to_string(checks) + " exact identities"};
}

Outcome main_inequality() {
  std::ostringstream s;
  bool ok = true;
  for (auto [k, r, q] : {std::tuple{4, 5, 101}, {9, 10, 101}}) {
    nlohmann::json cfg = {{"experiment", "main_inequality"},
                          {"params", {{"q", q}, {"k", k}, {"r", r}, {"functions", 10}}}};
    const auto rep = run_experiment(ExperimentConfig::from_json(cfg));
    double margin = 1e9;
    int asserted = 0;
    for (const auto& m : rep.metrics)
      if (m.asserted) {
        ++asserted;
        margin = std::min(margin, *m.margin);
      }
    ok = ok && rep.status == Status::Pass && asserted == 10;
    s << "exact k=" << k << ": " << to_string(rep.status) << " min margin " << margin << "; ";
  }
  for (int k : {4, 9}) {
    nlohmann::json cfg = {{"experiment", "main_inequality"},
                          {"params",
                           {{"mode", "convergent"},
                            {"k", k},
                            {"beta", k == 4 ? "sqrt3,sqrt5,sqrt7,sqrt11,sqrt13"
                                            : "sqrt2,sqrt3,sqrt5,sqrt6,sqrt7,sqrt10,sqrt11,sqrt13,sqrt14,sqrt15"},
                            {"N", 1000000},
                            {"functions", 3}}}};
    const auto rep = run_experiment(ExperimentConfig::from_json(cfg));
    double margin = 1e9;
    for (const auto& m : rep.metrics)
      if (m.margin) margin = std::min(margin, *m.margin);
    ok = ok && rep.status == Status::Pass && margin > 0;
    s << "convergent k=" << k << ": margin " << margin << (k == 4 ? "; " : "");
  }
  return {ok, s.str()};
}

Outcome certificate_suite() {
  const auto evens = evens_certificate(100, rat(49, 100));
  if (!verify_certificate(evens).ok) return {false, "evens certificate rejected"};
  const auto found = search_min_m(evens, evens, 10);
  if (!found.ok || found.m != 3 || !verify_certificate(found.cert).ok) return {false, "search did not return a verified m = 3"};
  const auto two = combine_certificates(evens, evens, 2);
  bool proof = false;
  for (const auto& d : two.diagnostics) proof = proof || d.find("exact bound") != std::string::npos;
  if (two.ok || !proof) return {false, "m = 2 not proven impossible"};

  const auto W = build_band_witness(1, rat(1, 4), 10000);
  if (W.E.r > 6) return {false, "toy ball exceeds r = 6"};
  std::vector<std::string> names{"sqrt2", "sqrt3", "sqrt5", "sqrt6", "sqrt7", "sqrt10"};
  names.resize(W.E.r);
  const auto C = rotation_certificate(W.E, W.U, lattice_frequency(names, BigInt(1000003)), 100000);
  const auto v = verify_certificate(C);
  std::ostringstream s;
  s << "evens ok, m = 3 found, m = 2 refuted by exact bound, rotation r=" << W.E.r << " |S|=" << C.S.size()
    << " |B|=" << C.B.count() << (v.ok ? " verified" : " FAILED");
  return {v.ok && !C.S.empty(), s.str()};
}

Outcome band_witness() {
  std::ostringstream s;
  bool ok = true;
  for (std::size_t k : {1, 2})
    for (const auto& eta : {rat(1, 4), rat(2, 5)}) {
      const auto W = build_band_witness(k, eta, 100000);
      const bool good = W.measure > eta && W.E.r > 2 * W.E.t + k && W.mc_hits == 0 && W.mc_samples == 100000;
      ok = ok && good;
      s << "(k=" << k << ", eta=" << eta << "): r=" << W.E.r << " t=" << W.E.t << " eps=" << W.eps << " m(E)=" << W.measure.get_d()
        << (good ? "" : " BAD") << "; ";
    }
  return {ok, s.str()};
}

Outcome sqrt_positivity() {
  const BohrHammingBall bh(convergent_frequency({"sqrt2", "sqrt3"}, BigInt(1000000)),
                           ApproxHammingBall(TorusPoint::zero(2), 1, rat(1, 8)));
  const auto S = sqrt_set_enumerate(bh, 2000).elems;
  std::mt19937_64 rng(10);
  auto random_set = [&](std::size_t size) {
    std::vector<bool> A(size, false);
    std::vector<std::size_t> order(size);
    for (std::size_t i = 0; i < size; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < (3 * size + 9) / 10; ++i) A[order[i]] = true;
    return A;
  };
  const RotationModel rot(1009, {5});
  const WeylGridModel weyl(WeylSystem(Frequency(TorusPoint({rat(3, 31)}), true)));
  std::ostringstream s;
  bool ok = !S.empty();
  s << "|sqrtBH cap [1,2000]| = " << S.size();
  for (const FiniteSystem* sys : {static_cast<const FiniteSystem*>(&rot), static_cast<const FiniteSystem*>(&weyl)}) {
    const auto A = random_set(sys->size());
    const auto best = min_triple_intersection(*sys, A, S, 2000);
    ok = ok && best.value > 0;
    s << "; max " << best.value << " at n=" << best.n;
  }
  return {ok, s.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"annihilation exactness", 10, annihilation_exactness},
      {"top-k residual", 5, topk_residual},
      {"Plancherel and convolution", 10, plancherel_convolution},
      {"3AP spectral identity", 10, spectral_identity},
      {"quotient gap bound", 10, quotient_gap},
      {"affine-joining averaging", 60, affine_averaging},
      {"main inequality", 300, main_inequality},
      {"certificate suite", 30, certificate_suite},
      {"band witness", 60, band_witness},
      {"sqrtBH recurrence positivity", 60, sqrt_positivity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::printf("%s %2zu %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", i + 1, c.name, out.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
