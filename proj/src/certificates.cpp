#include "ergolab/certificates.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include <algorithm>
#include <bit>
#include <fstream>
#include <random>
#include <sstream>

#include "ergolab/parallel.hpp"

namespace ergolab {

namespace b64 = boost::beast::detail::base64;

Bitset::Bitset(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

std::size_t Bitset::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::uint64_t Bitset::shifted_word(std::size_t i, std::size_t shift) const {
  const std::size_t ws = shift >> 6, bs = shift & 63;
  auto word = [&](std::size_t j) { return j < words_.size() ? words_[j] : std::uint64_t{0}; };
  std::uint64_t out = word(i + ws) >> bs;
  if (bs != 0) out |= word(i + ws + 1) << (64 - bs);
  return out;
}

std::string Bitset::to_bytes() const {
  std::string out((n_ + 7) / 8, '\0');
  for (std::size_t b = 0; b < out.size(); ++b)
    out[b] = static_cast<char>((words_[b / 8] >> (8 * (b % 8))) & 0xFF);
  return out;
}

Bitset Bitset::from_bytes(std::size_t n, const std::string& bytes) {
  if (bytes.size() != (n + 7) / 8) fail(ErrorKind::InvalidInput, "bitset payload has the wrong length");
  Bitset B(n);
  for (std::size_t b = 0; b < bytes.size(); ++b)
    B.words_[b / 8] |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[b])) << (8 * (b % 8));
  if (n % 64 != 0 && !B.words_.empty() && (B.words_.back() >> (n % 64)) != 0)
    fail(ErrorKind::InvalidInput, "bitset payload has bits beyond N");
  return B;
}

// ---- band sets --------------------------------------------------------------

bool BandSet::contains(const TorusPoint& x) const {
  if (x.dim() != r) fail(ErrorKind::InvalidInput, "point dimension differs from the band set");
  return deviation_count(x, a) <= t;
}

bool BandSet::contains_residues(const std::vector<std::uint64_t>& nums, std::uint64_t q) const {
  // dist / q >= a  <=>  dist * den >= num * q
  const auto an = static_cast<unsigned __int128>(to_u64(a.get_num()));
  const auto ad = static_cast<unsigned __int128>(to_u64(a.get_den()));
  std::size_t dev = 0;
  for (auto v : nums) {
    const std::uint64_t dist = std::min(v, q - v);
    if (static_cast<unsigned __int128>(dist) * ad >= an * q && ++dev > t) return false;
  }
  return true;
}

Rational BandSet::measure() const {
  const Rational p = Rational(1) - 2 * a;  // probability a coordinate deviates
  const BigInt P = p.get_num(), D = p.get_den(), Q = D - P;
  BigInt total = 0;
  for (std::size_t j = 0; j <= std::min(t, r); ++j) {
    BigInt pj, qj;
    mpz_pow_ui(pj.get_mpz_t(), P.get_mpz_t(), j);
    mpz_pow_ui(qj.get_mpz_t(), Q.get_mpz_t(), r - j);
    total += binomial(r, j) * pj * qj;
  }
  BigInt Dr;
  mpz_pow_ui(Dr.get_mpz_t(), D.get_mpz_t(), r);
  return make_rational(total, Dr);
}

namespace {

constexpr std::uint64_t kGrid = std::uint64_t{1} << 32;

std::uint64_t ceil_scaled(const Rational& x) {
  const Rational s = x * Rational(BigInt(static_cast<unsigned long>(kGrid)));
  BigInt c;
  mpz_cdiv_q(c.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
  return to_u64(c);
}

bool band_contains_grid(const std::vector<std::uint32_t>& x, std::uint64_t threshold, std::size_t t) {
  std::size_t dev = 0;
  for (auto v : x) {
    const std::uint64_t dist = std::min<std::uint64_t>(v, kGrid - v);
    if (dist >= threshold && ++dev > t) return false;
  }
  return true;
}

void check_ball_for_band(const BandSet& E, const ApproxHammingBall& U) {
  if (U.r != E.r) fail(ErrorKind::InvalidInput, "ball and band set dimensions differ");
  for (std::size_t i = 0; i < U.r; ++i)
    if (U.center[i] != Rational(1, 2)) fail(ErrorKind::InvalidInput, "band witness needs the centre (1/2, ..., 1/2)");
}

}  // namespace

std::uint64_t band_disjointness_hits(const BandSet& E, const ApproxHammingBall& U, std::uint64_t samples,
                                     std::uint64_t seed) {
  check_ball_for_band(E, U);
  const std::uint64_t threshold = ceil_scaled(E.a);
  // |u_i - 1/2| < eps  <=>  |d| <= ceil(eps 2^32) - 1 on the grid
  const std::uint64_t half_width = ceil_scaled(U.eps) - 1;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> coord;
  std::uniform_int_distribution<std::int64_t> offset(-static_cast<std::int64_t>(half_width),
                                                     static_cast<std::int64_t>(half_width));
  std::vector<std::uint32_t> x(E.r), y(E.r);
  std::vector<std::size_t> order(E.r);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::uint64_t tries = 0;
    do {
      for (auto& v : x) v = coord(rng);
      if (++tries > 100000) fail(ErrorKind::DegenerateInput, "band set too thin to sample");
    } while (!band_contains_grid(x, threshold, E.t));
    // U: k free coordinates, the rest within eps of 1/2
    for (std::size_t i = 0; i < E.r; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j = 0; j < E.r; ++j) {
      const std::size_t i = order[j];
      const std::uint32_t u = j < U.k ? coord(rng)
                                      : static_cast<std::uint32_t>(static_cast<std::int64_t>(kGrid / 2) + offset(rng));
      y[i] = x[i] + u;  // wraps mod 2^32
    }
    if (band_contains_grid(y, threshold, E.t)) ++hits;
  }
  return hits;
}

double band_measure_estimate(const BandSet& E, std::uint64_t samples, std::uint64_t seed) {
  const std::uint64_t threshold = ceil_scaled(E.a);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> coord;
  std::vector<std::uint32_t> x(E.r);
  std::uint64_t in = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (auto& v : x) v = coord(rng);
    in += band_contains_grid(x, threshold, E.t) ? 1 : 0;
  }
  return static_cast<double>(in) / static_cast<double>(samples);
}

BandWitness build_band_witness(std::size_t k, const Rational& eta, std::uint64_t mc_samples, std::uint64_t seed,
                               std::size_t max_r) {
  if (eta <= 0 || eta >= Rational(1, 2)) fail(ErrorKind::InvalidInput, "eta must lie in (0, 1/2)");
  std::vector<Rational> ladder;
  for (unsigned e = 3; e <= 16; ++e) ladder.push_back(make_rational(BigInt(1), BigInt(1) << e));
  std::size_t r = k + 1;
  for (; r <= max_r; ++r) {
    const std::size_t t = (r - k - 1) / 2;
    // m(E) shrinks as eps grows, so the smallest rung decides whether r works
    if (BandSet{r, Rational(1, 4) - ladder.back(), t}.measure() <= eta) continue;
    for (const auto& eps : ladder) {
      BandSet E{r, Rational(1, 4) - eps, t};
      const Rational m = E.measure();
      if (m <= eta) continue;
      BandWitness W;
      W.k = k;
      W.eps = eps;
      W.E = E;
      W.U = ApproxHammingBall(TorusPoint::constant(r, Rational(1, 2)), k, eps);
      W.measure = m;
      W.eta = eta;
      W.largest_r_tried = r;
      W.mc_samples = mc_samples;
      W.mc_hits = mc_samples ? band_disjointness_hits(E, W.U, mc_samples, seed) : 0;
      return W;
    }
  }
  fail(ErrorKind::Exhausted, "no band witness up to r = " + std::to_string(max_r));
}

// ---- certificates -----------------------------------------------------------

Verification verify_certificate(const Certificate& C) {
  Verification v;
  if (C.N < 0 || C.B.size() != static_cast<std::size_t>(C.N))
    fail(ErrorKind::InvalidInput, "bitset size differs from N");
  v.count = C.B.count();
  v.density_ok = Rational(BigInt(static_cast<unsigned long>(v.count))) >= C.delta * C.N;
  const std::size_t n = static_cast<std::size_t>(C.N);
  const auto& words = C.B.words();
  auto violates = [&](std::int64_t s) {
    const std::uint64_t step = static_cast<std::uint64_t>(s < 0 ? -s : s);
    if (step == 0) return v.count > 0 && C.k >= 1;
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::uint64_t x = words[i];
      for (std::size_t j = 1; j <= C.k && x; ++j) {
        const std::uint64_t shift = j * step;
        x = shift >= n ? 0 : x & C.B.shifted_word(i, shift);
      }
      if (x) return true;
    }
    return false;
  };
  std::vector<std::size_t> first(chunk_count(C.S.size()), C.S.size());
  parallel_chunks(C.S.size(), [&](std::size_t w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      if (violates(C.S[i])) {
        first[w] = i;
        return;
      }
  });
  const std::size_t bad = *std::min_element(first.begin(), first.end());
  if (bad < C.S.size()) v.violating_s = C.S[bad];
  v.ok = v.density_ok && !v.violating_s;
  std::ostringstream msg;
  if (!v.density_ok) msg << "|B| = " << v.count << " < delta' N = " << to_double(C.delta * C.N) << "; ";
  if (v.violating_s) msg << "intersection nonempty at s = " << *v.violating_s;
  if (v.ok) msg << "valid: |B| = " << v.count << ", |S| = " << C.S.size();
  v.message = msg.str();
  return v;
}

namespace {

nlohmann::json frequency_json(const Frequency& f) {
  return {{"beta", to_json(f.beta)}, {"generating", f.generating}, {"label", f.label}};
}

Frequency frequency_from(const nlohmann::json& j) {
  return Frequency(point_from_json(j.at("beta")), j.value("generating", false), j.value("label", std::string{}));
}

nlohmann::json rotation_json(const RotationData& R) {
  return {{"kind", "rotation"},
          {"construction", "band set E = {w_a <= t} (our realization of the witness)"},
          {"E", to_json(R.E)},
          {"beta", frequency_json(R.beta)},
          {"U", to_json(R.U)}};
}

std::vector<std::uint64_t> numerators_u64(const Frequency& f) {
  std::vector<std::uint64_t> out;
  for (const auto& v : f.numerators()) out.push_back(to_u64(v));
  return out;
}

Rational density_of(std::size_t count, std::int64_t N) {
  return N > 0 ? make_rational(BigInt(static_cast<unsigned long>(count)), BigInt(static_cast<long>(N))) : Rational(0);
}

}  // namespace

Certificate rotation_certificate(const BandSet& E, const ApproxHammingBall& U, const Frequency& beta, std::int64_t N) {
  if (N < 1) fail(ErrorKind::InvalidInput, "N must be >= 1");
  if (beta.dim() != E.r) fail(ErrorKind::InvalidInput, "frequency and band set dimensions differ");
  check_ball_for_band(E, U);
  if (!fits_u63(beta.q)) fail(ErrorKind::UnsupportedModulus, "denominator exceeds 63 bits");
  const std::uint64_t q = to_u64(beta.q);
  const auto nums = numerators_u64(beta);
  Certificate C;
  C.N = N;
  C.k = 1;
  C.B = Bitset(static_cast<std::size_t>(N));
  std::vector<std::uint64_t> x(nums.size(), 0);
  for (std::int64_t n = 0; n < N; ++n) {
    if (E.contains_residues(x, q)) C.B.set(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = addmod(x[i], nums[i], q);
  }
  C.S = bh_enumerate(BohrHammingBall(beta, U), N);
  const std::size_t count = C.B.count();
  C.delta = density_of(count, N);
  C.rotation = RotationData{E, beta, U};
  C.provenance = rotation_json(*C.rotation);
  C.provenance["measureE"] = format_rational(E.measure());
  C.provenance["density"] = to_double(C.delta);
  const auto v = verify_certificate(C);
  if (!v.ok) {
    std::ostringstream dump;
    dump << "rotation certificate failed verification (" << v.message << "); provenance " << C.provenance.dump();
    fail(ErrorKind::Internal, dump.str());
  }
  return C;
}

Certificate evens_certificate(std::int64_t N, const Rational& delta) {
  const BandSet E{1, Rational(1, 4), 0};
  const ApproxHammingBall U(TorusPoint::constant(1, Rational(1, 2)), 0, Rational(1, 4));
  Certificate C = rotation_certificate(E, U, Frequency(TorusPoint({Rational(1, 2)}), false, "1/2"), N);
  C.S = {1};
  C.delta = delta;
  C.provenance["S"] = "restricted to {1}";
  if (const auto v = verify_certificate(C); !v.ok) fail(ErrorKind::InvalidInput, "evens certificate: " + v.message);
  return C;
}

// ---- combination --------------------------------------------------------------

namespace {

std::int64_t max_below(const IntSet& S, std::int64_t N) {
  std::int64_t m = 0;
  for (auto s : S)
    if (s > 0 && s < N) m = std::max(m, s);
  return m;
}

// B = { n : n gamma in (E1 x E2) cup ((E1 + 1/2) x (E2 + 1/2)) }, gamma = (beta1, beta2 / m).
std::optional<Bitset> product_rotation(const RotationData& R1, const RotationData& R2, std::int64_t m, std::int64_t N,
                                       const IntSet& S1, std::vector<std::string>& diag) {
  const std::uint64_t q1 = to_u64(R1.beta.q), q2 = to_u64(R2.beta.q);
  if (m % static_cast<std::int64_t>(q1) != 0) {
    diag.push_back("product rotation: m = " + std::to_string(m) + " is not a multiple of q1 = " + std::to_string(q1));
    return std::nullopt;
  }
  const std::int64_t top = max_below(S1, N);
  if (!(Rational(top) < R2.U.eps * m)) {
    diag.push_back("product rotation: max S1 = " + std::to_string(top) + " is not below eps2 * m");
    return std::nullopt;
  }
  const auto n1 = numerators_u64(R1.beta), n2 = numerators_u64(R2.beta);
  // doubled moduli so that the shift by 1/2 stays integral
  const std::uint64_t M1 = 2 * q1, M2 = 2 * q2 * static_cast<std::uint64_t>(m);
  Bitset B(static_cast<std::size_t>(N));
  std::vector<std::uint64_t> x1(n1.size()), x2(n2.size()), h1(n1.size()), h2(n2.size());
  for (std::int64_t n = 0; n < N; ++n) {
    const auto un = static_cast<std::uint64_t>(n);
    for (std::size_t i = 0; i < n1.size(); ++i) {
      x1[i] = mulmod(un % M1, 2 * n1[i], M1);
      h1[i] = addmod(x1[i], q1, M1);
    }
    for (std::size_t i = 0; i < n2.size(); ++i) {
      x2[i] = mulmod(un % M2, 2 * n2[i], M2);
      h2[i] = addmod(x2[i], M2 / 2, M2);
    }
    const bool first = R1.E.contains_residues(x1, M1) && R2.E.contains_residues(x2, M2);
    const bool second = R1.E.contains_residues(h1, M1) && R2.E.contains_residues(h2, M2);
    if (first || second) B.set(static_cast<std::size_t>(n));
  }
  return B;
}

bool try_candidate(const std::string& name, Bitset B, const IntSet& S, std::int64_t N, const Rational& target,
                   nlohmann::json provenance, CombineOutcome& out) {
  Certificate C;
  C.N = N;
  C.k = 1;
  C.B = std::move(B);
  C.S = S;
  C.delta = target;
  C.provenance = std::move(provenance);
  C.provenance["candidate"] = name;
  const auto v = verify_certificate(C);
  if (!v.ok) {
    out.diagnostics.push_back(name + ": " + v.message);
    return false;
  }
  out.ok = true;
  out.cert = std::move(C);
  return true;
}

}  // namespace

CombineOutcome combine_certificates(const Certificate& C1, const Certificate& C2, std::int64_t m) {
  if (m < 1) fail(ErrorKind::InvalidInput, "m must be >= 1");
  if (C1.k != 1 || C2.k != 1) fail(ErrorKind::InvalidInput, "combination needs k = 1 certificates");
  if (C1.N != C2.N) fail(ErrorKind::InvalidInput, "certificates must share the horizon N");
  for (const auto* C : {&C1, &C2})
    if (const auto v = verify_certificate(*C); !v.ok) fail(ErrorKind::InvalidInput, "input certificate invalid: " + v.message);
  const std::int64_t N = C1.N;
  CombineOutcome out;
  out.m = m;
  const IntSet S = set_union(C1.S, dilate(C2.S, m));
  const Rational target = 2 * C1.delta * C2.delta;
  const nlohmann::json base = {{"kind", "combined"},
                               {"m", m},
                               {"target", format_rational(target)},
                               {"left", C1.provenance},
                               {"right", C2.provenance}};

  if (C1.rotation && C2.rotation) {
    if (auto B = product_rotation(*C1.rotation, *C2.rotation, m, N, C1.S, out.diagnostics)) {
      auto prov = base;
      prov["construction"] = "product rotation (E1 x E2) cup ((E1 + y1) x (E2 + y2))";
      if (try_candidate("product-rotation", std::move(*B), S, N, target, prov, out)) return out;
    }
  } else {
    out.diagnostics.push_back("product rotation: needs rotation data on both sides");
  }
  if (try_candidate("B1", C1.B, S, N, target, base, out)) return out;
  if (try_candidate("B2", C2.B, S, N, target, base, out)) return out;
  Bitset B(static_cast<std::size_t>(N));
  for (std::int64_t n = 0; n < N; ++n)
    if (C1.B.test(static_cast<std::size_t>(n)) && C2.B.test(static_cast<std::size_t>(n / m)))
      B.set(static_cast<std::size_t>(n));
  if (try_candidate("B1 and floor(n/m) in B2", std::move(B), S, N, target, base, out)) return out;

  IntSet live;
  for (auto s : S)
    if (s > 0 && s < N) live.push_back(s);
  if (!live.empty() && live.back() <= 20 && N <= 1'000'000 &&
      (static_cast<std::uint64_t>(N) << live.back()) <= (std::uint64_t{1} << 30)) {
    const std::size_t best = max_density_avoiding(live, N);
    if (Rational(BigInt(static_cast<unsigned long>(best))) < target * N)
      out.diagnostics.push_back("exact bound: every admissible B has |B| <= " + std::to_string(best) + " < " +
                                std::to_string(to_double(target * N)) + ", so no certificate exists at this m");
  }
  return out;
}

CombineOutcome search_min_m(const Certificate& C1, const Certificate& C2, std::int64_t m_max) {
  if (m_max < 1) fail(ErrorKind::InvalidInput, "mMax must be >= 1");
  if (C2.S.empty()) {
    auto out = combine_certificates(C1, C2, 1);
    if (out.ok) return out;
    fail(ErrorKind::Exhausted, "S2 empty but C1 does not meet the combined density target");
  }
  std::ostringstream all;
  for (std::int64_t m = 2; m <= m_max; ++m) {
    auto out = combine_certificates(C1, C2, m);
    if (out.ok) return out;
    all << "m = " << m << ":";
    for (const auto& d : out.diagnostics) all << " [" << d << "]";
    all << "\n";
  }
  fail(ErrorKind::Exhausted, "no m in [2, " + std::to_string(m_max) + "] combines\n" + all.str());
}

std::size_t max_density_avoiding(const IntSet& S, std::int64_t N) {
  if (N < 0) fail(ErrorKind::InvalidInput, "N must be >= 0");
  std::size_t w = 0;
  for (auto s : S) {
    if (s == 0) return 0;
    const auto a = static_cast<std::size_t>(s < 0 ? -s : s);
    if (a < static_cast<std::size_t>(N)) w = std::max(w, a);
  }
  if (w > 20) fail(ErrorKind::InvalidInput, "max S must be <= 20 for the exact bound");
  if (w == 0) return static_cast<std::size_t>(N);
  std::uint64_t forbid = 0;
  for (auto s : S) {
    const auto a = static_cast<std::size_t>(s < 0 ? -s : s);
    if (a <= w) forbid |= std::uint64_t{1} << (a - 1);
  }
  // state bit i set <=> position n - 1 - i was chosen
  const std::size_t states = std::size_t{1} << w;
  const std::uint64_t full = states - 1;
  std::vector<long> dp(states, -1), next(states);
  dp[0] = 0;
  for (std::int64_t n = 0; n < N; ++n) {
    std::fill(next.begin(), next.end(), -1);
    for (std::size_t mask = 0; mask < states; ++mask) {
      if (dp[mask] < 0) continue;
      const std::size_t skip = (mask << 1) & full;
      next[skip] = std::max(next[skip], dp[mask]);
      if ((mask & forbid) == 0) {
        const std::size_t take = ((mask << 1) | 1) & full;
        next[take] = std::max(next[take], dp[mask] + 1);
      }
    }
    dp.swap(next);
  }
  return static_cast<std::size_t>(*std::max_element(dp.begin(), dp.end()));
}

Certificate square_certificate(const Certificate& C, const std::optional<Bitset>& B) {
  Certificate out;
  out.N = C.N;
  out.k = C.k;
  out.B = B ? *B : C.B;
  out.S = squares(C.S);
  out.delta = C.delta;
  out.provenance = {{"kind", "square"}, {"from", C.provenance}};
  if (B) out.provenance["B"] = "caller supplied";
  const auto v = verify_certificate(out);
  if (!v.ok) fail(ErrorKind::NotCombinable, "square certificate: " + v.message);
  return out;
}

// ---- files ----------------------------------------------------------------------

nlohmann::json to_json(const BandSet& E) {
  return {{"r", E.r}, {"a", format_rational(E.a)}, {"t", E.t}};
}

BandSet band_from_json(const nlohmann::json& j) {
  BandSet E{j.at("r").get<std::size_t>(), parse_rational(j.at("a").get<std::string>()), j.at("t").get<std::size_t>()};
  if (E.a <= 0 || E.a > Rational(1, 2)) fail(ErrorKind::InvalidInput, "band radius must lie in (0, 1/2]");
  return E;
}

nlohmann::json to_json(const BandWitness& W) {
  return {{"construction", "band set E = {w_a <= t} with a = 1/4 - eps (our realization)"},
          {"k", W.k},
          {"eps", format_rational(W.eps)},
          {"E", to_json(W.E)},
          {"U", to_json(W.U)},
          {"measureE", format_rational(W.measure)},
          {"measureE_float", to_double(W.measure)},
          {"eta", format_rational(W.eta)},
          {"counting_precondition", W.E.r > 2 * W.E.t + W.k},
          {"mc_samples", W.mc_samples},
          {"mc_hits", W.mc_hits}};
}

std::string certificate_to_string(const Certificate& C) {
  nlohmann::json header = {{"version", 1},
                           {"N", C.N},
                           {"k", C.k},
                           {"deltaPrime", format_rational(C.delta)},
                           {"S", C.S},
                           {"provenance", C.provenance}};
  const std::string bytes = C.B.to_bytes();
  std::string payload(b64::encoded_size(bytes.size()), '\0');
  payload.resize(b64::encode(payload.data(), bytes.data(), bytes.size()));
  return header.dump() + "\n" + payload + "\n";
}

Certificate certificate_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string head, payload;
  if (!std::getline(in, head)) fail(ErrorKind::InvalidInput, "certificate file has no header");
  std::getline(in, payload);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(head);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidInput, std::string("bad certificate header: ") + e.what());
  }
  if (h.value("version", 0) != 1) fail(ErrorKind::InvalidInput, "unsupported certificate version");
  Certificate C;
  C.N = h.at("N").get<std::int64_t>();
  C.k = h.at("k").get<std::size_t>();
  C.delta = parse_rational(h.at("deltaPrime").get<std::string>());
  C.S = normalize_set(h.at("S").get<IntSet>());
  C.provenance = h.value("provenance", nlohmann::json::object());
  std::string bytes(b64::decoded_size(payload.size()), '\0');
  const auto [written, read] = b64::decode(bytes.data(), payload.data(), payload.size());
  // the decoder stops at padding
  if (payload.find_first_not_of('=', read) != std::string::npos) fail(ErrorKind::InvalidInput, "bad base64 payload");
  bytes.resize(written);
  C.B = Bitset::from_bytes(static_cast<std::size_t>(C.N), bytes);
  if (C.provenance.value("kind", "") == "rotation")
    C.rotation = RotationData{band_from_json(C.provenance.at("E")), frequency_from(C.provenance.at("beta")),
                              ball_from_json(C.provenance.at("U"))};
  return C;
}

void write_certificate(const std::string& path, const Certificate& C) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidInput, "cannot write " + tmp);
    out << certificate_to_string(C);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorKind::InvalidInput, "cannot rename onto " + path);
}

Certificate read_certificate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::InvalidInput, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return certificate_from_string(ss.str());
}

}  // namespace ergolab
