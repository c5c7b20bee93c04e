#include "ergolab/weyl.hpp"

#include <cmath>
#include <numbers>

#include "ergolab/roth.hpp"

namespace ergolab {

WeylSystem::WeylSystem(Frequency alpha_) : d(alpha_.dim()), alpha(std::move(alpha_)) {}

PointPair weyl_step(const WeylSystem& W, const TorusPoint& x, const TorusPoint& y) {
  if (x.dim() != W.d || y.dim() != W.d) fail(ErrorKind::InvalidInput, "point dimension does not match system");
  return {x + W.alpha.beta, y + x};
}

PointPair orbit(const WeylSystem& W, const TorusPoint& x, const TorusPoint& y, const BigInt& n) {
  if (x.dim() != W.d || y.dim() != W.d) fail(ErrorKind::InvalidInput, "point dimension does not match system");
  const BigInt pairs = n * (n - 1) / 2;
  return {x + n * W.alpha.beta, y + n * x + pairs * W.alpha.beta};
}

Rational eigenvalue_phase(const WeylSystem& W, const Character& chi) {
  return character_phase(chi, W.alpha.beta);
}

TrigPoly kronecker_projection(const TrigPoly& f) {
  TrigPoly out;
  for (const auto& [key, c] : f)
    if (key.psi.is_trivial()) out.emplace(key, c);
  return out;
}

double l2_norm_squared(const TrigPoly& f) {
  double acc = 0.0;
  for (const auto& [key, c] : f) acc += std::norm(c);
  return acc;
}

Complex evaluate(const TrigPoly& f, const TorusPoint& x, const TorusPoint& y) {
  Complex acc = 0.0;
  for (const auto& [key, c] : f) acc += c * character_value(key.chi, x) * character_value(key.psi, y);
  return acc;
}

namespace {
Character negate(const Character& c) {
  Character out = c;
  for (auto& v : out.n) v = -v;
  return out;
}
}  // namespace

bool is_real(const TrigPoly& f, double tol) {
  for (const auto& [key, c] : f) {
    const auto it = f.find({negate(key.chi), negate(key.psi)});
    const Complex partner = it == f.end() ? Complex(0.0) : it->second;
    if (std::abs(partner - std::conj(c)) > tol) return false;
  }
  return true;
}

nlohmann::json to_json(const TrigPoly& f) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [key, c] : f)
    j.push_back({{"a", key.chi.n}, {"b", key.psi.n}, {"re", c.real()}, {"im", c.imag()}});
  return j;
}

TrigPoly trig_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::InvalidInput, "trig polynomial must be a JSON list");
  TrigPoly f;
  std::size_t d = 0;
  for (const auto& e : j) {
    BiCharacter key{Character(e.at("a").get<std::vector<std::int64_t>>()),
                    Character(e.at("b").get<std::vector<std::int64_t>>())};
    if (key.chi.dim() != key.psi.dim() || (d != 0 && key.chi.dim() != d))
      fail(ErrorKind::InvalidInput, "inconsistent trig polynomial dimensions");
    d = key.chi.dim();
    f[key] += Complex(e.at("re").get<double>(), e.value("im", 0.0));
  }
  return f;
}

namespace {

std::uint64_t residue(std::int64_t v, std::uint64_t q) {
  const auto Q = static_cast<__int128>(q);
  __int128 r = static_cast<__int128>(v) % Q;
  if (r < 0) r += Q;
  return static_cast<std::uint64_t>(r);
}

std::uint64_t dot_mod(const Character& c, const std::vector<std::uint64_t>& p, std::uint64_t q) {
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) acc = addmod(acc, mulmod(residue(c.n[i], q), p[i], q), q);
  return acc;
}

std::uint64_t pairs_mod(std::uint64_t n, std::uint64_t q) {
  const unsigned __int128 v = static_cast<unsigned __int128>(n) * (n == 0 ? 0 : n - 1) / 2;
  return static_cast<std::uint64_t>(v % q);
}

std::vector<std::uint64_t> alpha_numerators(const WeylSystem& W, std::uint64_t& q) {
  if (!fits_u63(W.alpha.q)) fail(ErrorKind::UnsupportedModulus, "alpha denominator exceeds 63 bits");
  q = to_u64(W.alpha.q);
  std::vector<std::uint64_t> p;
  for (const auto& n : W.alpha.numerators()) p.push_back(to_u64(n));
  return p;
}

}  // namespace

TripleCorrelation::TripleCorrelation(const WeylSystem& W, const TrigPoly& f) {
  const auto p = alpha_numerators(W, q_);
  struct Term {
    const BiCharacter* key;
    Complex c;
    std::uint64_t A, B;
  };
  std::vector<Term> terms;
  for (const auto& [key, c] : f) {
    if (key.chi.dim() != W.d || key.psi.dim() != W.d) fail(ErrorKind::InvalidInput, "trig polynomial dimension mismatch");
    terms.push_back({&key, c, dot_mod(key.chi, p, q_), dot_mod(key.psi, p, q_)});
  }
  const std::size_t d = W.d;
  for (const auto& t1 : terms)
    for (const auto& t2 : terms) {
      std::vector<std::int64_t> slope(d), b0(d);
      bool steady = true;
      for (std::size_t i = 0; i < d; ++i) {
        slope[i] = t1.key->psi.n[i] + 2 * t2.key->psi.n[i];
        b0[i] = -(t1.key->psi.n[i] + t2.key->psi.n[i]);
        steady = steady && slope[i] == 0;
      }
      const std::uint64_t lin = addmod(t1.A, mulmod(2, t2.A, q_), q_);
      for (const auto& t0 : terms) {
        if (t0.key->psi.n != b0) continue;
        // x-frequency a0 + a1 + a2 + n * slope must vanish
        std::int64_t n = -1;
        bool ok = true;
        for (std::size_t i = 0; i < d && ok; ++i) {
          const std::int64_t s = t0.key->chi.n[i] + t1.key->chi.n[i] + t2.key->chi.n[i];
          if (slope[i] == 0) {
            ok = s == 0;
          } else if (s % slope[i] != 0) {
            ok = false;
          } else {
            const std::int64_t cand = -s / slope[i];
            ok = cand >= 0 && (n < 0 || n == cand);
            n = cand;
          }
        }
        if (!ok) continue;
        const Triple tr{t0.c * t1.c * t2.c, lin, t1.B, t2.B};
        if (steady) steady_.push_back(tr);
        else sporadic_[static_cast<std::uint64_t>(n)].push_back(tr);
      }
    }
}

Complex TripleCorrelation::phase_sum(const std::vector<Triple>& triples, std::uint64_t n) const {
  const std::uint64_t nq = n % q_;
  const std::uint64_t c1 = pairs_mod(n, q_);
  const std::uint64_t c2 = static_cast<std::uint64_t>(static_cast<unsigned __int128>(n) * (2 * n - 1) % q_);
  Complex acc = 0.0;
  for (const auto& t : triples) {
    const std::uint64_t ph = addmod(addmod(mulmod(nq, t.lin, q_), mulmod(c1, t.b1, q_), q_), mulmod(c2, t.b2, q_), q_);
    const double angle = 2.0 * std::numbers::pi * (static_cast<double>(ph) / static_cast<double>(q_));
    acc += t.coeff * Complex(std::cos(angle), std::sin(angle));
  }
  return acc;
}

Complex TripleCorrelation::at(std::uint64_t n) const {
  Complex v = phase_sum(steady_, n);
  if (const auto it = sporadic_.find(n); it != sporadic_.end()) v += phase_sum(it->second, n);
  return v;
}

Complex l3_closed_form(const TrigPoly& f) {
  std::map<Character, Complex> proj;
  for (const auto& [key, c] : f)
    if (key.psi.is_trivial()) proj[key.chi] += c;
  Complex acc = 0.0;
  for (const auto& [a, c] : proj) {
    Character m2 = a;
    for (auto& v : m2.n) v *= -2;
    const auto it = proj.find(m2);
    if (it != proj.end()) acc += c * it->second * c;
  }
  return acc;
}

CylinderWeight::CylinderWeight(const Cylinder& V, const Frequency& beta, std::int64_t ell, Rational norm)
    : idx_(V.indices), norm_(std::move(norm)) {
  if (beta.dim() != V.r) fail(ErrorKind::InvalidInput, "weight frequency and cylinder dimensions differ");
  if (ell == 0) fail(ErrorKind::InvalidInput, "ell must be nonzero");
  if (norm_ <= 0) fail(ErrorKind::InvalidInput, "weight normalization must be positive");
  if (!fits_u63(beta.q)) fail(ErrorKind::UnsupportedModulus, "beta denominator exceeds 63 bits");
  q_ = to_u64(beta.q);
  const std::uint64_t l = residue(ell, q_);
  ell2_ = mulmod(l, l, q_);
  for (const auto& n : beta.numerators()) nums_.push_back(to_u64(n));
  windows_ = ResidueWindows(V.center, V.eta, q_);
}

bool CylinderWeight::hit(std::uint64_t n) const {
  const std::uint64_t r = n % q_;
  const std::uint64_t s = mulmod(mulmod(r, r, q_), ell2_, q_);
  for (auto i : idx_)
    if (!windows_.inside(i, mulmod(s, nums_[i], q_))) return false;
  return true;
}

std::vector<std::int64_t> checkpoint_ladder(std::int64_t N) {
  std::vector<std::int64_t> out;
  for (std::int64_t c = 10; c < N; c *= 10) out.push_back(c);
  out.push_back(N);
  return out;
}

AveragesTrace weighted_average(const WeylSystem& W, const TrigPoly& f, const CylinderWeight* weight, std::int64_t N) {
  if (N < 1) fail(ErrorKind::InvalidInput, "N must be >= 1");
  const TripleCorrelation corr(W, f);
  const double scale = weight ? 1.0 / weight->norm().get_d() : 1.0;
  AveragesTrace trace;
  trace.final_N = N;
  const auto ladder = checkpoint_ladder(N);
  std::size_t next = 0;
  // Kahan summation keeps the float layer reproducible to ~1e-15
  double sum = 0.0, carry = 0.0;
  for (std::int64_t n = 1; n <= N; ++n) {
    if (!weight || weight->hit(static_cast<std::uint64_t>(n))) {
      const double term = corr.at(static_cast<std::uint64_t>(n)).real() * scale - carry;
      const double t = sum + term;
      carry = (t - sum) - term;
      sum = t;
    }
    if (n == ladder[next]) {
      trace.checkpoints.push_back({n, sum / static_cast<double>(n)});
      ++next;
    }
  }
  trace.metadata = {{"alpha", to_json(W.alpha.beta)},
                    {"q_alpha", W.alpha.q.get_str()},
                    {"model", W.periodic_model() ? "periodic model" : "convergent model"}};
  return trace;
}

AveragesTrace l3_average(const WeylSystem& W, const TrigPoly& f, std::int64_t N) {
  return weighted_average(W, f, nullptr, N);
}

RotationModel::RotationModel(std::uint64_t q, std::vector<std::uint64_t> step) : q_(q), step_(std::move(step)) {
  if (q == 0 || step_.empty()) fail(ErrorKind::InvalidInput, "rotation model needs q >= 1 and d >= 1");
  size_ = Grid<char>(static_cast<int>(step_.size()), q).size();
  for (auto& v : step_) v %= q_;
}

std::size_t RotationModel::power(std::size_t state, std::uint64_t n) const {
  const std::uint64_t nq = n % q_;
  std::size_t out = 0, mult = 1;
  for (std::size_t i = step_.size(); i-- > 0;) {
    const std::uint64_t digit = state % q_;
    state /= q_;
    out += mult * addmod(digit, mulmod(nq, step_[i], q_), q_);
    mult *= q_;
  }
  return out;
}

WeylGridModel::WeylGridModel(const WeylSystem& W) {
  a_ = alpha_numerators(W, q_);
  size_ = Grid<char>(static_cast<int>(2 * a_.size()), q_).size();
}

std::size_t WeylGridModel::power(std::size_t state, std::uint64_t n) const {
  const std::size_t d = a_.size();
  std::vector<std::uint64_t> digits(2 * d);
  for (std::size_t i = 2 * d; i-- > 0;) {
    digits[i] = state % q_;
    state /= q_;
  }
  const std::uint64_t nq = n % q_;
  const std::uint64_t pairs = pairs_mod(n, q_);
  for (std::size_t i = 0; i < d; ++i) {
    const std::uint64_t x = digits[i];
    digits[i] = addmod(x, mulmod(nq, a_[i], q_), q_);
    digits[d + i] = addmod(addmod(digits[d + i], mulmod(nq, x, q_), q_), mulmod(pairs, a_[i], q_), q_);
  }
  std::size_t out = 0;
  for (auto v : digits) out = out * q_ + v;
  return out;
}

namespace {

BigInt from_i128(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  BigInt hi(static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64)));
  BigInt lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
  BigInt out = hi * BigInt("18446744073709551616") + lo;
  return neg ? BigInt(-out) : out;
}

}  // namespace

std::vector<Rational> triple_integrals(const FiniteSystem& sys, const ExactGrid& f, std::uint64_t count) {
  if (f.size() != sys.size()) fail(ErrorKind::InvalidInput, "function does not live on the system's state space");
  BigInt D = 1;
  for (const auto& v : f.values()) D = lcm(D, v.get_den());
  std::vector<std::int64_t> h(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const BigInt scaled = f[i].get_num() * (D / f[i].get_den());
    if (!scaled.fits_slong_p() || abs(scaled) > BigInt(1L << 20))
      fail(ErrorKind::InvalidInput, "function values need a common denominator below 2^20");
    h[i] = scaled.get_si();
  }
  const Rational denom = Rational(D * D * D) * Rational(static_cast<long>(f.size()));
  std::vector<Rational> out;
  out.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    __int128 acc = 0;
    for (std::size_t x = 0; x < f.size(); ++x) {
      if (h[x] == 0) continue;
      const std::int64_t h1 = h[sys.power(x, n)];
      if (h1 == 0) continue;
      acc += static_cast<__int128>(h[x]) * h1 * h[sys.power(x, 2 * n)];
    }
    Rational v(from_i128(acc));
    v /= denom;
    out.push_back(v);
  }
  return out;
}

Rational triple_intersection(const FiniteSystem& sys, const std::vector<bool>& A, std::uint64_t n) {
  if (A.size() != sys.size()) fail(ErrorKind::InvalidInput, "set does not live on the system's state space");
  long hits = 0;
  for (std::size_t x = 0; x < A.size(); ++x)
    if (A[x] && A[sys.power(x, n)] && A[sys.power(x, 2 * n)]) ++hits;
  return make_rational(hits, static_cast<long>(A.size()));
}

TripleMax min_triple_intersection(const FiniteSystem& sys, const std::vector<bool>& A, const IntSet& S,
                                  std::int64_t N) {
  TripleMax best;
  bool any = false;
  for (auto n : S) {
    if (n < 0 || n > N) continue;
    const Rational v = triple_intersection(sys, A, static_cast<std::uint64_t>(n));
    if (!any || v > best.value) {
      best = {n, v};
      any = true;
    }
  }
  if (!any) fail(ErrorKind::EmptyDomain, "S has no element in [0, N]");
  return best;
}

WeightProfile weight_profile(std::uint64_t base, const CylinderWeight& weight) {
  if (base == 0) fail(ErrorKind::InvalidInput, "base period must be positive");
  WeightProfile w;
  w.base = base;
  const BigInt P = lcm(BigInt(static_cast<unsigned long>(base)), BigInt(static_cast<unsigned long>(weight.modulus())));
  if (P > BigInt(1UL << 32)) fail(ErrorKind::InvalidInput, "joint period " + P.get_str() + " too long to scan");
  w.period = to_u64(P);
  w.hits.assign(base, 0);
  for (std::uint64_t n = 0; n < w.period; ++n)
    if (weight.hit(n)) {
      ++w.hits[n % base];
      ++w.total;
    }
  return w;
}

PeriodicAverages periodic_averages(const WeylGridModel& model, const std::vector<Rational>& integrals,
                                   const ExactGrid& f, const CylinderWeight& weight,
                                   const std::optional<Rational>& norm) {
  const std::uint64_t base = model.period();
  if (integrals.size() != base) fail(ErrorKind::InvalidInput, "need one integral per residue of the model period");
  const auto profile = weight_profile(base, weight);
  PeriodicAverages out;
  out.period = profile.period;
  Rational weighted = 0, plain = 0;
  for (std::uint64_t n = 0; n < base; ++n) {
    plain += integrals[n];
    if (profile.hits[n]) weighted += integrals[n] * static_cast<unsigned long>(profile.hits[n]);
  }
  const Rational g_norm = norm ? *norm : weight.norm();
  out.weighted = weighted / (Rational(static_cast<unsigned long>(profile.period)) * g_norm);
  out.l3_period = plain / Rational(static_cast<unsigned long>(base));
  const auto fp = kronecker_projection(f);
  out.closed_form = roth_form_direct(fp, fp, fp);
  return out;
}

PeriodicAverages periodic_averages(const WeylGridModel& model, const ExactGrid& f, const CylinderWeight& weight,
                                   const std::optional<Rational>& norm) {
  return periodic_averages(model, triple_integrals(model, f, model.period()), f, weight, norm);
}

}  // namespace ergolab
