#include "ergolab/bohr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergolab/parallel.hpp"

namespace ergolab {

Frequency::Frequency(TorusPoint beta_, bool generating_, std::string label_)
    : beta(std::move(beta_)), generating(generating_), label(std::move(label_)) {
  if (beta.dim() == 0) fail(ErrorKind::InvalidInput, "frequency needs dim >= 1");
  q = beta.common_denominator();
}

std::vector<BigInt> Frequency::numerators() const {
  std::vector<BigInt> out;
  for (const auto& c : beta.coords()) out.push_back(c.get_num() * (q / c.get_den()));
  return out;
}

namespace {

BigInt isqrt(const BigInt& x) {
  BigInt r;
  mpz_sqrt(r.get_mpz_t(), x.get_mpz_t());
  return r;
}

std::vector<Rational> convergents_from(const std::vector<BigInt>& quotients) {
  std::vector<Rational> out;
  BigInt h1 = 1, h2 = 0, k1 = 0, k2 = 1;
  for (const auto& a : quotients) {
    BigInt h = a * h1 + h2;
    BigInt k = a * k1 + k2;
    out.push_back(make_rational(h, k));
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
  }
  return out;
}

// "sqrtD" -> D, "golden" -> 0
unsigned long parse_name(const std::string& name) {
  if (name == "golden" || name == "phi") return 0;
  if (name.rfind("sqrt", 0) == 0) {
    try {
      const unsigned long D = std::stoul(name.substr(4));
      const auto s = static_cast<unsigned long>(std::llround(std::sqrt(static_cast<double>(D))));
      if (D >= 2 && s * s != D) return D;
    } catch (const std::exception&) {
    }
  }
  fail(ErrorKind::InvalidInput, "unknown irrational '" + name + "' (use sqrtD or golden)");
}

}  // namespace

std::vector<Rational> sqrt_convergents(unsigned long D, std::size_t count) {
  const BigInt a0 = isqrt(BigInt(D));
  if (a0 * a0 == D) fail(ErrorKind::InvalidInput, "sqrt of a perfect square is rational");
  std::vector<BigInt> quotients{a0};
  BigInt m = 0, d = 1, a = a0;
  while (quotients.size() < count) {
    m = d * a - m;
    d = (BigInt(D) - m * m) / d;
    a = (a0 + m) / d;
    quotients.push_back(a);
  }
  quotients.resize(count);
  return convergents_from(quotients);
}

std::vector<Rational> golden_convergents(std::size_t count) {
  return convergents_from(std::vector<BigInt>(count, BigInt(1)));
}

Rational convergent_below(const std::string& name, const BigInt& max_den) {
  if (max_den < 1) fail(ErrorKind::InvalidInput, "max denominator must be >= 1");
  const unsigned long D = parse_name(name);
  const auto list = D == 0 ? golden_convergents(256) : sqrt_convergents(D, 256);
  Rational best = list.front();
  for (const auto& c : list) {
    if (c.get_den() > max_den) break;
    best = c;
  }
  return best;
}

Rational lattice_approximation(const std::string& name, const BigInt& q) {
  if (q < 1) fail(ErrorKind::InvalidInput, "lattice denominator must be >= 1");
  const unsigned long D = parse_name(name);
  if (D == 0) return make_rational((q + isqrt(5 * q * q)) / 2, q);
  return make_rational(isqrt(BigInt(D) * q * q), q);
}

Frequency convergent_frequency(const std::vector<std::string>& names, const BigInt& max_den) {
  std::vector<Rational> coords;
  std::string label;
  for (const auto& n : names) {
    coords.push_back(convergent_below(n, max_den));
    label += (label.empty() ? "" : ",") + n;
  }
  return Frequency(TorusPoint(coords), true, "convergents(" + label + ")");
}

Frequency lattice_frequency(const std::vector<std::string>& names, const BigInt& q) {
  std::vector<Rational> coords;
  std::string label;
  for (const auto& n : names) {
    coords.push_back(lattice_approximation(n, q));
    label += (label.empty() ? "" : ",") + n;
  }
  return Frequency(TorusPoint(coords), true, "lattice(" + label + ")");
}

Frequency parse_frequency(const std::string& text, const BigInt& max_den, bool generating) {
  std::vector<Rational> coords;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) fail(ErrorKind::InvalidInput, "empty frequency entry");
    const bool literal = std::isdigit(static_cast<unsigned char>(item[0])) || item[0] == '-';
    coords.push_back(literal ? parse_rational(item) : convergent_below(item, max_den));
  }
  return Frequency(TorusPoint(coords), generating, text);
}

ResidueWindows::ResidueWindows(const TorusPoint& center, const Rational& width, std::uint64_t q) : q_(q) {
  if (q == 0) fail(ErrorKind::InvalidInput, "modulus must be positive");
  check_width(width, "window width");
  const Rational Q{BigInt(static_cast<unsigned long>(q))};
  for (const auto& c : center.coords()) {
    // integers a with q(c-w) < a < q(c+w)
    const Rational left = Q * (c - width);
    const Rational right = Q * (c + width);
    const BigInt lo = floor_of(left) + 1;
    BigInt hi = floor_of(right);
    if (Rational(hi) == right) hi -= 1;
    BigInt len = hi - lo + 1;
    if (len < 0) len = 0;
    if (len > Q.get_num()) len = Q.get_num();
    BigInt lo_mod = lo % BigInt(static_cast<unsigned long>(q));
    if (lo_mod < 0) lo_mod += static_cast<unsigned long>(q);
    lo_.push_back(to_u64(lo_mod));
    len_.push_back(to_u64(len));
  }
}

BohrHammingBall::BohrHammingBall(Frequency freq_, ApproxHammingBall ball_)
    : freq(std::move(freq_)), ball(std::move(ball_)) {
  if (freq.dim() != ball.r) fail(ErrorKind::InvalidInput, "frequency and ball dimensions differ");
}

BohrEvaluator::BohrEvaluator(const BohrHammingBall& bh) : k_(bh.ball.k) {
  if (!fits_u63(bh.freq.q)) fail(ErrorKind::UnsupportedModulus, "denominator exceeds 63 bits: " + bh.freq.q.get_str());
  q_ = to_u64(bh.freq.q);
  for (const auto& n : bh.freq.numerators()) nums_.push_back(to_u64(n));
  windows_ = ResidueWindows(bh.ball.center, bh.ball.eps, q_);
}

bool BohrEvaluator::contains_residue(std::uint64_t n) const {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < nums_.size(); ++i)
    if (!windows_.inside(i, mulmod(n, nums_[i], q_)) && ++bad > k_) return false;
  return true;
}

bool bh_contains_exact(const BohrHammingBall& bh, const BigInt& n) {
  return ball_contains(bh.ball, n * bh.freq.beta);
}

bool bh_contains(const BohrHammingBall& bh, const BigInt& n) {
  if (!fits_u63(bh.freq.q)) return bh_contains_exact(bh, n);
  BigInt r = n % bh.freq.q;
  if (r < 0) r += bh.freq.q;
  return BohrEvaluator(bh).contains_residue(to_u64(r));
}

namespace {

template <typename Pred>
IntSet enumerate_parallel(std::int64_t N, Pred&& pred) {
  const auto count = static_cast<std::size_t>(std::max<std::int64_t>(N, 0));
  std::vector<IntSet> parts(chunk_count(count));
  parallel_chunks(count, [&](std::size_t w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto n = static_cast<std::int64_t>(i) + 1;
      if (pred(static_cast<std::uint64_t>(n))) parts[w].push_back(n);
    }
  });
  IntSet out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

SqrtSet sqrt_set_enumerate(const BohrHammingBall& bh, std::int64_t N) {
  if (N < 1) fail(ErrorKind::InvalidInput, "N must be >= 1");
  const BohrEvaluator eval(bh);
  const std::uint64_t q = eval.modulus();
  SqrtSet out;
  out.N = N;
  out.elems = enumerate_parallel(N, [&](std::uint64_t n) {
    const std::uint64_t r = n % q;
    return eval.contains_residue(mulmod(r, r, q));
  });
  out.density = static_cast<double>(out.elems.size()) / static_cast<double>(N);
  return out;
}

IntSet bh_enumerate(const BohrHammingBall& bh, std::int64_t N) {
  if (N < 1) fail(ErrorKind::InvalidInput, "N must be >= 1");
  const BohrEvaluator eval(bh);
  const std::uint64_t q = eval.modulus();
  return enumerate_parallel(N, [&](std::uint64_t n) { return eval.contains_residue(n % q); });
}

IntSet normalize_set(IntSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

IntSet dilate(const IntSet& s, std::int64_t m) {
  if (m == 0) fail(ErrorKind::InvalidInput, "dilation factor must be nonzero");
  IntSet out;
  out.reserve(s.size());
  for (auto v : s) out.push_back(v * m);
  return normalize_set(std::move(out));
}

IntSet divide(const IntSet& s, std::int64_t m) {
  if (m == 0) fail(ErrorKind::InvalidInput, "divisor must be nonzero");
  IntSet out;
  for (auto v : s)
    if (v % m == 0) out.push_back(v / m);
  return normalize_set(std::move(out));
}

IntSet squares(const IntSet& s) {
  IntSet out;
  out.reserve(s.size());
  for (auto v : s) {
    if (v > 3037000499LL || v < -3037000499LL) fail(ErrorKind::InvalidInput, "square overflows 64 bits");
    out.push_back(v * v);
  }
  return normalize_set(std::move(out));
}

IntSet set_union(const IntSet& a, const IntSet& b) {
  IntSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

DensityReport density_vs_measure(const BohrHammingBall& bh, std::int64_t N) {
  if (!bh.proper()) fail(ErrorKind::InvalidInput, "density diagnostic needs a proper (generating) ball");
  if (N < 1000) fail(ErrorKind::InvalidInput, "density diagnostic needs N >= 1000");
  if (BigInt(static_cast<long>(N)) * 100 > bh.freq.q)
    fail(ErrorKind::InvalidInput, "density diagnostic needs N <= q/100 (q = " + bh.freq.q.get_str() + ")");
  DensityReport out;
  out.density = sqrt_set_enumerate(bh, N).density;
  out.measure = ball_measure(bh.ball);
  out.gap = std::abs(out.density - out.measure.get_d());
  return out;
}

nlohmann::json set_to_json(const IntSet& s, std::int64_t N) {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == s[j - 1] + 1) ++j;
    runs.push_back({s[i], static_cast<std::int64_t>(j - i)});
    i = j;
  }
  return {{"N", N}, {"elems", runs}};
}

IntSet set_from_json(const nlohmann::json& j) {
  IntSet out;
  for (const auto& run : j.at("elems")) {
    const auto start = run.at(0).get<std::int64_t>();
    const auto len = run.at(1).get<std::int64_t>();
    if (len < 0) fail(ErrorKind::InvalidInput, "negative run length");
    for (std::int64_t i = 0; i < len; ++i) out.push_back(start + i);
  }
  return normalize_set(std::move(out));
}

}  // namespace ergolab
