#include "ergolab/harmonic.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

#include "ergolab/parallel.hpp"

namespace ergolab {

bool Character::is_trivial() const {
  return std::all_of(n.begin(), n.end(), [](std::int64_t v) { return v == 0; });
}

Rational character_phase(const Character& chi, const TorusPoint& s) {
  if (chi.dim() != s.dim()) fail(ErrorKind::InvalidInput, "character/point dimension mismatch");
  Rational phase = 0;
  for (std::size_t i = 0; i < chi.dim(); ++i)
    if (chi.n[i] != 0) phase += Rational(BigInt(static_cast<long>(chi.n[i]))) * s[i];
  return frac(phase);
}

Complex character_value(const Character& chi, const TorusPoint& s) {
  const auto u = unit_phase(character_phase(chi, s));
  return {u.cos_v, u.sin_v};
}

GridFunction to_complex(const ExactGrid& f) {
  GridFunction out(f.dim(), f.modulus());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = Complex(f[i].get_d(), 0.0);
  return out;
}

std::int64_t centered(std::int64_t n, std::uint64_t q) {
  const auto Q = static_cast<std::int64_t>(q);
  std::int64_t r = ((n % Q) + Q) % Q;
  if (2 * r > Q) r -= Q;
  return r;
}

namespace {

std::vector<Complex> root_table(std::uint64_t q, int sign) {
  std::vector<Complex> roots(q);
  for (std::uint64_t j = 0; j < q; ++j) {
    const auto u = unit_phase(make_rational(static_cast<long>(j), static_cast<long>(q)));
    roots[j] = Complex(u.cos_v, sign * u.sin_v);
  }
  return roots;
}

GridFunction direct_transform(const GridFunction& f, int sign, bool scale) {
  const std::uint64_t q = f.modulus();
  const std::size_t size = f.size();
  const int d = f.dim();
  std::vector<std::int64_t> coords(size * d);
  for (std::size_t i = 0; i < size; ++i) {
    const auto c = f.coords(i);
    std::copy(c.begin(), c.end(), coords.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const auto roots = root_table(q, sign);
  const double norm = scale ? std::pow(static_cast<double>(q), -d) : 1.0;
  GridFunction out(d, q);
  parallel_chunks(size, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      Complex acc = 0.0;
      const std::int64_t* nc = &coords[n * d];
      for (std::size_t x = 0; x < size; ++x) {
        const std::int64_t* xc = &coords[x * d];
        std::uint64_t e = 0;
        for (int i = 0; i < d; ++i) e += static_cast<std::uint64_t>(nc[i] * xc[i]) % q;
        acc += f[x] * roots[e % q];
      }
      out[n] = acc * norm;
    }
  });
  return out;
}

GridFunction fft_transform(const GridFunction& f, bool inverse) {
  const std::uint64_t q = f.modulus();
  const int d = f.dim();
  GridFunction out = f;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> line(q), res(q);
  std::size_t stride = out.size();
  for (int axis = 0; axis < d; ++axis) {
    stride /= q;
    for (std::size_t base = 0; base < out.size(); ++base) {
      if ((base / stride) % q != 0) continue;
      for (std::uint64_t j = 0; j < q; ++j) line[j] = out[base + j * stride];
      if (inverse) fft.inv(res, line);
      else fft.fwd(res, line);
      for (std::uint64_t j = 0; j < q; ++j) out[base + j * stride] = res[j];
    }
  }
  if (!inverse) {
    const double norm = std::pow(static_cast<double>(q), -d);
    for (auto& v : out.values()) v *= norm;
  }
  return out;
}

constexpr std::size_t kDirectLimit = 4096;

}  // namespace

GridFunction dft_direct(const GridFunction& f) { return direct_transform(f, -1, true); }
GridFunction dft_fft(const GridFunction& f) { return fft_transform(f, false); }

GridFunction dft(const GridFunction& f) {
  return f.size() <= kDirectLimit ? dft_direct(f) : dft_fft(f);
}

GridFunction inverse_dft(const GridFunction& coeffs) {
  return coeffs.size() <= kDirectLimit ? direct_transform(coeffs, +1, false) : fft_transform(coeffs, true);
}

CoefficientTable to_table(const GridFunction& coeffs, bool drop_zeros) {
  CoefficientTable table;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (drop_zeros && coeffs[i] == Complex(0.0)) continue;
    auto n = coeffs.coords(i);
    for (auto& v : n) v = centered(v, coeffs.modulus());
    table.emplace(Character(std::move(n)), coeffs[i]);
  }
  return table;
}

double l2_norm_squared(const GridFunction& f) {
  double acc = 0.0;
  for (const auto& v : f.values()) acc += std::norm(v);
  return acc / static_cast<double>(f.size());
}

double coefficient_energy(const GridFunction& coeffs) {
  double acc = 0.0;
  for (const auto& v : coeffs.values()) acc += std::norm(v);
  return acc;
}

double coefficient_energy(const CoefficientTable& table) {
  double acc = 0.0;
  for (const auto& [chi, c] : table) acc += std::norm(c);
  return acc;
}

GridFunction convolve(const GridFunction& f, const GridFunction& g) {
  if (!f.same_shape(g)) fail(ErrorKind::InvalidInput, "convolution needs grids of the same shape");
  GridFunction out(f.dim(), f.modulus());
  for (std::size_t x = 0; x < f.size(); ++x) {
    const auto xc = f.coords(x);
    Complex acc = 0.0;
    for (std::size_t y = 0; y < f.size(); ++y) {
      auto diff = f.coords(y);
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = xc[i] - diff[i];
      acc += f[y] * g.at(diff);
    }
    out[x] = acc / static_cast<double>(f.size());
  }
  return out;
}

bool cylinder_fourier_vanishes(const Cylinder& V, const Character& chi) {
  if (chi.dim() != V.r) fail(ErrorKind::InvalidInput, "character/cylinder dimension mismatch");
  std::vector<bool> inside(V.r, false);
  for (auto i : V.indices) inside[i] = true;
  for (std::size_t i = 0; i < V.r; ++i) {
    if (chi.n[i] == 0) continue;
    if (!inside[i]) return true;
    // sin(2 pi n eta) is exactly zero when 2 n eta is an integer
    const Rational twice = 2 * V.eta * static_cast<long>(chi.n[i]);
    if (twice.get_den() == 1) return true;
  }
  return false;
}

Complex cylinder_fourier(const Cylinder& V, bool normalized, const Character& chi) {
  if (cylinder_fourier_vanishes(V, chi)) return Complex(0.0, 0.0);
  Complex value(1.0, 0.0);
  for (auto i : V.indices) {
    const std::int64_t n = chi.n[i];
    if (n == 0) continue;
    const auto u = unit_phase(-Rational(static_cast<long>(n)) * V.center[i]);
    const double arg = 2.0 * std::numbers::pi * static_cast<double>(n) * V.eta.get_d();
    value *= Complex(u.cos_v, u.sin_v) * (std::sin(arg) / arg);
  }
  if (!normalized) value *= cylinder_measure(V).get_d();
  return value;
}

Complex translate_coefficient(Complex c, const Character& chi, const TorusPoint& s) {
  if (c == Complex(0.0, 0.0)) return c;
  return character_value(chi, s) * c;
}

TopK top_k_characters(const CoefficientTable& table, long k, double norm_bound,
                      const std::function<bool(const Character&)>& keep) {
  if (k <= 0) fail(ErrorKind::InvalidInput, "top_k needs k >= 1");
  if (!(norm_bound > 0)) fail(ErrorKind::InvalidInput, "normBound must be positive");
  const double energy = coefficient_energy(table);
  if (energy > norm_bound * norm_bound * (1.0 + 1e-12))
    fail(ErrorKind::InvalidInput, "coefficient energy " + std::to_string(energy) + " exceeds normBound^2");

  std::vector<std::pair<double, const Character*>> ranked;
  for (const auto& [chi, c] : table) {
    if (keep && !keep(chi)) continue;
    const double a = std::abs(c);
    if (a > 0.0) ranked.emplace_back(a, &chi);
  }
  // map order is lexicographic already, so a stable sort keeps ties smallest-first
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });

  TopK out;
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  for (std::size_t i = 0; i < take; ++i) out.selected.push_back(*ranked[i].second);
  out.residual = take < ranked.size() ? ranked[take].first : 0.0;
  out.bound_sqrt_k = norm_bound / std::sqrt(static_cast<double>(k));
  out.bound_sqrt_k1 = norm_bound / std::sqrt(static_cast<double>(k + 1));
  if (out.residual > out.bound_sqrt_k1 + 1e-12)
    fail(ErrorKind::Internal, "top_k residual exceeds (1+k)^{-1/2} * normBound");
  return out;
}

Cylinder annihilating_cylinder(const ApproxHammingBall& U, const std::vector<Character>& chars) {
  std::vector<bool> removed(U.r, false);
  std::size_t count = 0;
  for (const auto& chi : chars) {
    if (chi.dim() != U.r) fail(ErrorKind::InvalidInput, "character dimension does not match ball");
    if (chi.is_trivial()) fail(ErrorKind::InvalidInput, "trivial character cannot be annihilated");
    for (std::size_t i = 0; i < U.r; ++i)
      if (chi.n[i] != 0) {
        if (!removed[i]) ++count;
        removed[i] = true;
        break;
      }
  }
  if (count > U.k)
    fail(ErrorKind::DegenerateInput, "more removal slots needed than the ball radius k allows");
  for (std::size_t i = U.r; i-- > 0 && count < U.k;)
    if (!removed[i]) {
      removed[i] = true;
      ++count;
    }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < U.r; ++i)
    if (!removed[i]) keep.push_back(i);
  return Cylinder(std::move(keep), U.center, U.eps);
}

Uniformizer uniformizing_cylinder(const ApproxHammingBall& U, const CoefficientTable& table, double norm_bound) {
  Uniformizer out;
  if (U.k == 0) {
    out.cylinder = annihilating_cylinder(U, {});
    return out;
  }
  out.top = top_k_characters(table, static_cast<long>(U.k), norm_bound,
                             [](const Character& chi) { return !chi.is_trivial(); });
  out.cylinder = annihilating_cylinder(U, out.top.selected);
  return out;
}

nlohmann::json to_json(const CoefficientTable& table) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [chi, c] : table) j.push_back({{"n", chi.n}, {"re", c.real()}, {"im", c.imag()}});
  return j;
}

CoefficientTable table_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::InvalidInput, "coefficient table must be a JSON list");
  CoefficientTable table;
  for (const auto& e : j)
    table[Character(e.at("n").get<std::vector<std::int64_t>>())] +=
        Complex(e.at("re").get<double>(), e.value("im", 0.0));
  return table;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) fail(ErrorKind::InvalidInput, "truncated grid file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kMagic[8] = {'G', 'R', 'I', 'D', 'F', 'N', '0', '1'};

}  // namespace

void write_grid(std::ostream& out, const GridFunction& f) {
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.modulus()));
  for (const auto& v : f.values()) {
    put_le<double>(out, v.real());
    put_le<double>(out, v.imag());
  }
}

GridFunction read_grid(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail(ErrorKind::InvalidInput, "not a GRIDFN01 file");
  const auto d = get_le<std::uint32_t>(in);
  const auto q = get_le<std::uint32_t>(in);
  GridFunction f(static_cast<int>(d), q);
  for (auto& v : f.values()) {
    const double re = get_le<double>(in);
    const double im = get_le<double>(in);
    v = Complex(re, im);
  }
  return f;
}

}  // namespace ergolab
