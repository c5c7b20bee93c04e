#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergolab/bohr.hpp"

namespace ergolab {

/// Packed subset of [N]; bit n of word n / 64.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t n);
  std::size_t size() const { return n_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  std::size_t count() const;
  const std::vector<std::uint64_t>& words() const { return words_; }
  /// Word i of { n : n + shift in this } restricted to [N].
  std::uint64_t shifted_word(std::size_t i, std::size_t shift) const;
  /// Little-endian byte image, ceil(N/8) bytes.
  std::string to_bytes() const;
  static Bitset from_bytes(std::size_t n, const std::string& bytes);
  friend bool operator==(const Bitset&, const Bitset&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// E = { x in T^r : w_a(x) <= t }, i.e. at most t coordinates at distance >= a from 0.
struct BandSet {
  std::size_t r = 0;
  Rational a;
  std::size_t t = 0;

  bool contains(const TorusPoint& x) const;
  /// x = nums / q coordinatewise.
  bool contains_residues(const std::vector<std::uint64_t>& nums, std::uint64_t q) const;
  /// P(Bin(r, 1 - 2a) <= t), exact.
  Rational measure() const;
};

/// The rotation a certificate was read off: B = { n : n beta in E }, with
/// E and E + U disjoint.
struct RotationData {
  BandSet E;
  Frequency beta;
  ApproxHammingBall U;
};

struct Certificate {
  std::int64_t N = 0;
  std::size_t k = 1;
  Bitset B;
  IntSet S;
  Rational delta;  // delta': |B| >= delta' N
  nlohmann::json provenance = nlohmann::json::object();
  std::optional<RotationData> rotation;
};

struct Verification {
  bool ok = false;
  bool density_ok = false;
  std::optional<std::int64_t> violating_s;  // first in S order
  std::size_t count = 0;
  std::string message;
};

/// Exact check of |B| >= delta' N and, for each s, that the k + 1 shifts
/// B - j s (j = 0..k) have empty common intersection. Workers split S.
Verification verify_certificate(const Certificate& C);

struct BandWitness {
  std::size_t k = 0;
  Rational eps;
  BandSet E;
  ApproxHammingBall U;
  Rational measure;
  Rational eta;
  std::size_t largest_r_tried = 0;
  std::uint64_t mc_samples = 0;
  std::uint64_t mc_hits = 0;  // sampled points of E + U that landed in E
};

/// Band construction: r increases from k + 1, t = floor((r - k - 1) / 2) so
/// r > 2t + k, and eps walks down 1/8, 1/16, ... until m(E) > eta.
BandWitness build_band_witness(std::size_t k, const Rational& eta, std::uint64_t mc_samples = 100000,
                               std::uint64_t seed = 1, std::size_t max_r = 4096);
/// Sample x in E and u in U on the 2^-32 grid; count x + u in E.
std::uint64_t band_disjointness_hits(const BandSet& E, const ApproxHammingBall& U, std::uint64_t samples,
                                     std::uint64_t seed);
/// Fraction of uniform grid samples landing in E.
double band_measure_estimate(const BandSet& E, std::uint64_t samples, std::uint64_t seed);

/// B = { n in [N] : n beta in E }, S = BH(beta, U) cap [1, N], k = 1.
Certificate rotation_certificate(const BandSet& E, const ApproxHammingBall& U, const Frequency& beta, std::int64_t N);
/// Evens: E = (-1/4, 1/4), beta = 1/2, U = Hamm((1/2); 0, 1/4), S = {1}.
Certificate evens_certificate(std::int64_t N, const Rational& delta);

struct CombineOutcome {
  bool ok = false;
  std::int64_t m = 0;
  Certificate cert;
  std::vector<std::string> diagnostics;
};

/// Certificate for S1 cup m S2 with density target 2 delta'_1 delta'_2. Tries
/// the product rotation when both sides carry rotation data, then the
/// generic candidates B1, B2 and B1 cap { n : floor(n / m) in B2 }.
CombineOutcome combine_certificates(const Certificate& C1, const Certificate& C2, std::int64_t m);

/// m = 1 when S2 is empty, else the first m in [2, m_max] that combines.
/// Throws `exhausted` with every diagnostic otherwise.
CombineOutcome search_min_m(const Certificate& C1, const Certificate& C2, std::int64_t m_max);

/// Largest |B| over B in [N] with B cap (B - s) empty for all s in S (k = 1),
/// by a sliding-window DP; needs max S <= 20.
std::size_t max_density_avoiding(const IntSet& S, std::int64_t N);

/// S -> S^{^2}, re-verified against C.B or `B`.
Certificate square_certificate(const Certificate& C, const std::optional<Bitset>& B = std::nullopt);

// Certificate file: one JSON header line then one base64 line.
std::string certificate_to_string(const Certificate& C);
Certificate certificate_from_string(const std::string& text);
void write_certificate(const std::string& path, const Certificate& C);
Certificate read_certificate(const std::string& path);

nlohmann::json to_json(const BandSet& E);
BandSet band_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BandWitness& W);

}  // namespace ergolab
