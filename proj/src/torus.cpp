#include "ergolab/torus.hpp"

#include <algorithm>
#include <string>

namespace ergolab {

TorusPoint::TorusPoint(std::vector<Rational> coords) : coords_(std::move(coords)) {
  for (auto& c : coords_) c = frac(c);
}

TorusPoint TorusPoint::zero(std::size_t dim) { return TorusPoint(std::vector<Rational>(dim, Rational(0))); }

TorusPoint TorusPoint::constant(std::size_t dim, const Rational& value) {
  return TorusPoint(std::vector<Rational>(dim, value));
}

BigInt TorusPoint::common_denominator() const {
  BigInt q = 1;
  for (const auto& c : coords_) q = lcm(q, c.get_den());
  return q;
}

namespace {
void require_same_dim(const TorusPoint& a, const TorusPoint& b) {
  if (a.dim() != b.dim())
    fail(ErrorKind::InvalidInput,
         "dimension mismatch " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}
}  // namespace

TorusPoint operator+(const TorusPoint& a, const TorusPoint& b) {
  require_same_dim(a, b);
  std::vector<Rational> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
  return TorusPoint(std::move(out));
}

TorusPoint operator-(const TorusPoint& a, const TorusPoint& b) {
  require_same_dim(a, b);
  std::vector<Rational> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
  return TorusPoint(std::move(out));
}

TorusPoint operator-(const TorusPoint& a) {
  std::vector<Rational> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = -a[i];
  return TorusPoint(std::move(out));
}

TorusPoint operator*(const BigInt& n, const TorusPoint& a) {
  std::vector<Rational> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = Rational(n) * a[i];
  return TorusPoint(std::move(out));
}

Rational torus_norm(const TorusPoint& x) {
  if (x.dim() == 0) fail(ErrorKind::InvalidInput, "torus_norm needs dim >= 1");
  Rational best = 0;
  for (const auto& c : x.coords()) best = std::max(best, circle_norm(c));
  return best;
}

std::size_t deviation_count(const TorusPoint& x, const Rational& eps) {
  if (eps <= 0) fail(ErrorKind::InvalidInput, "deviation threshold must be positive");
  return static_cast<std::size_t>(
      std::count_if(x.coords().begin(), x.coords().end(), [&](const Rational& c) { return circle_norm(c) >= eps; }));
}

void check_width(const Rational& eps, const char* what) {
  if (eps <= 0 || eps > Rational(1, 2))
    fail(ErrorKind::InvalidInput, std::string(what) + " must lie in (0, 1/2], got " + format_rational(eps));
}

ApproxHammingBall::ApproxHammingBall(TorusPoint center_, std::size_t k_, Rational eps_)
    : r(center_.dim()), center(std::move(center_)), k(k_), eps(std::move(eps_)) {
  if (r == 0) fail(ErrorKind::InvalidInput, "ball dimension must be positive");
  if (k >= r) fail(ErrorKind::InvalidInput, "ball radius k must be < r");
  check_width(eps, "eps");
}

Cylinder::Cylinder(std::vector<std::size_t> indices_, TorusPoint center_, Rational eta_)
    : r(center_.dim()), indices(std::move(indices_)), center(std::move(center_)), eta(std::move(eta_)) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  if (indices.empty()) fail(ErrorKind::InvalidInput, "cylinder index set must be non-empty");
  if (indices.back() >= r) fail(ErrorKind::InvalidInput, "cylinder index out of range");
  check_width(eta, "eta");
}

bool ball_contains(const ApproxHammingBall& U, const TorusPoint& x) {
  require_same_dim(U.center, x);
  return deviation_count(U.center - x, U.eps) <= U.k;
}

Rational ball_measure(const ApproxHammingBall& U) {
  check_width(U.eps, "eps");
  const Rational inside = 2 * U.eps;
  const Rational outside = 1 - inside;
  Rational total = 0;
  for (std::size_t j = 0; j <= U.k; ++j)
    total += Rational(binomial(U.r, j)) * power(outside, j) * power(inside, U.r - j);
  return total;
}

bool cylinder_contains(const Cylinder& V, const TorusPoint& x) {
  require_same_dim(V.center, x);
  return std::all_of(V.indices.begin(), V.indices.end(),
                     [&](std::size_t i) { return circle_norm(x[i] - V.center[i]) < V.eta; });
}

Rational cylinder_measure(const Cylinder& V) {
  check_width(V.eta, "eta");
  return power(2 * V.eta, V.indices.size());
}

std::vector<Cylinder> subordinate_cylinders(const ApproxHammingBall& U) {
  if (U.k >= U.r) fail(ErrorKind::InvalidInput, "k must be < r");
  const std::size_t size = U.r - U.k;
  std::vector<Cylinder> out;
  std::vector<std::size_t> pick(size);
  for (std::size_t i = 0; i < size; ++i) pick[i] = i;
  while (true) {
    out.emplace_back(pick, U.center, U.eps);
    // next combination in lexicographic order
    std::size_t i = size;
    while (i > 0 && pick[i - 1] == U.r - size + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

nlohmann::json to_json(const TorusPoint& x) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : x.coords()) j.push_back(format_rational(c));
  return j;
}

TorusPoint point_from_json(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::InvalidInput, "torus point must be a JSON array");
  std::vector<Rational> coords;
  for (const auto& c : j) {
    if (c.is_string()) coords.push_back(parse_rational(c.get<std::string>()));
    else if (c.is_number_integer()) coords.emplace_back(c.get<long>());
    else fail(ErrorKind::InvalidInput, "torus coordinate must be a \"p/q\" string");
  }
  return TorusPoint(std::move(coords));
}

nlohmann::json to_json(const ApproxHammingBall& U) {
  return {{"r", U.r}, {"y", to_json(U.center)}, {"k", U.k}, {"eps", format_rational(U.eps)}};
}

ApproxHammingBall ball_from_json(const nlohmann::json& j) {
  ApproxHammingBall U(point_from_json(j.at("y")), j.at("k").get<std::size_t>(),
                      parse_rational(j.at("eps").get<std::string>()));
  if (j.contains("r") && j.at("r").get<std::size_t>() != U.r)
    fail(ErrorKind::InvalidInput, "ball r does not match center dimension");
  return U;
}

nlohmann::json to_json(const Cylinder& V) {
  std::vector<std::size_t> one_based;
  for (auto i : V.indices) one_based.push_back(i + 1);
  return {{"r", V.r}, {"I", one_based}, {"y", to_json(V.center)}, {"eta", format_rational(V.eta)}};
}

Cylinder cylinder_from_json(const nlohmann::json& j) {
  std::vector<std::size_t> idx;
  for (auto i : j.at("I").get<std::vector<std::size_t>>()) {
    if (i == 0) fail(ErrorKind::InvalidInput, "cylinder indices are 1-based");
    idx.push_back(i - 1);
  }
  Cylinder V(std::move(idx), point_from_json(j.at("y")), parse_rational(j.at("eta").get<std::string>()));
  if (j.contains("r") && j.at("r").get<std::size_t>() != V.r)
    fail(ErrorKind::InvalidInput, "cylinder r does not match center dimension");
  return V;
}

}  // namespace ergolab
