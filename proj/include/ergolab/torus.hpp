#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab {

/// A point of T^r with exact rational coordinates, each kept in [0,1).
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::vector<Rational> coords);
  static TorusPoint zero(std::size_t dim);
  static TorusPoint constant(std::size_t dim, const Rational& value);

  std::size_t dim() const { return coords_.size(); }
  const Rational& operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<Rational>& coords() const { return coords_; }

  /// Least common denominator of the coordinates.
  BigInt common_denominator() const;

  friend TorusPoint operator+(const TorusPoint& a, const TorusPoint& b);
  friend TorusPoint operator-(const TorusPoint& a, const TorusPoint& b);
  friend TorusPoint operator-(const TorusPoint& a);
  friend TorusPoint operator*(const BigInt& n, const TorusPoint& a);
  friend bool operator==(const TorusPoint& a, const TorusPoint& b) { return a.coords_ == b.coords_; }

 private:
  std::vector<Rational> coords_;
};

Rational torus_norm(const TorusPoint& x);

/// w_eps(x): number of coordinates at circle distance >= eps from 0.
std::size_t deviation_count(const TorusPoint& x, const Rational& eps);

/// Hamm(y; k, eps): points with at most k coordinates at distance >= eps from y.
struct ApproxHammingBall {
  std::size_t r = 0;
  TorusPoint center;
  std::size_t k = 0;
  Rational eps;

  ApproxHammingBall() = default;
  ApproxHammingBall(TorusPoint center, std::size_t k, Rational eps);
};

/// V_{I,y,eta} = { x : ||x_i - y_i|| < eta for all i in I }. Indices are 0-based.
struct Cylinder {
  std::size_t r = 0;
  std::vector<std::size_t> indices;
  TorusPoint center;
  Rational eta;

  Cylinder() = default;
  Cylinder(std::vector<std::size_t> indices, TorusPoint center, Rational eta);
};

bool ball_contains(const ApproxHammingBall& U, const TorusPoint& x);
Rational ball_measure(const ApproxHammingBall& U);

bool cylinder_contains(const Cylinder& V, const TorusPoint& x);
Rational cylinder_measure(const Cylinder& V);

/// All cylinders V_{I,y,eps} with |I| = r - k, I in lexicographic order.
std::vector<Cylinder> subordinate_cylinders(const ApproxHammingBall& U);

/// Validates eps in (0, 1/2].
void check_width(const Rational& eps, const char* what);

// JSON: a point is an array of "p/q" strings; a ball is {r, y, k, eps}; a
// cylinder is {r, I, y, eta} with I written 1-based.
nlohmann::json to_json(const TorusPoint& x);
TorusPoint point_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ApproxHammingBall& U);
ApproxHammingBall ball_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Cylinder& V);
Cylinder cylinder_from_json(const nlohmann::json& j);

}  // namespace ergolab
