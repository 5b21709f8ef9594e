#pragma once

// Polyhedral ordering cones: closed, convex, pointed, with nonempty interior.

#include "mobilevel/lp.hpp"
#include "mobilevel/polycone.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace mobilevel {

enum class Membership { closed, interior };

/// Norm used to normalize weights onto the unit sphere of the dual cone.
enum class SphereNorm { euclidean, one, infinity };

class OrderingCone {
 public:
  OrderingCone() = default;

  /// Throws InvalidInput unless the generators span a pointed cone with interior.
  static OrderingCone from_generators(std::size_t dim, const QMat& generators) {
    if (dim == 0) throw InvalidInput("ordering cone dimension must be positive");
    if (dim > 3 && !is_orthant_generators(dim, generators))
      throw InvalidInput("ordering cones beyond dimension 3 must be the nonnegative orthant");
    OrderingCone c;
    c.cone_ = PolyCone::from_generators(dim, generators);
    if (!c.cone_.lineality_directions().empty()) throw InvalidInput("ordering cone is not pointed");
    // Dual generators are the negated outward normals: C = { z : <h, z> >= 0 }.
    for (const auto& n : c.cone_.normals()) c.dual_generators_.push_back(negate(n));
    std::sort(c.dual_generators_.begin(), c.dual_generators_.end());
    if (!PolyCone::from_generators(dim, c.dual_generators_).lineality_directions().empty())
      throw InvalidInput("ordering cone has empty interior");
    c.dual_double_.reserve(c.dual_generators_.size());
    for (const auto& h : c.dual_generators_) c.dual_double_.push_back(to_double(h));
    for (const auto& g : c.cone_.generators()) c.gen_double_.push_back(to_double(g));
    return c;
  }

  static OrderingCone orthant(std::size_t dim) {
    QMat gens;
    for (std::size_t i = 0; i < dim; ++i) gens.push_back(unit_vector(dim, i));
    return from_generators(dim, gens);
  }

  std::size_t dim() const { return cone_.dim(); }
  const QMat& generators() const { return cone_.generators(); }
  const QMat& dual_generators() const { return dual_generators_; }
  const std::vector<std::vector<double>>& dual_generators_double() const { return dual_double_; }
  const std::vector<std::vector<double>>& generators_double() const { return gen_double_; }
  const PolyCone& polycone() const { return cone_; }

  bool is_orthant() const { return is_orthant_generators(dim(), generators()); }

  bool contains(const QVec& z, Membership mode = Membership::closed) const {
    check_dim(z.size());
    for (const auto& h : dual_generators_) {
      Rational d = dot(h, z);
      if (d < 0 || (mode == Membership::interior && d == 0)) return false;
    }
    return true;
  }

  /// Floating-point membership with absolute slack `tol`: closed means every
  /// dual inner product >= -tol, interior means every one > tol.
  bool contains(const std::vector<double>& z, Membership mode = Membership::closed, double tol = 0.0) const {
    check_dim(z.size());
    for (const auto& h : dual_double_) {
      double d = 0;
      for (std::size_t i = 0; i < z.size(); ++i) d += h[i] * z[i];
      if (mode == Membership::closed ? d < -tol : d <= tol) return false;
    }
    return true;
  }

  /// Membership in C*_> : strictly positive on every generator.
  bool strict_dual_contains(const QVec& z_star) const {
    check_dim(z_star.size());
    for (const auto& g : generators())
      if (dot(g, z_star) <= 0) return false;
    return true;
  }

  bool strict_dual_contains(const std::vector<double>& z_star) const {
    check_dim(z_star.size());
    for (const auto& g : gen_double_) {
      double d = 0;
      for (std::size_t i = 0; i < g.size(); ++i) d += g[i] * z_star[i];
      if (d <= 0) return false;
    }
    return true;
  }

  bool dual_contains(const std::vector<double>& lambda, double tol = 1e-12) const {
    for (const auto& g : gen_double_) {
      double d = 0;
      for (std::size_t i = 0; i < g.size(); ++i) d += g[i] * lambda[i];
      if (d < -tol) return false;
    }
    return true;
  }

  nlohmann::json to_json() const {
    if (is_orthant()) return {{"orthant", dim()}};
    return {{"dim", dim()}, {"generators", mobilevel::to_json(generators())}};
  }

  static OrderingCone from_json(const nlohmann::json& j) {
    if (j.contains("orthant")) return orthant(j.at("orthant").get<std::size_t>());
    return from_generators(j.at("dim").get<std::size_t>(), qmat_from_json(j.at("generators")));
  }

 private:
  static bool is_orthant_generators(std::size_t dim, const QMat& gens) {
    if (gens.size() != dim) return false;
    std::vector<bool> seen(dim, false);
    for (const auto& g : gens) {
      std::size_t nz = 0, idx = 0;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] != 0) {
          ++nz;
          idx = i;
        }
      if (nz != 1 || g[idx] <= 0 || seen[idx]) return false;
      seen[idx] = true;
    }
    return true;
  }

  void check_dim(std::size_t n) const {
    if (n != dim())
      throw InvalidInput("vector of dimension " + std::to_string(n) + " tested against cone of dimension " +
                         std::to_string(dim()));
  }

  PolyCone cone_;
  QMat dual_generators_;
  std::vector<std::vector<double>> dual_double_;
  std::vector<std::vector<double>> gen_double_;
};

/// C* = { lambda : <lambda, g> >= 0 for all generators g }, itself an ordering cone.
inline OrderingCone dual_cone(const OrderingCone& cone) {
  return OrderingCone::from_generators(cone.dim(), cone.dual_generators());
}

inline std::vector<double> normalize(std::vector<double> v, SphereNorm norm) {
  double s = 0;
  for (double x : v) {
    switch (norm) {
      case SphereNorm::euclidean: s += x * x; break;
      case SphereNorm::one: s += std::abs(x); break;
      case SphereNorm::infinity: s = std::max(s, std::abs(x)); break;
    }
  }
  if (norm == SphereNorm::euclidean) s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

/// Deterministic sample of C* ∩ S_1(0).
///
/// In the plane: `resolution` directions at equal angles between the two
/// extreme rays of C*, endpoints included and exact. Otherwise: normalized
/// convex combinations of the dual generators on a simplex grid with
/// `resolution - 1` subdivisions.
inline std::vector<std::vector<double>> dual_sphere_grid(const OrderingCone& cone, std::size_t resolution,
                                                         SphereNorm norm = SphereNorm::euclidean) {
  if (resolution < 2) throw InvalidInput("dual sphere grid needs resolution >= 2");
  const auto& rays = cone.dual_generators();
  if (rays.size() < cone.dim()) throw InvalidInput("dual cone has empty interior");
  std::vector<std::vector<double>> out;
  if (cone.dim() == 1) {
    out.push_back({1.0});
    return out;
  }
  if (cone.dim() == 2) {
    auto a = normalize(to_double(rays[0]), SphereNorm::euclidean);
    auto b = normalize(to_double(rays[1]), SphereNorm::euclidean);
    double ta = std::atan2(a[1], a[0]);
    double tb = std::atan2(b[1], b[0]);
    double span = tb - ta;
    if (span > std::numbers::pi) span -= 2 * std::numbers::pi;
    if (span < -std::numbers::pi) span += 2 * std::numbers::pi;
    if (span < 0) {
      std::swap(a, b);
      std::swap(ta, tb);
      span = -span;
    }
    for (std::size_t k = 0; k < resolution; ++k) {
      std::vector<double> v;
      if (k == 0) v = a;
      else if (k + 1 == resolution) v = b;
      else {
        double t = ta + span * static_cast<double>(k) / static_cast<double>(resolution - 1);
        v = {std::cos(t), std::sin(t)};
      }
      out.push_back(normalize(v, norm));
    }
    return out;
  }
  const std::size_t r = rays.size();
  const std::size_t steps = resolution - 1;
  std::vector<std::size_t> w(r, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == r) {
      w[i] = left;
      std::vector<double> v(cone.dim(), 0.0);
      for (std::size_t k = 0; k < r; ++k)
        for (std::size_t d = 0; d < cone.dim(); ++d) v[d] += static_cast<double>(w[k]) * to_double(rays[k][d]);
      out.push_back(normalize(v, norm));
      return;
    }
    for (std::size_t a = 0; a <= left; ++a) {
      w[i] = a;
      rec(i + 1, left - a);
    }
  };
  rec(0, steps);
  return out;
}

}  // namespace mobilevel
