#pragma once

// Polyhedral cones in both representations over exact rationals.
//
// A cone is stored as generators (V) and as outward normals (H) with
//   cone = cone(generators) = { v : h . v <= 0 for every normal h }.
// Conversion is by brute-force extreme ray enumeration over row subsets,
// which is fine for the small ambient dimensions used here (<= 4).

#include "mobilevel/rational.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

namespace mobilevel {

namespace detail {

inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(k);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == k) {
      fn(idx);
      return;
    }
    for (std::size_t i = start; i + (k - depth) <= n; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

inline void push_unique_direction(QMat& out, const QVec& v) {
  QVec p = primitive(v);
  if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
}

}  // namespace detail

/// Generators of { v in R^dim : rows v <= 0 }: extreme rays of the pointed
/// part plus +/- a basis of the lineality space. Directions are primitive
/// integer vectors, deduplicated.
inline QMat cone_generators_from_normals(const QMat& rows, std::size_t dim) {
  QMat lineality = rows.empty() ? QMat{} : null_space(rows, dim);
  if (rows.empty())
    for (std::size_t i = 0; i < dim; ++i) lineality.push_back(unit_vector(dim, i));
  const std::size_t k = dim - lineality.size();
  QMat gens;
  if (k > 0) {
    // Extreme rays of cone ∩ L^perp: one-dimensional solutions of k-1 tight rows.
    detail::for_each_subset(rows.size(), k - 1, [&](const std::vector<std::size_t>& subset) {
      QMat sys;
      for (auto i : subset) sys.push_back(rows[i]);
      for (const auto& l : lineality) sys.push_back(l);
      QMat ns = null_space(sys, dim);
      if (ns.size() != 1) return;
      const QVec& r = ns.front();
      bool pos_ok = true;
      bool neg_ok = true;
      for (const auto& row : rows) {
        Rational d = dot(row, r);
        if (d > 0) pos_ok = false;
        if (d < 0) neg_ok = false;
      }
      if (pos_ok) detail::push_unique_direction(gens, r);
      if (neg_ok) detail::push_unique_direction(gens, negate(r));
    });
  }
  for (const auto& l : lineality) {
    detail::push_unique_direction(gens, l);
    detail::push_unique_direction(gens, negate(l));
  }
  std::sort(gens.begin(), gens.end());
  return gens;
}

class PolyCone {
 public:
  PolyCone() = default;

  static PolyCone from_generators(std::size_t dim, const QMat& generators) {
    PolyCone c;
    c.dim_ = dim;
    for (const auto& g : generators) {
      if (g.size() != dim) throw InvalidInput("cone generator has wrong dimension");
      if (!is_zero(g)) detail::push_unique_direction(c.generators_, g);
    }
    // H-rep = generators of the polar cone { h : h . g <= 0 }.
    c.normals_ = cone_generators_from_normals(c.generators_, dim);
    // Re-derive a minimal generator list from the H-rep.
    c.generators_ = cone_generators_from_normals(c.normals_, dim);
    return c;
  }

  static PolyCone from_normals(std::size_t dim, const QMat& normals) {
    PolyCone c;
    c.dim_ = dim;
    for (const auto& h : normals) {
      if (h.size() != dim) throw InvalidInput("cone normal has wrong dimension");
      if (!is_zero(h)) detail::push_unique_direction(c.normals_, h);
    }
    c.generators_ = cone_generators_from_normals(c.normals_, dim);
    c.normals_ = cone_generators_from_normals(c.generators_, dim);
    return c;
  }

  static PolyCone zero(std::size_t dim) { return from_generators(dim, {}); }

  std::size_t dim() const { return dim_; }
  const QMat& generators() const { return generators_; }
  const QMat& normals() const { return normals_; }

  bool contains(const QVec& v) const {
    for (const auto& h : normals_)
      if (dot(h, v) > 0) return false;
    return true;
  }

  bool contains(const PolyCone& other) const {
    return std::all_of(other.generators_.begin(), other.generators_.end(), [&](const QVec& g) { return contains(g); });
  }

  bool is_zero_cone() const { return generators_.empty(); }

  /// Intersection via stacked normals.
  PolyCone intersect(const PolyCone& other) const {
    QMat rows = normals_;
    rows.insert(rows.end(), other.normals_.begin(), other.normals_.end());
    return from_normals(dim_, rows);
  }

  /// Directions v with both v and -v in the cone, as pairs of generators.
  QMat lineality_directions() const {
    QMat out;
    for (const auto& g : generators_)
      if (g < negate(g) && std::find(generators_.begin(), generators_.end(), negate(g)) != generators_.end())
        out.push_back(g);
    return out;
  }

  friend bool operator==(const PolyCone& a, const PolyCone& b) {
    return a.dim_ == b.dim_ && a.contains(b) && b.contains(a);
  }

 private:
  std::size_t dim_ = 0;
  QMat generators_;
  QMat normals_;
};

}  // namespace mobilevel
