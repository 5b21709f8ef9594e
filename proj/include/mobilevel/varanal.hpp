#pragma once

// Exact polyhedral variational analysis: normal cones of convex polyhedra,
// limiting normal cones of finite unions (cell method), coderivative slices,
// exact union inclusion, and a floating-point proximal-normal oracle.

#include "mobilevel/lp.hpp"
#include "mobilevel/parametric.hpp"
#include "mobilevel/polycone.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mobilevel {

constexpr std::size_t kMaxAmbientDim = 4;

/// { v : a v <= b } with a fixed ambient dimension.
class ConvexPolyhedron {
 public:
  ConvexPolyhedron() = default;
  ConvexPolyhedron(std::size_t dim, QMat a, QVec b) : dim_(dim), a_(std::move(a)), b_(std::move(b)) { validate(); }
  ConvexPolyhedron(std::size_t dim, const HData& h) : ConvexPolyhedron(dim, h.a, h.b) {}

  std::size_t dim() const { return dim_; }
  const QMat& a() const { return a_; }
  const QVec& b() const { return b_; }

  bool contains(const QVec& v) const {
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (dot(a_[i], v) > b_[i]) return false;
    return true;
  }

  std::vector<std::size_t> active_rows(const QVec& v) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (dot(a_[i], v) == b_[i]) out.push_back(i);
    return out;
  }

  /// Minimal-face points (vertices of P ∩ lineality^perp) and recession directions.
  struct VRep {
    QMat points;
    QMat rays;
  };

  const VRep& vrep() const {
    if (!vrep_) vrep_ = compute_vrep();
    return *vrep_;
  }

  std::optional<QVec> some_point() const {
    return lp_feasible_point(a_, b_, std::vector<RowSense>(a_.size(), RowSense::le), dim_);
  }

 private:
  void validate() const {
    if (dim_ == 0 || dim_ > kMaxAmbientDim) throw InvalidInput("polyhedron dimension must be 1.." + std::to_string(kMaxAmbientDim));
    if (a_.size() != b_.size()) throw InvalidInput("polyhedron: row count differs from right-hand side length");
    for (const auto& r : a_)
      if (r.size() != dim_) throw InvalidInput("polyhedron: row has wrong length");
    if (!some_point()) throw InvalidInput("polyhedron is empty");
    for (const auto& p : vrep().points)
      if (!contains(p)) throw InvalidInput("polyhedron: vertex representation disagrees with inequalities");
    for (const auto& r : vrep().rays)
      for (const auto& row : a_)
        if (dot(row, r) > 0) throw InvalidInput("polyhedron: ray representation disagrees with inequalities");
  }

  VRep compute_vrep() const {
    VRep v;
    v.rays = cone_generators_from_normals(a_, dim_);
    QMat lineality = a_.empty() ? QMat{} : null_space(a_, dim_);
    if (a_.empty())
      for (std::size_t i = 0; i < dim_; ++i) lineality.push_back(unit_vector(dim_, i));
    const std::size_t k = dim_ - lineality.size();
    detail::for_each_subset(a_.size(), k, [&](const std::vector<std::size_t>& rows) {
      QMat sys;
      QVec rhs;
      for (auto i : rows) {
        sys.push_back(a_[i]);
        rhs.push_back(b_[i]);
      }
      for (const auto& l : lineality) {
        sys.push_back(l);
        rhs.push_back(Rational(0));
      }
      QVec x;
      if (!solve_square(sys, rhs, x)) return;
      if (contains(x) && std::find(v.points.begin(), v.points.end(), x) == v.points.end()) v.points.push_back(x);
    });
    std::sort(v.points.begin(), v.points.end());
    return v;
  }

  std::size_t dim_ = 0;
  QMat a_;
  QVec b_;
  mutable std::optional<VRep> vrep_;
};

struct PolyUnion {
  std::size_t dim = 0;
  std::vector<ConvexPolyhedron> pieces;
  std::string label;

  static PolyUnion from_hdata(std::size_t dim, const std::vector<HData>& hs, std::string label = {}) {
    PolyUnion u;
    u.dim = dim;
    u.label = std::move(label);
    for (const auto& h : hs) u.pieces.emplace_back(dim, h);
    if (u.pieces.empty()) throw InvalidInput("polyhedral union without pieces");
    return u;
  }

  bool contains(const QVec& v) const {
    return std::any_of(pieces.begin(), pieces.end(), [&](const ConvexPolyhedron& p) { return p.contains(v); });
  }
};

/// Finite union of polyhedral cones in a common ambient space.
struct ConeUnion {
  std::size_t dim = 0;
  std::vector<PolyCone> pieces;

  bool contains(const QVec& v) const {
    return std::any_of(pieces.begin(), pieces.end(), [&](const PolyCone& c) { return c.contains(v); });
  }
};

/// Cone generated by the outward normals of the rows active at x.
inline PolyCone normal_cone_convex(const ConvexPolyhedron& p, const QVec& x) {
  if (x.size() != p.dim()) throw InvalidInput("point has wrong dimension");
  if (!p.contains(x)) throw InvalidInput("point is not in the polyhedron");
  QMat gens;
  for (auto i : p.active_rows(x)) gens.push_back(p.a()[i]);
  return PolyCone::from_generators(p.dim(), gens);
}

namespace detail {

inline bool cone_less(const PolyCone& a, const PolyCone& b) {
  if (a.generators().size() != b.generators().size()) return a.generators().size() > b.generators().size();
  return a.generators() < b.generators();
}

inline void drop_absorbed(std::vector<PolyCone>& pieces) {
  std::vector<PolyCone> unique;
  for (auto& p : pieces)
    if (std::none_of(unique.begin(), unique.end(), [&](const PolyCone& q) { return q == p; })) unique.push_back(std::move(p));
  std::vector<bool> dropped(unique.size(), false);
  for (std::size_t i = 0; i < unique.size(); ++i)
    for (std::size_t j = 0; j < unique.size() && !dropped[i]; ++j)
      if (i != j && !dropped[j] && unique[j].contains(unique[i])) dropped[i] = true;
  pieces.clear();
  for (std::size_t i = 0; i < unique.size(); ++i)
    if (!dropped[i]) pieces.push_back(std::move(unique[i]));
}

}  // namespace detail

/// Removes duplicate and absorbed pieces, splits a line {t v} into the ray
/// that no other piece covers, and sorts pieces.
inline ConeUnion canonicalize(ConeUnion u) {
  detail::drop_absorbed(u.pieces);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < u.pieces.size() && !changed; ++i) {
      const auto& g = u.pieces[i].generators();
      if (g.size() != 2 || g[0] != negate(g[1])) continue;
      auto covered = [&](const QVec& v) {
        for (std::size_t j = 0; j < u.pieces.size(); ++j)
          if (j != i && u.pieces[j].contains(v)) return true;
        return false;
      };
      const bool c0 = covered(g[0]), c1 = covered(g[1]);
      if (!c0 && !c1) continue;
      if (c0 && c1) u.pieces.erase(u.pieces.begin() + static_cast<long>(i));
      else u.pieces[i] = PolyCone::from_generators(u.dim, {c0 ? g[1] : g[0]});
      changed = true;
    }
    if (changed) detail::drop_absorbed(u.pieces);
  }
  if (u.pieces.empty()) u.pieces.push_back(PolyCone::zero(u.dim));
  std::sort(u.pieces.begin(), u.pieces.end(), detail::cone_less);
  return u;
}

/// Limiting normal cone of a finite union of convex polyhedra at x.
///
/// Cell method: near x only the rows active at x matter. Their hyperplanes
/// form a central arrangement; every nonempty cell (sign vector, pruned by LP
/// feasibility) carries a constant regular normal cone, the intersection of
/// the normal cones of the pieces containing it. The limiting cone is the union.
inline ConeUnion limiting_normal_cone_union(const PolyUnion& u, const QVec& x) {
  if (x.size() != u.dim) throw InvalidInput("point has wrong dimension");
  if (u.dim > kMaxAmbientDim) throw InvalidInput("ambient dimension too large");
  struct LocalRow {
    std::size_t hyperplane;
    int orientation;
    QVec normal;
  };
  QMat hyperplanes;
  std::vector<std::vector<LocalRow>> rows_of;  // per relevant piece
  for (const auto& p : u.pieces) {
    if (!p.contains(x)) continue;
    std::vector<LocalRow> rows;
    for (auto i : p.active_rows(x)) {
      const QVec& a = p.a()[i];
      if (is_zero(a)) continue;
      QVec prim = primitive(a);
      QVec neg = negate(prim);
      const bool canon = !(prim < neg);
      const QVec& key = canon ? prim : neg;
      auto it = std::find(hyperplanes.begin(), hyperplanes.end(), key);
      std::size_t h = static_cast<std::size_t>(it - hyperplanes.begin());
      if (it == hyperplanes.end()) hyperplanes.push_back(key);
      rows.push_back({h, canon ? 1 : -1, a});
    }
    rows_of.push_back(std::move(rows));
  }
  if (rows_of.empty()) throw InvalidInput("point is not in the union");

  ConeUnion out;
  out.dim = u.dim;
  std::vector<int> sign(hyperplanes.size(), 0);
  QMat sys;
  QVec rhs;
  std::vector<RowSense> senses;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == hyperplanes.size()) {
      std::optional<PolyCone> cell_cone;
      for (const auto& rows : rows_of) {
        bool inside = true;
        QMat active;
        for (const auto& r : rows) {
          const int s = r.orientation * sign[r.hyperplane];
          if (s > 0) inside = false;
          if (s == 0) active.push_back(r.normal);
        }
        if (!inside) continue;
        PolyCone n = PolyCone::from_generators(u.dim, active);
        cell_cone = cell_cone ? cell_cone->intersect(n) : n;
      }
      if (cell_cone) out.pieces.push_back(*cell_cone);
      return;
    }
    for (int s : {-1, 0, 1}) {
      sys.push_back(hyperplanes[k]);
      rhs.push_back(Rational(s));
      senses.push_back(s < 0 ? RowSense::le : s == 0 ? RowSense::eq : RowSense::ge);
      if (lp_feasible_point(sys, rhs, senses, u.dim)) {
        sign[k] = s;
        rec(k + 1);
      }
      sys.pop_back();
      rhs.pop_back();
      senses.pop_back();
    }
  };
  rec(0);
  return canonicalize(std::move(out));
}

// --- exact union inclusion ---

namespace detail {

inline bool hdata_contains(const HData& h, const QVec& v) {
  for (std::size_t i = 0; i < h.a.size(); ++i)
    if (dot(h.a[i], v) > h.b[i]) return false;
  return true;
}

inline std::optional<QVec> hdata_point(const HData& h, std::size_t dim) {
  return lp_feasible_point(h.a, h.b, std::vector<RowSense>(h.a.size(), RowSense::le), dim);
}

// A point of P with q v > c, if any.
inline std::optional<QVec> strict_point(const HData& p, const QVec& q, const Rational& c, std::size_t dim) {
  LinearProgram lp = LinearProgram::free_le(negate(q), p.a, p.b);
  if (lp.rows.empty()) {
    lp.rows.push_back(QVec(dim, Rational(0)));
    lp.rhs.push_back(Rational(0));
    lp.senses.push_back(RowSense::le);
  }
  auto r = lp_solve(lp);
  if (r.status == LpStatus::infeasible) return std::nullopt;
  if (r.status == LpStatus::optimal) {
    if (-r.value > c) return r.x;
    return std::nullopt;
  }
  // Unbounded: walk along the improving ray until q v > c.
  QVec v = r.x;
  const Rational slope = dot(q, r.ray);
  const Rational t = (c - dot(q, v)) / slope + 1;
  for (std::size_t i = 0; i < dim; ++i) v[i] += t * r.ray[i];
  return v;
}

// A point of P outside B[k..], or nothing if P is covered.
inline std::optional<QVec> uncovered_point(const HData& p, const std::vector<HData>& b, std::size_t k, std::size_t dim) {
  if (k == b.size()) return hdata_point(p, dim);
  const HData& q = b[k];
  HData acc = p;
  for (std::size_t j = 0; j < q.a.size(); ++j) {
    if (auto s = strict_point(acc, q.a[j], q.b[j], dim)) {
      HData closed = acc;
      closed.a.push_back(negate(q.a[j]));
      closed.b.push_back(-q.b[j]);
      if (auto w = uncovered_point(closed, b, k + 1, dim)) {
        // w may sit on the boundary of q; slide towards the strict point.
        auto outside = [&](const QVec& v) {
          for (std::size_t i = k + 1; i < b.size(); ++i)
            if (hdata_contains(b[i], v)) return false;
          return true;
        };
        QVec cand = *w;
        Rational eps(1);
        for (int it = 0; it < 200; ++it) {
          eps /= 2;
          QVec v(dim);
          for (std::size_t i = 0; i < dim; ++i) v[i] = (*w)[i] + eps * ((*s)[i] - (*w)[i]);
          if (outside(v)) {
            cand = v;
            break;
          }
        }
        return cand;
      }
    }
    acc.a.push_back(q.a[j]);
    acc.b.push_back(q.b[j]);
  }
  return std::nullopt;
}

inline HData cone_hdata(const PolyCone& c) { return HData{c.normals(), QVec(c.normals().size(), Rational(0))}; }

}  // namespace detail

/// Finite union of polyhedra (not necessarily cones), e.g. a coderivative slice.
struct SliceUnion {
  std::size_t dim = 0;
  std::vector<HData> pieces;  // all nonempty; an empty list is the empty set

  bool empty() const { return pieces.empty(); }
  bool contains(const QVec& v) const {
    return std::any_of(pieces.begin(), pieces.end(), [&](const HData& h) { return detail::hdata_contains(h, v); });
  }
};

struct InclusionResult {
  bool holds = true;
  std::optional<QVec> witness;  // point of the left side outside the right side
};

inline InclusionResult inclusion_check(const SliceUnion& a, const SliceUnion& b) {
  if (a.dim != b.dim) throw InvalidInput("inclusion check: dimensions differ");
  for (const auto& p : a.pieces) {
    // Vertices and vertex + ray points make the most readable witnesses.
    const ConvexPolyhedron poly(a.dim, p);
    const auto& v = poly.vrep();
    for (const auto& x : v.points) {
      if (!b.contains(x)) return {false, x};
      for (const auto& r : v.rays) {
        QVec y = x;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += r[i];
        if (!b.contains(y)) return {false, y};
      }
    }
  }
  for (const auto& p : a.pieces)
    if (auto w = detail::uncovered_point(p, b.pieces, 0, a.dim)) return {false, w};
  return {true, std::nullopt};
}

/// Cone unions: a generator of the left side outside the right side is
/// preferred as witness.
inline InclusionResult inclusion_check(const ConeUnion& a, const ConeUnion& b) {
  if (a.dim != b.dim) throw InvalidInput("inclusion check: dimensions differ");
  for (const auto& p : a.pieces)
    for (const auto& g : p.generators())
      if (!b.contains(g)) return {false, g};
  SliceUnion sa{a.dim, {}}, sb{b.dim, {}};
  for (const auto& p : a.pieces) sa.pieces.push_back(detail::cone_hdata(p));
  for (const auto& p : b.pieces) sb.pieces.push_back(detail::cone_hdata(p));
  return inclusion_check(sa, sb);
}

inline bool same_set(const ConeUnion& a, const ConeUnion& b) {
  return inclusion_check(a, b).holds && inclusion_check(b, a).holds;
}

inline bool same_set(const SliceUnion& a, const SliceUnion& b) {
  return inclusion_check(a, b).holds && inclusion_check(b, a).holds;
}

/// { x* : (x*, -z*) in N } for N over (parameter x image) space; the first
/// `n` coordinates are the parameter block.
inline SliceUnion coderivative_slice(const ConeUnion& cone, std::size_t n, const QVec& z_star) {
  if (n + z_star.size() != cone.dim) throw InvalidInput("coderivative slice: dimensions do not add up");
  SliceUnion out;
  out.dim = n;
  for (const auto& piece : cone.pieces) {
    HData h;
    bool infeasible = false;
    for (const auto& row : piece.normals()) {
      QVec ax(row.begin(), row.begin() + static_cast<long>(n));
      QVec az(row.begin() + static_cast<long>(n), row.end());
      Rational rhs = dot(az, z_star);
      if (is_zero(ax)) {
        if (rhs < 0) infeasible = true;
        continue;
      }
      h.a.push_back(ax);
      h.b.push_back(rhs);
    }
    if (infeasible || !detail::hdata_point(h, n)) continue;
    out.pieces.push_back(std::move(h));
  }
  // Drop pieces covered by another piece.
  std::vector<HData> kept;
  for (std::size_t i = 0; i < out.pieces.size(); ++i) {
    bool covered = false;
    for (std::size_t j = 0; j < out.pieces.size() && !covered; ++j) {
      if (i == j) continue;
      const bool inside = !detail::uncovered_point(out.pieces[i], {out.pieces[j]}, 0, n);
      const bool same = inside && !detail::uncovered_point(out.pieces[j], {out.pieces[i]}, 0, n);
      covered = inside && (!same || j < i);
    }
    if (!covered) kept.push_back(out.pieces[i]);
  }
  out.pieces = std::move(kept);
  return out;
}

/// { t + v : v in S }.
inline SliceUnion translate(SliceUnion s, const QVec& t) {
  for (auto& h : s.pieces)
    for (std::size_t i = 0; i < h.a.size(); ++i) h.b[i] += dot(h.a[i], t);
  return s;
}

inline SliceUnion unite(SliceUnion a, const SliceUnion& b) {
  a.pieces.insert(a.pieces.end(), b.pieces.begin(), b.pieces.end());
  return a;
}

/// One-dimensional slices as closed intervals; nullopt bounds are infinite.
struct Interval {
  std::optional<Rational> lo, hi;
};

inline std::vector<Interval> intervals(const SliceUnion& s) {
  if (s.dim != 1) throw InvalidInput("interval form needs a one-dimensional slice");
  std::vector<Interval> out;
  for (const auto& h : s.pieces) {
    Interval iv;
    for (std::size_t i = 0; i < h.a.size(); ++i) {
      const Rational& a = h.a[i][0];
      if (a == 0) continue;
      Rational bound = h.b[i] / a;
      if (a > 0) iv.hi = iv.hi ? std::min(*iv.hi, bound) : bound;
      else iv.lo = iv.lo ? std::max(*iv.lo, bound) : bound;
    }
    out.push_back(iv);
  }
  std::sort(out.begin(), out.end(), [](const Interval& x, const Interval& y) {
    if (!x.lo || !y.lo) return !x.lo && y.lo;
    return *x.lo < *y.lo;
  });
  std::vector<Interval> merged;
  for (const auto& iv : out) {
    if (!merged.empty()) {
      auto& last = merged.back();
      if (!last.hi || (iv.lo && *iv.lo <= *last.hi)) {
        if (last.hi && (!iv.hi || *iv.hi > *last.hi)) last.hi = iv.hi;
        continue;
      }
    }
    merged.push_back(iv);
  }
  return merged;
}

/// "∅", "{0}", "[0, +inf)", "(-inf, 2] u [3, 4]" for one-dimensional slices.
inline std::string describe(const SliceUnion& s) {
  if (s.empty()) return "empty";
  if (s.dim != 1) return std::to_string(s.pieces.size()) + " polyhedral piece(s)";
  std::string out;
  for (const auto& iv : intervals(s)) {
    if (!out.empty()) out += " u ";
    if (iv.lo && iv.hi && *iv.lo == *iv.hi) out += "{" + to_string(*iv.lo) + "}";
    else out += (iv.lo ? "[" + to_string(*iv.lo) : "(-inf") + ", " + (iv.hi ? to_string(*iv.hi) + "]" : "+inf)");
  }
  return out;
}

// --- proximal normal oracle (floating point) ---

namespace detail {

using DMat = std::vector<std::vector<double>>;

// Euclidean projection onto { v : a v <= b } by enumerating independent
// active sets of size <= dim.
inline std::vector<double> project(const DMat& a, const std::vector<double>& b, const std::vector<double>& x) {
  const std::size_t n = x.size();
  auto feasible = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      double s = 0;
      for (std::size_t k = 0; k < n; ++k) s += a[i][k] * v[k];
      if (s > b[i] + 1e-12) return false;
    }
    return true;
  };
  if (feasible(x)) return x;
  std::vector<double> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t size = 1; size <= std::min(n, a.size()); ++size) {
    for_each_subset(a.size(), size, [&](const std::vector<std::size_t>& rows) {
      // Solve (A_S A_S^T) mu = A_S x - b_S, v = x - A_S^T mu.
      const std::size_t k = rows.size();
      std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
          for (std::size_t d = 0; d < n; ++d) g[i][j] += a[rows[i]][d] * a[rows[j]][d];
        double r = -b[rows[i]];
        for (std::size_t d = 0; d < n; ++d) r += a[rows[i]][d] * x[d];
        g[i][k] = r;
      }
      for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
          if (std::abs(g[r][c]) > std::abs(g[piv][c])) piv = r;
        if (std::abs(g[piv][c]) < 1e-12) return;  // dependent rows
        std::swap(g[c], g[piv]);
        for (std::size_t r = 0; r < k; ++r) {
          if (r == c) continue;
          const double f = g[r][c] / g[c][c];
          for (std::size_t j = c; j <= k; ++j) g[r][j] -= f * g[c][j];
        }
      }
      std::vector<double> v = x;
      for (std::size_t i = 0; i < k; ++i) {
        const double mu = g[i][k] / g[i][i];
        for (std::size_t d = 0; d < n; ++d) v[d] -= mu * a[rows[i]][d];
      }
      if (!feasible(v)) return;
      double dist = 0;
      for (std::size_t d = 0; d < n; ++d) dist += (v[d] - x[d]) * (v[d] - x[d]);
      if (dist < best_d) {
        best_d = dist;
        best = v;
      }
    });
  }
  return best;
}

inline DMat to_dmat(const QMat& m) {
  DMat out;
  for (const auto& r : m) out.push_back(to_double(r));
  return out;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

struct ProximalSamples {
  std::vector<std::vector<double>> directions;  // unit vectors x - proj(x)
  std::size_t drawn = 0;                         // sample points drawn (some lie in the set)
};

/// Draws points uniformly in the ball of `radius` around x_bar, projects each
/// onto the union and records the unit direction from the projection to the
/// point.
inline ProximalSamples proximal_normal_oracle(const PolyUnion& u, const QVec& x_bar, std::size_t samples, double radius,
                                              std::uint64_t seed = 20240601) {
  if (!u.contains(x_bar)) throw InvalidInput("reference point is not in the union");
  std::vector<detail::DMat> as;
  std::vector<std::vector<double>> bs;
  for (const auto& p : u.pieces) {
    as.push_back(detail::to_dmat(p.a()));
    bs.push_back(to_double(p.b()));
  }
  const auto center = to_double(x_bar);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ProximalSamples out;
  const std::size_t n = u.dim;
  while (out.drawn < samples) {
    ++out.drawn;
    std::vector<double> dir(n);
    for (double& v : dir) v = gauss(rng);
    const double len = detail::norm2(dir);
    if (len == 0) continue;
    const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = center[k] + r * dir[k] / len;
    std::vector<double> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < as.size(); ++i) {
      auto p = detail::project(as[i], bs[i], x);
      if (p.empty()) continue;
      std::vector<double> d(n);
      for (std::size_t k = 0; k < n; ++k) d[k] = x[k] - p[k];
      const double dist = detail::norm2(d);
      if (dist < best_d) {
        best_d = dist;
        best = d;
      }
    }
    if (best.empty() || best_d < 1e-12) continue;
    for (double& v : best) v /= best_d;
    out.directions.push_back(std::move(best));
  }
  return out;
}

/// Euclidean distance from a unit vector to a cone union (in double).
inline double distance_to_cone_union(const ConeUnion& c, const std::vector<double>& v) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& piece : c.pieces) {
    auto a = detail::to_dmat(piece.normals());
    auto p = a.empty() ? v : detail::project(a, std::vector<double>(a.size(), 0.0), v);
    if (p.empty()) continue;
    double d = 0;
    for (std::size_t k = 0; k < v.size(); ++k) d += (v[k] - p[k]) * (v[k] - p[k]);
    best = std::min(best, std::sqrt(d));
  }
  return best;
}

struct OracleValidation {
  std::size_t directions = 0;
  std::size_t outside = 0;             // directions farther than the tolerance from the cone union
  double worst_containment = 0;        // largest distance seen
  std::size_t generators = 0;
  std::size_t unapproached = 0;        // generators with no direction within the coverage angle
  double worst_coverage = 0;           // largest generator-to-nearest-direction angle
};

inline OracleValidation validate_with_oracle(const ConeUnion& c, const ProximalSamples& s, double containment_tol = 1e-6,
                                             double coverage_angle = 1e-3) {
  OracleValidation v;
  v.directions = s.directions.size();
  for (const auto& d : s.directions) {
    const double dist = distance_to_cone_union(c, d);
    v.worst_containment = std::max(v.worst_containment, dist);
    if (dist > containment_tol) ++v.outside;
  }
  for (const auto& piece : c.pieces) {
    for (const auto& g : piece.generators()) {
      ++v.generators;
      auto gd = to_double(g);
      const double gl = detail::norm2(gd);
      double best = M_PI;
      for (const auto& d : s.directions) {
        double dp = 0;
        for (std::size_t k = 0; k < d.size(); ++k) dp += d[k] * gd[k] / gl;
        best = std::min(best, std::acos(std::clamp(dp, -1.0, 1.0)));
      }
      v.worst_coverage = std::max(v.worst_coverage, best);
      if (best > coverage_angle) ++v.unapproached;
    }
  }
  return v;
}

// --- JSON ---

inline nlohmann::json to_json(const ConeUnion& c) {
  auto pieces = nlohmann::json::array();
  for (const auto& p : c.pieces) pieces.push_back(to_json(p.generators()));
  return {{"dim", c.dim}, {"pieces", pieces}};
}

inline ConeUnion cone_union_from_json(const nlohmann::json& j) {
  ConeUnion c;
  c.dim = j.at("dim").get<std::size_t>();
  for (const auto& p : j.at("pieces")) c.pieces.push_back(PolyCone::from_generators(c.dim, qmat_from_json(p)));
  return c;
}

inline nlohmann::json to_json(const SliceUnion& s) {
  auto pieces = nlohmann::json::array();
  for (const auto& h : s.pieces) pieces.push_back({{"A", to_json(h.a)}, {"b", to_json(h.b)}});
  nlohmann::json j{{"dim", s.dim}, {"pieces", pieces}, {"text", describe(s)}};
  return j;
}

}  // namespace mobilevel
