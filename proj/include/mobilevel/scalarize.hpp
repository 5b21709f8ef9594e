#pragma once

// Weighted-sum scalarization P(x, lambda), the weight sets Xi(x, y), and the
// exact hybrid-scalarization efficiency test for linear problems.

#include "mobilevel/cones.hpp"
#include "mobilevel/lp.hpp"
#include "mobilevel/mappings.hpp"
#include "mobilevel/parametric.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace mobilevel {

struct ScalarizedProblem {
  const ParametricMOP* problem = nullptr;
  Vec x;
  Vec lambda;
  SphereNorm norm = SphereNorm::euclidean;

  void validate() const {
    if (!problem) throw InvalidInput("scalarized problem without a lower level");
    if (lambda.size() != problem->q) throw InvalidInput("weight has wrong dimension");
    if (!problem->cone.dual_contains(lambda, 1e-12)) throw InvalidInput("weight is not in the dual cone");
    double s = 0;
    for (double v : lambda) {
      if (norm == SphereNorm::euclidean) s += v * v;
      else if (norm == SphereNorm::one) s += std::abs(v);
      else s = std::max(s, std::abs(v));
    }
    if (norm == SphereNorm::euclidean) s = std::sqrt(s);
    if (std::abs(s - 1) > 1e-12) throw InvalidInput("weight is not on the unit sphere");
  }

  double value(const Vec& y) const {
    const Vec z = problem->eval(x, y);
    double s = 0;
    for (std::size_t k = 0; k < z.size(); ++k) s += lambda[k] * z[k];
    return s;
  }
};

namespace detail {

inline double scalar_slack(double best) { return 1e-12 * std::max(1.0, std::abs(best)); }

inline std::vector<Vec> argmin(const ScalarizedProblem& sp, const std::vector<Vec>& feasible, double* best_out) {
  std::vector<double> values;
  values.reserve(feasible.size());
  for (const auto& y : feasible) values.push_back(sp.value(y));
  const double best = *std::min_element(values.begin(), values.end());
  std::vector<Vec> out;
  for (std::size_t i = 0; i < feasible.size(); ++i)
    if (values[i] <= best + scalar_slack(best)) out.push_back(feasible[i]);
  if (best_out) *best_out = best;
  return out;
}

}  // namespace detail

/// Grid minimizers of <lambda, f(x, .)> over Gamma(x).
inline std::vector<Vec> scalarized_solve(const ParametricMOP& p, const Vec& x, const Vec& lambda, const GridSpec& grid,
                                         SphereNorm norm = SphereNorm::euclidean) {
  ScalarizedProblem sp{&p, x, lambda, norm};
  sp.validate();
  auto feasible = feasible_sample(p, x, grid);
  if (feasible.empty()) throw InvalidInput(p.id + ": empty feasible grid");
  return detail::argmin(sp, feasible, nullptr);
}

struct SweepEntry {
  Vec lambda;
  double value = 0;
  std::vector<Vec> argmin;
  bool critical = false;  // tie weight of two images, not a grid weight
};

/// For two objectives: unit normals of the convex hull edges of the image set
/// that lie in C*, i.e. the weights at which the minimizer jumps.
inline std::vector<Vec> critical_weights(const OrderingCone& cone, std::vector<Vec> images,
                                         SphereNorm norm = SphereNorm::euclidean) {
  std::vector<Vec> out;
  if (cone.dim() != 2) return out;
  images = unique_sorted(std::move(images));
  if (images.size() < 2) return out;
  auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vec> hull;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t base = hull.size();
    for (std::size_t i = 0; i < images.size(); ++i) {
      const Vec& z = pass == 0 ? images[i] : images[images.size() - 1 - i];
      while (hull.size() >= base + 2 && cross(hull[hull.size() - 2], hull.back(), z) <= 0) hull.pop_back();
      hull.push_back(z);
    }
    hull.pop_back();
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec& a = hull[i];
    const Vec& b = hull[(i + 1) % hull.size()];
    // Counter-clockwise hull: the inward normal of edge a -> b is (-e2, e1).
    Vec lambda{-(b[1] - a[1]), b[0] - a[0]};
    if (lambda[0] == 0 && lambda[1] == 0) continue;
    lambda = normalize(lambda, norm);
    if (cone.dual_contains(lambda, 1e-12)) out.push_back(lambda);
  }
  return unique_sorted(std::move(out));
}

struct ScalarizationUnion {
  std::vector<Vec> points;  // sorted, unique
  std::vector<SweepEntry> sweep;
  bool equivalence = false;  // problem flagged convex: the union is Psi_w(x)
  std::string label;
  std::string warning;
};

inline ScalarizationUnion weak_efficiency_via_scalarization(const ParametricMOP& p, const Vec& x, std::size_t resolution,
                                                            const GridSpec& grid,
                                                            SphereNorm norm = SphereNorm::euclidean) {
  ScalarizationUnion u;
  auto feasible = feasible_sample(p, x, grid);
  if (feasible.empty()) throw InvalidInput(p.id + ": empty feasible grid");
  auto weights = dual_sphere_grid(p.cone, resolution, norm);
  const std::size_t grid_weights = weights.size();
  std::vector<Vec> images;
  for (const auto& y : feasible) images.push_back(p.eval(x, y));
  for (auto& l : critical_weights(p.cone, images, norm)) weights.push_back(std::move(l));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Vec& lambda = weights[i];
    ScalarizedProblem sp{&p, x, lambda, norm};
    SweepEntry e;
    e.lambda = lambda;
    e.critical = i >= grid_weights;
    e.argmin = detail::argmin(sp, feasible, &e.value);
    u.points.insert(u.points.end(), e.argmin.begin(), e.argmin.end());
    u.sweep.push_back(std::move(e));
  }
  u.points = unique_sorted(std::move(u.points));
  u.equivalence = p.convex;
  if (p.convex) {
    u.label = "weakly efficient set";
  } else {
    u.label = "scalarization-reachable subset";
    u.warning = "problem is not flagged convex: the union over weights is only a subset of the weakly efficient set";
  }
  return u;
}

/// Sampled weights for which y is a grid minimizer of the scalarized problem,
/// up to a relative slack `tol`.
inline std::vector<Vec> xi_sample(const ParametricMOP& p, const Vec& x, const Vec& y, std::size_t resolution,
                                  const GridSpec& grid, double tol = 1e-9, SphereNorm norm = SphereNorm::euclidean) {
  if (!p.gamma.contains(x, y)) throw InfeasiblePoint(p.id + ": y is not in Gamma(x)");
  auto feasible = feasible_sample(p, x, grid);
  feasible.push_back(y);
  std::vector<Vec> out;
  for (const auto& lambda : dual_sphere_grid(p.cone, resolution, norm)) {
    ScalarizedProblem sp{&p, x, lambda, norm};
    double best = sp.value(feasible.front());
    for (const auto& w : feasible) best = std::min(best, sp.value(w));
    if (sp.value(y) <= best + tol * std::max(1.0, std::abs(best))) out.push_back(lambda);
  }
  return out;
}

// --- linear case ---

struct LinearEfficiency {
  bool efficient = false;
  Rational target;   // e^T D y
  Rational optimum;  // min e^T D y' over the restricted polyhedron
  bool duality_checked = false;
  LpResult lp;
};

/// min e^T D y' s.t. A x + B y' <= d, D y' <= D y; y is efficient iff the
/// optimum equals e^T D y.
inline LinearEfficiency linear_efficiency_test(const LinearData& L, const QVec& x, const QVec& y) {
  const std::size_t q = L.D.size(), m = y.size();
  if (L.B.size() != L.d.size()) throw InvalidInput("linear data: B and d differ in row count");
  QVec shifted = L.d;
  for (std::size_t i = 0; i < L.d.size(); ++i) {
    if (!L.A.empty()) shifted[i] -= dot(L.A[i], x);
    if (dot(L.B[i], y) > shifted[i]) throw InfeasiblePoint("linear efficiency test: y violates A x + B y <= d");
  }
  LinearProgram lp;
  lp.objective.assign(m, Rational(0));
  for (std::size_t k = 0; k < q; ++k)
    for (std::size_t j = 0; j < m; ++j) lp.objective[j] += L.D[k][j];
  lp.rows = L.B;
  lp.rhs = shifted;
  for (std::size_t k = 0; k < q; ++k) {
    lp.rows.push_back(L.D[k]);
    lp.rhs.push_back(dot(L.D[k], y));
  }
  lp.senses.assign(lp.rows.size(), RowSense::le);
  lp.nonnegative.assign(m, false);
  LinearEfficiency out;
  out.target = dot(lp.objective, y);
  out.lp = lp_solve(lp);
  if (out.lp.status != LpStatus::optimal) throw InvalidInput("linear efficiency test: restricted LP is not solvable");
  out.optimum = out.lp.value;
  out.duality_checked = out.lp.duality_checked;
  out.efficient = out.optimum == out.target;
  return out;
}

inline LinearEfficiency linear_efficiency_test(const LinearData& L, const Vec& x, const Vec& y) {
  QVec qx, qy;
  for (double v : x) qx.push_back(Rational(v));
  for (double v : y) qy.push_back(Rational(v));
  return linear_efficiency_test(L, qx, qy);
}

// --- export ---

inline void write_sweep_csv(std::ostream& os, const ScalarizationUnion& u) {
  if (u.sweep.empty()) return;
  const auto q = u.sweep.front().lambda.size();
  const auto m = u.sweep.front().argmin.front().size();
  for (std::size_t k = 0; k < q; ++k) os << "lambda" << k + 1 << ",";
  os << "value";
  for (std::size_t k = 0; k < m; ++k) os << ",y" << k + 1;
  os << ",critical\n";
  for (const auto& e : u.sweep)
    for (const auto& y : e.argmin) {
      for (double v : e.lambda) os << format_double(v) << ",";
      os << format_double(e.value);
      for (double v : y) os << "," << format_double(v);
      os << "," << (e.critical ? 1 : 0) << "\n";
    }
}

inline nlohmann::json to_json(const ScalarizationUnion& u) {
  nlohmann::json j{{"label", u.label}, {"equivalence", u.equivalence}, {"points", u.points},
                   {"weights", u.sweep.size()}};
  if (!u.warning.empty()) j["warning"] = u.warning;
  return j;
}

}  // namespace mobilevel
