#pragma once

// Worked lower-level problems with analytic oracles, probe points and, where
// available, local polyhedral graph models and paired upper levels.

#include "mobilevel/parametric.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace mobilevel {

struct CatalogEntry {
  ParametricMOP problem;
  std::optional<BilevelInstance> bilevel;
};

namespace catalog_detail {

constexpr double pi = std::numbers::pi;

inline Box box(Vec lo, Vec hi) { return Box{std::move(lo), std::move(hi)}; }

inline QVec qv(std::initializer_list<long> xs) {
  QVec v;
  for (long x : xs) v.push_back(Rational(x));
  return v;
}

inline HData hdata(std::initializer_list<std::initializer_list<long>> rows, std::initializer_list<long> rhs) {
  HData h;
  for (auto r : rows) h.a.push_back(qv(r));
  h.b = qv(rhs);
  return h;
}

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// {0} ∪ (pi, 3pi/2] (open) or {0} ∪ [pi, 3pi/2] (closed), the sine-ramp efficient sets.
inline bool sine_set(double t, bool closed, double tol) {
  if (near(t, 0.0, tol)) return true;
  const bool above = closed ? t >= pi - tol : t > pi + tol;
  return above && t <= 1.5 * pi + tol;
}

inline FeasibilityDescriptor box_feasibility(Vec lo, Vec hi) {
  FeasibilityDescriptor fd;
  fd.kind = FeasibilityKind::box;
  fd.box = box(std::move(lo), std::move(hi));
  fd.truncated_lower.assign(fd.box.dim(), false);
  fd.truncated_upper.assign(fd.box.dim(), false);
  return fd;
}

inline ParametricMOP sine_ramp() {
  ParametricMOP p;
  p.id = "sine-ramp";
  p.description = "f(x,y) = (sin y, y) on Gamma(x) = [0, 2pi]; efficient set {0} u (pi, 3pi/2] is not closed";
  p.n = 1, p.m = 1, p.q = 2;
  p.f = [](const Vec&, const Vec& y) { return Vec{std::sin(y[0]), y[0]}; };
  p.objective_text = {"sin(y)", "y"};
  p.gamma = box_feasibility({0.0}, {2 * pi});
  p.cone = OrderingCone::orthant(2);
  p.parameter_box = box({-1.0}, {1.0});
  p.probes = {{0.0}, {pi}, {1.5 * pi}};
  p.default_grid = GridSpec{{0.0}, {2 * pi}, {pi / 1000}, p.probes};
  // sin(pi) evaluates to 1.2e-16 > 0, which would otherwise let (0, 0) miss weak domination of y = pi.
  p.tau = 1e-12;
  const double tol = p.oracle_tol;
  p.oracles.psi = [tol](const Vec&, const Vec& y) { return sine_set(y[0], false, tol); };
  p.oracles.psi_w = [tol](const Vec&, const Vec& y) { return sine_set(y[0], true, tol); };
  p.oracles.psi_bar = p.oracles.psi_w;
  p.oracles.phi = [tol](const Vec&, const Vec& z) { return near(z[0], std::sin(z[1]), tol) && sine_set(z[1], false, tol); };
  p.oracles.phi_w = [tol](const Vec&, const Vec& z) { return near(z[0], std::sin(z[1]), tol) && sine_set(z[1], true, tol); };
  p.oracles.phi_bar = p.oracles.phi_w;
  return p;
}

inline ParametricMOP rotating_halfplane() {
  ParametricMOP p;
  p.id = "rotating-halfplane";
  p.description = "f(x,y) = y on Gamma(x) = {y : y1 + x y2 >= 0}, truncated to [-2,2]^2";
  p.n = 1, p.m = 2, p.q = 2;
  p.f = [](const Vec&, const Vec& y) { return y; };
  p.objective_text = {"y1", "y2"};
  p.gamma.kind = FeasibilityKind::oracle;
  p.gamma.box = box({-2.0, -2.0}, {2.0, 2.0});
  p.gamma.truncated_lower = {true, true};
  p.gamma.truncated_upper = {true, true};
  p.gamma.member = [](const Vec& x, const Vec& y) { return y[0] + x[0] * y[1] >= -1e-12; };
  p.cone = OrderingCone::orthant(2);
  p.parameter_box = box({-1.0}, {1.0});
  p.probes = {{0.0, 1.0}, {0.0, 0.0}};
  p.default_grid = GridSpec{{-2.0, -2.0}, {2.0, 2.0}, {0.05, 0.05}, p.probes};
  const double tol = p.oracle_tol;
  auto on_line = [tol](const Vec& x, const Vec& y) { return near(y[0] + x[0] * y[1], 0.0, tol); };
  p.oracles.psi = [=](const Vec& x, const Vec& y) { return x[0] > tol && on_line(x, y); };
  p.oracles.psi_w = [=](const Vec& x, const Vec& y) { return x[0] >= -tol && on_line(x, y); };
  p.oracles.psi_bar = p.oracles.psi_w;
  p.oracles.phi = p.oracles.psi;
  p.oracles.phi_w = p.oracles.psi_w;
  p.oracles.phi_bar = p.oracles.psi_w;
  return p;
}

inline ParametricMOP sine_diagonal() {
  ParametricMOP p;
  p.id = "sine-diagonal";
  p.description = "f(x,y) = (sin y1, y2) on the diagonal segment from (0,0) to (2pi,2pi) plus the point (0,pi)";
  p.n = 1, p.m = 2, p.q = 2;
  p.f = [](const Vec&, const Vec& y) { return Vec{std::sin(y[0]), y[1]}; };
  p.objective_text = {"sin(y1)", "y2"};
  p.gamma.kind = FeasibilityKind::oracle;
  p.gamma.box = box({0.0, 0.0}, {2 * pi, 2 * pi});
  p.gamma.truncated_lower = {false, false};
  p.gamma.truncated_upper = {false, false};
  p.gamma.member = [](const Vec&, const Vec& y) {
    return near(y[0], y[1], 1e-12) || (near(y[0], 0.0, 1e-12) && near(y[1], pi, 1e-12));
  };
  p.cone = OrderingCone::orthant(2);
  p.parameter_box = box({-1.0}, {1.0});
  p.probes = {{0.0, 0.0}, {pi, pi}, {1.5 * pi, 1.5 * pi}, {0.0, pi}};
  p.default_grid = GridSpec{{0.0, 0.0}, {2 * pi, 2 * pi}, {pi / 200, pi / 200}, p.probes};
  p.tau = 1e-12;
  const double tol = p.oracle_tol;
  auto on_diag = [tol](const Vec& y) { return near(y[0], y[1], tol); };
  auto isolated = [tol](const Vec& y) { return near(y[0], 0.0, tol) && near(y[1], pi, tol); };
  p.oracles.psi = [=](const Vec&, const Vec& y) { return on_diag(y) && sine_set(y[1], false, tol); };
  p.oracles.psi_w = [=](const Vec&, const Vec& y) { return (on_diag(y) && sine_set(y[1], true, tol)) || isolated(y); };
  p.oracles.psi_bar = p.oracles.psi_w;
  p.oracles.phi = [tol](const Vec&, const Vec& z) { return near(z[0], std::sin(z[1]), tol) && sine_set(z[1], false, tol); };
  p.oracles.phi_w = [tol](const Vec&, const Vec& z) { return near(z[0], std::sin(z[1]), tol) && sine_set(z[1], true, tol); };
  p.oracles.phi_bar = p.oracles.phi_w;
  return p;
}

inline ParametricMOP arc_strip() {
  ParametricMOP p;
  p.id = "arc-strip";
  p.description =
      "f(x,y) = y on {y >= 0 : |y| >= |x|} u ([-1,0] x [|x|, inf)), truncated to [-1.5,2]^2";
  p.n = 1, p.m = 2, p.q = 2;
  p.f = [](const Vec&, const Vec& y) { return y; };
  p.objective_text = {"y1", "y2"};
  p.gamma.kind = FeasibilityKind::oracle;
  p.gamma.box = box({-1.5, -1.5}, {2.0, 2.0});
  p.gamma.truncated_lower = {false, false};
  p.gamma.truncated_upper = {true, true};
  p.gamma.member = [](const Vec& x, const Vec& y) {
    const double r = std::abs(x[0]);
    const double e = 1e-12;
    const bool quadrant = y[0] >= -e && y[1] >= -e && y[0] * y[0] + y[1] * y[1] >= r * r - e;
    const bool strip = y[0] >= -1 - e && y[0] <= e && y[1] >= r - e;
    return quadrant || strip;
  };
  // Exact arc points over the ticks of both axes.
  p.gamma.boundary_points = [](const Vec& x, const GridSpec& g) {
    const double r = std::abs(x[0]);
    std::vector<Vec> out;
    auto ax = g.axes();
    for (double t : ax[0])
      if (t >= 0 && t <= r) out.push_back({t, std::sqrt(r * r - t * t)});
    for (double t : ax[1])
      if (t >= 0 && t <= r) out.push_back({std::sqrt(r * r - t * t), t});
    return out;
  };
  p.cone = OrderingCone::orthant(2);
  p.parameter_box = box({-2.0}, {2.0});
  p.probes = {{0.0, 1.0}, {-1.0, 1.0}, {-0.25, 1.0}};
  p.default_grid = GridSpec{{-1.5, -1.5}, {2.0, 2.0}, {0.01, 0.01}, p.probes};
  const double tol = p.oracle_tol;
  auto arc = [tol](const Vec& x, const Vec& y) {
    return y[0] >= -tol && y[1] >= -tol && near(std::hypot(y[0], y[1]), std::abs(x[0]), tol);
  };
  auto corner = [tol](const Vec& x, const Vec& y) { return near(y[0], -1.0, tol) && near(y[1], std::abs(x[0]), tol); };
  p.oracles.psi = [=](const Vec& x, const Vec& y) {
    if (near(x[0], 0.0, tol)) return near(y[0], -1.0, tol) && near(y[1], 0.0, tol);
    return (arc(x, y) && y[0] > tol) || corner(x, y);
  };
  p.oracles.psi_w = [=](const Vec& x, const Vec& y) {
    const double r = std::abs(x[0]);
    return arc(x, y) || (near(y[1], r, tol) && y[0] >= -1 - tol && y[0] <= tol) ||
           (near(y[1], 0.0, tol) && y[0] >= r - tol) || (near(y[0], -1.0, tol) && y[1] >= r - tol);
  };
  p.oracles.psi_bar = [=](const Vec& x, const Vec& y) { return arc(x, y) || corner(x, y); };
  p.oracles.phi = p.oracles.psi;
  p.oracles.phi_w = p.oracles.psi_w;
  p.oracles.phi_bar = p.oracles.psi_bar;
  return p;
}

inline ParametricMOP wedge_polytope() {
  ParametricMOP p;
  p.id = "wedge-polytope";
  p.description = "f(x,y) = y on {y : y1 + 2y2 >= 0, 2y1 + y2 >= 0, y1 <= 2, y2 <= 2}";
  p.n = 1, p.m = 2, p.q = 2;
  p.f = [](const Vec&, const Vec& y) { return y; };
  p.objective_text = {"y1", "y2"};
  p.gamma.kind = FeasibilityKind::polyhedral;
  p.gamma.box = box({-2.0, -2.0}, {2.0, 2.0});
  p.gamma.truncated_lower = {false, false};
  p.gamma.truncated_upper = {false, false};
  p.gamma.a = {{0.0}, {0.0}, {0.0}, {0.0}};
  p.gamma.b = {{-1.0, -2.0}, {-2.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  p.gamma.d = {0.0, 0.0, 2.0, 2.0};
  p.cone = OrderingCone::orthant(2);
  p.parameter_box = box({-1.0}, {1.0});
  p.probes = {{0.0, 0.0}, {-1.0, 2.0}, {2.0, -1.0}};
  p.default_grid = GridSpec{{-2.0, -2.0}, {2.0, 2.0}, {1.0, 1.0}, p.probes};
  p.convex = true;
  p.linear = LinearData{{qv({1, 0}), qv({0, 1})},
                        {qv({0}), qv({0}), qv({0}), qv({0})},
                        {qv({-1, -2}), qv({-2, -1}), qv({1, 0}), qv({0, 1})},
                        qv({0, 0, 2, 2})};
  const double tol = p.oracle_tol;
  auto frontier = [tol](const Vec&, const Vec& y) {
    const bool seg1 = near(2 * y[0] + y[1], 0.0, tol) && y[0] >= -1 - tol && y[0] <= tol;
    const bool seg2 = near(y[0] + 2 * y[1], 0.0, tol) && y[0] >= -tol && y[0] <= 2 + tol;
    return seg1 || seg2;
  };
  p.oracles.psi = p.oracles.psi_w = p.oracles.psi_bar = frontier;
  p.oracles.phi = p.oracles.phi_w = p.oracles.phi_bar = frontier;

  // Coordinates (x, z1, z2); the problem does not depend on x.
  LocalModels mdl;
  mdl.x_bar = qv({0});
  mdl.z_bar = qv({0, 0});
  HData sigma = hdata({{0, -1, -2}, {0, -2, -1}, {0, 1, 0}, {0, 0, 1}}, {0, 0, 2, 2});
  mdl.gph_sigma = {sigma};
  mdl.gph_gamma = {sigma};
  mdl.gph_sigma_plus_c = {hdata({{0, -1, -2}, {0, -2, -1}}, {0, 0})};
  HData seg1 = hdata({{0, 2, 1}, {0, -2, -1}, {0, -1, 0}, {0, 1, 0}}, {0, 0, 1, 0});
  HData seg2 = hdata({{0, 1, 2}, {0, -1, -2}, {0, 1, 0}, {0, -1, 0}}, {0, 0, 2, 0});
  mdl.gph_phi = mdl.gph_phi_w = mdl.gph_psi_w = {seg1, seg2};
  mdl.preimages = {{qv({0, 0}), {qv({0}), qv({0})}, {qv({1, 0}), qv({0, 1})}}};
  mdl.reduction_note = "exact: every graph is R times a polyhedral set";
  p.models = mdl;
  return p;
}

inline ParametricMOP bilinear_segment() {
  ParametricMOP p;
  p.id = "bilinear-segment";
  p.description = "f(x,y) = (x y, y) on Gamma(x) = [0, 1]";
  p.n = 1, p.m = 1, p.q = 2;
  p.f = [](const Vec& x, const Vec& y) { return Vec{x[0] * y[0], y[0]}; };
  p.objective_text = {"x*y", "y"};
  p.gamma = box_feasibility({0.0}, {1.0});
  p.cone = OrderingCone::orthant(2);
  p.parameter_box = box({-1.0}, {1.0});
  p.probes = {{0.0}, {1.0}};
  p.default_grid = GridSpec{{0.0}, {1.0}, {0.01}, p.probes};
  p.convex = true;
  const double tol = p.oracle_tol;
  auto in01 = [tol](double t) { return t >= -tol && t <= 1 + tol; };
  p.oracles.psi = [=](const Vec& x, const Vec& y) { return x[0] < -tol ? in01(y[0]) : near(y[0], 0.0, tol); };
  p.oracles.psi_w = [=](const Vec& x, const Vec& y) { return x[0] <= tol ? in01(y[0]) : near(y[0], 0.0, tol); };
  p.oracles.psi_bar = p.oracles.psi_w;
  auto image_of = [tol](const Vec& x, const Vec& z) { return near(z[0], x[0] * z[1], tol); };
  p.oracles.phi = [=](const Vec& x, const Vec& z) { return image_of(x, z) && (x[0] < -tol ? in01(z[1]) : near(z[1], 0.0, tol)); };
  p.oracles.phi_w = [=](const Vec& x, const Vec& z) { return image_of(x, z) && (x[0] <= tol ? in01(z[1]) : near(z[1], 0.0, tol)); };
  p.oracles.phi_bar = p.oracles.phi_w;

  // Local models at x = 0, z = (0,0), y = 0. Coordinates (x, z1, z2) and (x, y).
  // The triangle fan {(x, x t, t) : x <= 0} is replaced by its tangent set
  // {x <= 0, z1 = 0, z2 >= 0}; the true graphs deviate from the models by O(r^2)
  // within radius r, and the constraint y <= 1 is inactive at y = 0.
  LocalModels mdl;
  mdl.x_bar = qv({0});
  mdl.z_bar = qv({0, 0});
  mdl.gph_sigma = {hdata({{0, 1, 0}, {0, -1, 0}, {0, 0, -1}}, {0, 0, 0})};
  mdl.gph_sigma_plus_c = {hdata({{0, -1, 0}, {0, 0, -1}}, {0, 0})};
  HData fan = hdata({{1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, -1}}, {0, 0, 0, 0});
  HData ray = hdata({{-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}, {0, 0, 0, 0, 0});
  mdl.gph_phi_w = {fan, ray};
  mdl.gph_phi = {fan, ray};
  mdl.gph_gamma = {hdata({{0, -1}, {0, 1}}, {0, 1})};
  mdl.gph_psi_w = {hdata({{1, 0}, {0, -1}}, {0, 0}), hdata({{-1, 0}, {0, 1}, {0, -1}}, {0, 0, 0})};
  mdl.preimages = {{qv({0}), {qv({0}), qv({0})}, {qv({0}), qv({1})}}};
  mdl.reduction_note = "triangle fan over x <= 0 replaced by its tangent set; deviation O(r^2) at radius r";
  p.models = mdl;
  return p;
}

inline ParametricMOP convex_pair() {
  ParametricMOP p;
  p.id = "convex-pair";
  p.description = "f(x,y) = ((y - x)^2, (y + 1)^2) on Gamma(x) = [-2, 2]; strictly convex components";
  p.n = 1, p.m = 1, p.q = 2;
  p.f = [](const Vec& x, const Vec& y) { return Vec{(y[0] - x[0]) * (y[0] - x[0]), (y[0] + 1) * (y[0] + 1)}; };
  p.objective_text = {"(y - x)^2", "(y + 1)^2"};
  p.gamma = box_feasibility({-2.0}, {2.0});
  p.cone = OrderingCone::orthant(2);
  p.parameter_box = box({-1.0}, {1.0});
  p.probes = {{-1.0}};
  p.default_grid = GridSpec{{-2.0}, {2.0}, {0.02}, p.probes};
  p.convex = true;
  const double tol = p.oracle_tol;
  auto between = [tol](const Vec& x, double y) {
    return y >= std::min(x[0], -1.0) - tol && y <= std::max(x[0], -1.0) + tol;
  };
  p.oracles.psi = p.oracles.psi_w = p.oracles.psi_bar = [=](const Vec& x, const Vec& y) { return between(x, y[0]); };
  auto frontier = [=](const Vec& x, const Vec& z) {
    if (z[1] < -tol) return false;
    const double s = std::sqrt(std::max(z[1], 0.0));
    for (double y : {s - 1, -s - 1})
      if (between(x, y) && near((y - x[0]) * (y - x[0]), z[0], 1e-7)) return true;
    return false;
  };
  p.oracles.phi = p.oracles.phi_w = p.oracles.phi_bar = frontier;
  return p;
}

inline FeasibilityDescriptor x_interval(double lo, double hi, bool truncated_hi) {
  FeasibilityDescriptor fd = box_feasibility({lo}, {hi});
  fd.truncated_upper = {truncated_hi};
  return fd;
}

inline BilevelInstance arc_strip_bilevel() {
  BilevelInstance b;
  b.id = "arc-strip";
  b.lower = arc_strip();
  b.p = 1;
  b.F = [](const Vec&, const Vec& y) { return Vec{(y[0] + 0.25) * (y[0] + 0.25) + y[1] * y[1]}; };
  b.objective_text = {"(y1 + 1/4)^2 + y2^2"};
  b.K = OrderingCone::orthant(1);
  b.X = x_interval(1.0, 2.0, true);
  b.x_grid = GridSpec{{1.0}, {2.0}, {0.01}, {}};
  b.probes = {{{1.0}, {0.0, 1.0}}, {{1.0}, {-1.0, 1.0}}, {{1.0}, {-0.25, 1.0}}};
  return b;
}

inline BilevelInstance sine_ramp_bilevel() {
  BilevelInstance b;
  b.id = "sine-ramp-bilevel";
  b.lower = sine_ramp();
  b.lower.id = "sine-ramp-bilevel";
  b.p = 2;
  b.F = [](const Vec&, const Vec& y) { return Vec{std::cos(y[0]) + 1, (y[0] - pi) * (y[0] - pi)}; };
  b.objective_text = {"cos(y) + 1", "(y - pi)^2"};
  b.K = OrderingCone::orthant(2);
  b.X = x_interval(-1.0, 1.0, true);
  b.X.truncated_lower = {true};
  b.x_grid = GridSpec{{-1.0}, {1.0}, {0.5}, {}};
  return b;
}

inline BilevelInstance convex_pair_bilevel() {
  BilevelInstance b;
  b.id = "convex-pair";
  b.lower = convex_pair();
  b.p = 1;
  b.F = [](const Vec& x, const Vec& y) { return Vec{(x[0] - 0.5) * (x[0] - 0.5) + (y[0] - 0.3) * (y[0] - 0.3)}; };
  b.objective_text = {"(x - 1/2)^2 + (y - 3/10)^2"};
  b.K = OrderingCone::orthant(1);
  b.X = x_interval(-1.0, 1.0, false);
  b.x_grid = GridSpec{{-1.0}, {1.0}, {0.1}, {}};
  return b;
}

}  // namespace catalog_detail

inline std::vector<std::string> catalog_ids() {
  return {"arc-strip",  "bilinear-segment",  "convex-pair",   "rotating-halfplane",
          "sine-diagonal", "sine-ramp", "sine-ramp-bilevel", "wedge-polytope"};
}

inline CatalogEntry catalog_get(const std::string& id) {
  using namespace catalog_detail;
  CatalogEntry e;
  if (id == "sine-ramp") e.problem = sine_ramp();
  else if (id == "rotating-halfplane") e.problem = rotating_halfplane();
  else if (id == "sine-diagonal") e.problem = sine_diagonal();
  else if (id == "arc-strip") {
    e.bilevel = arc_strip_bilevel();
    e.problem = e.bilevel->lower;
  } else if (id == "wedge-polytope") e.problem = wedge_polytope();
  else if (id == "bilinear-segment") e.problem = bilinear_segment();
  else if (id == "convex-pair") {
    e.bilevel = convex_pair_bilevel();
    e.problem = e.bilevel->lower;
  } else if (id == "sine-ramp-bilevel") {
    e.bilevel = sine_ramp_bilevel();
    e.problem = e.bilevel->lower;
  } else {
    std::string valid;
    for (const auto& k : catalog_ids()) valid += (valid.empty() ? "" : ", ") + k;
    throw InvalidInput("unknown catalog id '" + id + "'; valid ids: " + valid);
  }
  e.problem.validate();
  if (e.bilevel) e.bilevel->validate();
  return e;
}

}  // namespace mobilevel
