#pragma once

// Parametric lower-level problems P(x): min_C { f(x,y) : y in Gamma(x) },
// their feasibility descriptors, sampling grids and decision-space samplers.

#include "mobilevel/cones.hpp"
#include "mobilevel/expr.hpp"
#include "mobilevel/mo_core.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mobilevel {

using Vec = std::vector<double>;

struct Box {
  Vec lower;
  Vec upper;

  std::size_t dim() const { return lower.size(); }

  void validate(const std::string& what) const {
    if (lower.size() != upper.size()) throw InvalidInput(what + ": lower and upper differ in length");
    for (std::size_t k = 0; k < lower.size(); ++k) {
      if (!std::isfinite(lower[k]) || !std::isfinite(upper[k])) throw InvalidInput(what + ": bounds must be finite");
      if (lower[k] > upper[k]) throw InvalidInput(what + ": lower bound exceeds upper bound");
    }
  }

  bool contains(const Vec& p, double tol = 1e-12) const {
    if (p.size() != lower.size()) return false;
    for (std::size_t k = 0; k < p.size(); ++k)
      if (p[k] < lower[k] - tol || p[k] > upper[k] + tol) return false;
    return true;
  }
};

/// Axis-aligned sampling grid. Axis k carries the ticks lower + i*step inside
/// [lower, upper] plus the k-th coordinate of every probe point; a tick within
/// 1e-9 steps of a probe coordinate is replaced by it.
struct GridSpec {
  Vec lower;
  Vec upper;
  Vec step;
  std::vector<Vec> probes;

  std::size_t dim() const { return lower.size(); }

  void validate() const {
    Box{lower, upper}.validate("grid");
    if (step.size() != lower.size()) throw InvalidInput("grid: step has wrong length");
    for (double s : step)
      if (!(s > 0) || !std::isfinite(s)) throw InvalidInput("grid: steps must be positive");
    for (const auto& p : probes)
      if (!Box{lower, upper}.contains(p, 1e-12)) throw InvalidInput("grid: probe point outside bounds");
  }

  Vec axis(std::size_t k) const {
    Vec ticks;
    const double h = step[k];
    const double span = upper[k] - lower[k];
    const auto count = static_cast<long>(std::floor(span / h + 1e-9));
    for (long i = 0; i <= count; ++i) ticks.push_back(lower[k] + static_cast<double>(i) * h);
    for (const auto& p : probes) {
      const double c = p[k];
      auto it = std::lower_bound(ticks.begin(), ticks.end(), c - 1e-9 * h);
      if (it != ticks.end() && std::abs(*it - c) <= 1e-9 * h) *it = c;
      else ticks.insert(it, c);
    }
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    return ticks;
  }

  std::vector<Vec> axes() const {
    std::vector<Vec> out;
    for (std::size_t k = 0; k < dim(); ++k) out.push_back(axis(k));
    return out;
  }

  /// All grid points in lexicographic order.
  std::vector<Vec> points() const {
    validate();
    auto ax = axes();
    std::vector<Vec> out;
    if (ax.empty()) return {Vec{}};
    std::size_t total = 1;
    for (const auto& a : ax) total *= a.size();
    out.reserve(total);
    Vec p(ax.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == ax.size()) {
        out.push_back(p);
        return;
      }
      for (double t : ax[k]) {
        p[k] = t;
        rec(k + 1);
      }
    };
    rec(0);
    return out;
  }

  /// Same bounds and probes with every step multiplied by `factor`.
  GridSpec scaled(double factor) const {
    GridSpec g = *this;
    for (double& s : g.step) s *= factor;
    return g;
  }

  double max_step() const { return step.empty() ? 0.0 : *std::max_element(step.begin(), step.end()); }
};

inline nlohmann::json to_json(const GridSpec& g) {
  nlohmann::json j{{"lower", g.lower}, {"upper", g.upper}, {"step", g.step}};
  if (!g.probes.empty()) j["probes"] = g.probes;
  return j;
}

/// Numbers may be given as JSON numbers or as strings using the expression
/// grammar without variables ("pi/1000", "3*pi/2").
inline double number_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return Expression::parse(j.get<std::string>(), 0, 0).eval({}, {});
  throw InvalidInput("expected a number or constant expression, got " + j.dump());
}

inline Vec vec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidInput("expected an array of numbers, got " + j.dump());
  Vec v;
  for (const auto& e : j) v.push_back(number_from_json(e));
  return v;
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec g;
  g.lower = vec_from_json(j.at("lower"));
  g.upper = vec_from_json(j.at("upper"));
  if (j.at("step").is_array()) g.step = vec_from_json(j.at("step"));
  else g.step.assign(g.lower.size(), number_from_json(j.at("step")));
  if (j.contains("probes"))
    for (const auto& p : j.at("probes")) g.probes.push_back(vec_from_json(p));
  g.validate();
  return g;
}

enum class FeasibilityKind { box, polyhedral, constraints, oracle };

inline std::string to_string(FeasibilityKind k) {
  switch (k) {
    case FeasibilityKind::box: return "box";
    case FeasibilityKind::polyhedral: return "polyhedral";
    case FeasibilityKind::constraints: return "constraints";
    case FeasibilityKind::oracle: return "oracle";
  }
  return "?";
}

/// Description of Gamma(x) (or of X, with an empty parameter).
///
/// box:         Gamma(x) = box
/// polyhedral:  Gamma(x) = { y in box : A x + B y <= d }
/// constraints: Gamma(x) = union over pieces of { y in box : g(x,y) <= 0 for all g in piece }
/// oracle:      Gamma(x) = { y in box : member(x, y) }
///
/// The box is always finite. Faces flagged in truncated_lower/upper are cuts
/// of an unbounded set rather than genuine constraints.
struct FeasibilityDescriptor {
  FeasibilityKind kind = FeasibilityKind::box;
  Box box;
  std::vector<bool> truncated_lower;
  std::vector<bool> truncated_upper;
  std::vector<Vec> a;
  std::vector<Vec> b;
  Vec d;
  std::vector<std::vector<Expression>> pieces;
  std::function<bool(const Vec&, const Vec&)> member;
  // Extra candidate points (e.g. exact points on a curved boundary) for a grid.
  std::function<std::vector<Vec>(const Vec&, const GridSpec&)> boundary_points;
  double tol = 1e-12;

  bool truncated() const {
    return std::find(truncated_lower.begin(), truncated_lower.end(), true) != truncated_lower.end() ||
           std::find(truncated_upper.begin(), truncated_upper.end(), true) != truncated_upper.end();
  }

  bool on_truncated_face(const Vec& y) const {
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (k < truncated_lower.size() && truncated_lower[k] && std::abs(y[k] - box.lower[k]) <= 1e-9) return true;
      if (k < truncated_upper.size() && truncated_upper[k] && std::abs(y[k] - box.upper[k]) <= 1e-9) return true;
    }
    return false;
  }

  void validate(std::size_t n, std::size_t m) const {
    box.validate("feasibility box");
    if (box.dim() != m) throw InvalidInput("feasibility box has wrong dimension");
    if (!truncated_lower.empty() && truncated_lower.size() != m) throw InvalidInput("truncation flags have wrong length");
    if (!truncated_upper.empty() && truncated_upper.size() != m) throw InvalidInput("truncation flags have wrong length");
    if (kind == FeasibilityKind::polyhedral) {
      if (b.size() != d.size() || (!a.empty() && a.size() != d.size()))
        throw InvalidInput("polyhedral feasibility: A, B and d differ in row count");
      for (const auto& r : b)
        if (r.size() != m) throw InvalidInput("polyhedral feasibility: B has wrong width");
      for (const auto& r : a)
        if (r.size() != n) throw InvalidInput("polyhedral feasibility: A has wrong width");
    }
    if (kind == FeasibilityKind::constraints && pieces.empty()) throw InvalidInput("constraint feasibility without pieces");
    if (kind == FeasibilityKind::oracle && !member) throw InvalidInput("oracle feasibility without membership test");
  }

  bool contains(const Vec& x, const Vec& y) const {
    if (!box.contains(y, tol)) return false;
    switch (kind) {
      case FeasibilityKind::box: return true;
      case FeasibilityKind::polyhedral:
        for (std::size_t i = 0; i < d.size(); ++i) {
          double s = 0;
          if (!a.empty())
            for (std::size_t k = 0; k < x.size(); ++k) s += a[i][k] * x[k];
          for (std::size_t k = 0; k < y.size(); ++k) s += b[i][k] * y[k];
          if (s > d[i] + tol) return false;
        }
        return true;
      case FeasibilityKind::constraints:
        return std::any_of(pieces.begin(), pieces.end(), [&](const std::vector<Expression>& piece) {
          return std::all_of(piece.begin(), piece.end(), [&](const Expression& g) { return g.eval(x, y) <= tol; });
        });
      case FeasibilityKind::oracle: return member(x, y);
    }
    return false;
  }
};

/// Analytic membership tests for the solution and frontier mappings.
/// psi*: (x, y) -> y in the set; phi*: (x, z) -> z in the set.
struct MappingOracles {
  std::function<bool(const Vec&, const Vec&)> psi, psi_w, psi_bar;
  std::function<bool(const Vec&, const Vec&)> phi, phi_w, phi_bar;
};

/// { v : a v <= b } in exact arithmetic.
struct HData {
  QMat a;
  QVec b;
};

/// Local polyhedral models of graphs around a reference point, in the
/// coordinates (x, z) for frontier-type graphs and (x, y) for decision graphs.
struct LocalModels {
  QVec x_bar;
  QVec z_bar;
  std::vector<HData> gph_sigma;
  std::vector<HData> gph_sigma_plus_c;
  std::vector<HData> gph_phi;
  std::vector<HData> gph_phi_w;
  std::vector<HData> gph_gamma;
  std::vector<HData> gph_psi_w;
  struct Preimage {
    QVec y_bar;
    QMat fx;  // q x n Jacobian of f in x at (x_bar, y_bar)
    QMat fy;  // q x m Jacobian of f in y
  };
  std::vector<Preimage> preimages;  // all y in Psi_w(x_bar) with f(x_bar, y) = z_bar
  std::string reduction_note;
};

/// Linear data of the setting f(x,y) = D y, Gamma(x) = { y : A x + B y <= d }.
struct LinearData {
  QMat D;
  QMat A;
  QMat B;
  QVec d;
};

struct ParametricMOP {
  std::string id;
  std::string description;
  std::size_t n = 1, m = 1, q = 2;
  std::function<Vec(const Vec&, const Vec&)> f;
  std::vector<std::string> objective_text;
  FeasibilityDescriptor gamma;
  OrderingCone cone;
  Box parameter_box;
  GridSpec default_grid;
  std::vector<Vec> probes;  // decision-space probe points
  double tau = 0.0;
  bool convex = false;  // f(x,.) C-convex and Gamma(x) convex for every x
  MappingOracles oracles;
  std::optional<LocalModels> models;
  std::optional<LinearData> linear;
  double oracle_tol = 1e-9;

  void validate() const {
    if (n == 0 || m == 0 || q == 0) throw InvalidInput(id + ": dimensions must be positive");
    if (!f) throw InvalidInput(id + ": objective missing");
    if (cone.dim() != q) throw InvalidInput(id + ": cone dimension differs from q");
    gamma.validate(n, m);
    parameter_box.validate(id + " parameter box");
    if (parameter_box.dim() != n) throw InvalidInput(id + ": parameter box has wrong dimension");
  }

  Vec eval(const Vec& x, const Vec& y) const {
    Vec z = f(x, y);
    if (z.size() != q) throw InvalidInput(id + ": objective returned wrong dimension");
    for (double v : z)
      if (!std::isfinite(v)) throw InvalidInput(id + ": objective is undefined at a sampled point");
    return z;
  }

  DominanceOptions dominance() const { return DominanceOptions{tau, true}; }

  /// Grid to use at x: the given grid, or the default one.
  const GridSpec& grid_or_default(const std::optional<GridSpec>& g) const { return g ? *g : default_grid; }
};

/// Decision points of the grid (plus boundary candidates) lying in Gamma(x),
/// lexicographically sorted and unique.
inline std::vector<Vec> feasible_sample(const ParametricMOP& problem, const Vec& x, const GridSpec& grid) {
  if (x.size() != problem.n) throw InvalidInput(problem.id + ": parameter has wrong dimension");
  if (!problem.parameter_box.contains(x, 1e-12)) throw InvalidInput(problem.id + ": parameter outside the parameter box");
  if (grid.dim() != problem.m) throw InvalidInput(problem.id + ": grid dimension differs from m");
  std::vector<Vec> out;
  for (auto& y : grid.points())
    if (problem.gamma.contains(x, y)) out.push_back(std::move(y));
  if (problem.gamma.boundary_points)
    for (auto& y : problem.gamma.boundary_points(x, grid))
      if (problem.gamma.contains(x, y)) out.push_back(std::move(y));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Upper level: min_K { F(x,y) : x in X, y in Psi_hat(x) }.
struct BilevelInstance {
  std::string id;
  ParametricMOP lower;
  std::size_t p = 1;
  std::function<Vec(const Vec&, const Vec&)> F;
  std::vector<std::string> objective_text;
  OrderingCone K;
  FeasibilityDescriptor X;  // evaluated as X.contains({}, x)
  GridSpec x_grid;
  std::vector<std::pair<Vec, Vec>> probes;  // (x, y) points checked for closedness
  double tau = 0.0;

  void validate() const {
    lower.validate();
    if (!F) throw InvalidInput(id + ": upper objective missing");
    if (K.dim() != p) throw InvalidInput(id + ": upper cone dimension differs from p");
    X.validate(0, lower.n);
    if (x_grid.dim() != lower.n) throw InvalidInput(id + ": x grid has wrong dimension");
  }

  Vec eval(const Vec& x, const Vec& y) const {
    Vec v = F(x, y);
    if (v.size() != p) throw InvalidInput(id + ": upper objective returned wrong dimension");
    return v;
  }
};

// --- inline problem specs ---

inline FeasibilityDescriptor feasibility_from_json(const nlohmann::json& j, std::size_t n, std::size_t m,
                                                   char param = 'x', char point = 'y') {
  FeasibilityDescriptor fd;
  const auto kind = j.value("kind", std::string("box"));
  if (!j.contains("box")) throw InvalidInput("feasibility descriptor needs a finite \"box\"");
  fd.box = Box{vec_from_json(j.at("box").at("lower")), vec_from_json(j.at("box").at("upper"))};
  auto flags = [&](const char* key) {
    std::vector<bool> out(m, false);
    if (!j.contains("truncated")) return out;
    const auto& t = j.at("truncated");
    if (t.is_boolean()) return std::vector<bool>(m, t.get<bool>());
    if (t.contains(key)) out = t.at(key).get<std::vector<bool>>();
    return out;
  };
  fd.truncated_lower = flags("lower");
  fd.truncated_upper = flags("upper");
  if (kind == "box") {
    fd.kind = FeasibilityKind::box;
  } else if (kind == "polyhedral") {
    fd.kind = FeasibilityKind::polyhedral;
    if (j.contains("A"))
      for (const auto& r : j.at("A")) fd.a.push_back(vec_from_json(r));
    for (const auto& r : j.at("B")) fd.b.push_back(vec_from_json(r));
    fd.d = vec_from_json(j.at("d"));
  } else if (kind == "constraints") {
    fd.kind = FeasibilityKind::constraints;
    auto parse_piece = [&](const nlohmann::json& list) {
      std::vector<Expression> piece;
      for (const auto& e : list) piece.push_back(Expression::parse(e.get<std::string>(), n, m, param, point));
      return piece;
    };
    if (j.contains("pieces"))
      for (const auto& p : j.at("pieces")) fd.pieces.push_back(parse_piece(p));
    else
      fd.pieces.push_back(parse_piece(j.at("constraints")));
  } else {
    throw InvalidInput("unknown feasibility kind '" + kind + "' (box, polyhedral, constraints)");
  }
  fd.validate(n, m);
  return fd;
}

inline std::function<Vec(const Vec&, const Vec&)> objective_from_strings(const std::vector<std::string>& texts,
                                                                         std::size_t n, std::size_t m) {
  std::vector<Expression> exprs;
  for (const auto& t : texts) exprs.push_back(Expression::parse(t, n, m));
  return [exprs](const Vec& x, const Vec& y) {
    Vec z;
    z.reserve(exprs.size());
    for (const auto& e : exprs) z.push_back(e.eval(x, y));
    return z;
  };
}

inline ParametricMOP problem_from_json(const nlohmann::json& j) {
  ParametricMOP p;
  p.id = j.value("id", std::string("inline"));
  p.description = j.value("description", std::string());
  p.n = j.at("n").get<std::size_t>();
  p.m = j.at("m").get<std::size_t>();
  p.objective_text = j.at("objectives").get<std::vector<std::string>>();
  p.q = p.objective_text.size();
  p.f = objective_from_strings(p.objective_text, p.n, p.m);
  p.cone = j.contains("cone") ? OrderingCone::from_json(j.at("cone")) : OrderingCone::orthant(p.q);
  p.gamma = feasibility_from_json(j.at("feasibility"), p.n, p.m);
  if (j.contains("parameter_box"))
    p.parameter_box = Box{vec_from_json(j.at("parameter_box").at("lower")), vec_from_json(j.at("parameter_box").at("upper"))};
  else
    p.parameter_box = Box{Vec(p.n, -1e6), Vec(p.n, 1e6)};
  if (j.contains("probes"))
    for (const auto& pr : j.at("probes")) p.probes.push_back(vec_from_json(pr));
  if (j.contains("grid")) {
    p.default_grid = grid_from_json(j.at("grid"));
  } else {
    if (!j.contains("step")) throw InvalidInput("problem spec needs \"grid\" or \"step\"");
    double h = number_from_json(j.at("step"));
    p.default_grid = GridSpec{p.gamma.box.lower, p.gamma.box.upper, Vec(p.m, h), {}};
  }
  for (const auto& pr : p.probes)
    if (p.default_grid.probes.end() == std::find(p.default_grid.probes.begin(), p.default_grid.probes.end(), pr))
      p.default_grid.probes.push_back(pr);
  p.tau = j.value("tau", 0.0);
  p.convex = j.value("convex", false);
  p.validate();
  p.default_grid.validate();
  return p;
}

/// Inline bilevel spec: a lower-level spec plus an "upper" object with
/// objectives in x and y, optional cone, an X descriptor over x and an x grid.
inline BilevelInstance bilevel_from_json(const nlohmann::json& j) {
  BilevelInstance b;
  b.lower = problem_from_json(j);
  b.id = b.lower.id;
  const auto& u = j.at("upper");
  b.objective_text = u.at("objectives").get<std::vector<std::string>>();
  b.p = b.objective_text.size();
  b.F = objective_from_strings(b.objective_text, b.lower.n, b.lower.m);
  b.K = u.contains("cone") ? OrderingCone::from_json(u.at("cone")) : OrderingCone::orthant(b.p);
  if (u.contains("X")) {
    b.X = feasibility_from_json(u.at("X"), 0, b.lower.n, '_', 'x');
  } else {
    b.X.kind = FeasibilityKind::box;
    b.X.box = b.lower.parameter_box;
  }
  b.x_grid = u.contains("x_grid") ? grid_from_json(u.at("x_grid"))
                                  : GridSpec{b.X.box.lower, b.X.box.upper, Vec(b.lower.n, 0.1), {}};
  b.tau = u.value("tau", 0.0);
  b.validate();
  return b;
}

}  // namespace mobilevel
