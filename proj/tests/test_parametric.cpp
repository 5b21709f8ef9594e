#include "mobilevel/catalog.hpp"
#include "mobilevel/expr.hpp"
#include "mobilevel/parametric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mobilevel;

namespace {

constexpr double pi = std::numbers::pi;

bool has_point(const std::vector<Vec>& pts, const Vec& p, double tol = 1e-12) {
  for (const auto& q : pts) {
    bool same = q.size() == p.size();
    for (std::size_t k = 0; same && k < p.size(); ++k) same = std::abs(q[k] - p[k]) <= tol;
    if (same) return true;
  }
  return false;
}

}  // namespace

TEST(Expression, EvaluatesArithmeticAndFunctions) {
  auto e = Expression::parse("x*y1 - y2^2 + sin(pi/2) / 2", 1, 2);
  EXPECT_DOUBLE_EQ(e.eval({3}, {2, 4}), 6 - 16 + 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("-2^2", 0, 0).eval({}, {}), -4);
  EXPECT_DOUBLE_EQ(Expression::parse("2^-1", 0, 0).eval({}, {}), 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("abs(-3) + sqrt(16) + exp(0) + cos(0)", 0, 0).eval({}, {}), 9);
  EXPECT_DOUBLE_EQ(Expression::parse("(y - x)^2", 1, 1).eval({1}, {-1}), 4);
}

TEST(Expression, ReportsErrorsWithColumn) {
  try {
    Expression::parse("x + * y", 1, 1);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos);
  }
  EXPECT_THROW(Expression::parse("x + y", 1, 2), InvalidInput);
  EXPECT_THROW(Expression::parse("y3", 1, 2), InvalidInput);
  EXPECT_THROW(Expression::parse("foo(1)", 1, 1), InvalidInput);
  EXPECT_THROW(Expression::parse("(1 + 2", 0, 0), InvalidInput);
}

TEST(Grid, ProbesArePinnedExactly) {
  GridSpec g{{0.0}, {2 * pi}, {pi / 1000}, {{0.0}, {pi}, {1.5 * pi}}};
  auto ax = g.axis(0);
  EXPECT_EQ(ax.size(), 2001u);
  EXPECT_TRUE(std::find(ax.begin(), ax.end(), pi) != ax.end());
  EXPECT_TRUE(std::find(ax.begin(), ax.end(), 1.5 * pi) != ax.end());
  EXPECT_TRUE(std::is_sorted(ax.begin(), ax.end()));
}

TEST(Grid, OffGridProbeIsInserted) {
  GridSpec g{{0.0, 0.0}, {1.0, 1.0}, {0.5, 0.5}, {{0.3, 0.5}}};
  EXPECT_EQ(g.axis(0), (Vec{0.0, 0.3, 0.5, 1.0}));
  EXPECT_EQ(g.axis(1), (Vec{0.0, 0.5, 1.0}));
  auto pts = g.points();
  EXPECT_EQ(pts.size(), 12u);
  EXPECT_TRUE(std::is_sorted(pts.begin(), pts.end()));
  EXPECT_EQ(g.scaled(2).step, (Vec{1.0, 1.0}));
}

TEST(Grid, RejectsBadSpecs) {
  EXPECT_THROW((GridSpec{{0.0}, {1.0}, {0.0}, {}}.validate()), InvalidInput);
  EXPECT_THROW((GridSpec{{1.0}, {0.0}, {0.1}, {}}.validate()), InvalidInput);
  EXPECT_THROW((GridSpec{{0.0}, {1.0}, {0.1}, {{2.0}}}.validate()), InvalidInput);
}

TEST(FeasibleSample, WedgeOnUnitGrid) {
  auto p = catalog_get("wedge-polytope").problem;
  auto pts = feasible_sample(p, {0.0}, p.default_grid);
  // Enumerated by hand: y1 = -1 -> {2}; 0 -> {0,1,2}; 1 -> {0,1,2}; 2 -> {-1,0,1,2}.
  std::vector<Vec> expected = {{-1, 2}, {0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}, {2, -1}, {2, 0}, {2, 1}, {2, 2}};
  EXPECT_EQ(pts, expected);
}

TEST(FeasibleSample, ArcStripIncludesExactArcPoints) {
  auto p = catalog_get("arc-strip").problem;
  GridSpec g = p.default_grid;
  g.step = {0.25, 0.25};
  auto pts = feasible_sample(p, {1.0}, g);
  EXPECT_TRUE(has_point(pts, {0.0, 1.0}));
  EXPECT_TRUE(has_point(pts, {1.0, 0.0}));
  EXPECT_TRUE(has_point(pts, {-1.0, 1.0}));
  EXPECT_TRUE(has_point(pts, {0.25, std::sqrt(1 - 0.0625)}));
  EXPECT_TRUE(has_point(pts, {std::sqrt(1 - 0.0625), 0.25}));
  EXPECT_FALSE(has_point(pts, {0.5, 0.5}));
  EXPECT_FALSE(has_point(pts, {-1.25, 1.0}));
  for (const auto& y : pts) EXPECT_TRUE(p.gamma.contains({1.0}, y));
  EXPECT_THROW(feasible_sample(p, {3.0}, g), InvalidInput);
}

TEST(FeasibleSample, Deterministic) {
  auto p = catalog_get("rotating-halfplane").problem;
  EXPECT_EQ(feasible_sample(p, {0.5}, p.default_grid), feasible_sample(p, {0.5}, p.default_grid));
}

TEST(Catalog, AllEntriesValidate) {
  for (const auto& id : catalog_ids()) {
    auto e = catalog_get(id);
    EXPECT_EQ(e.problem.id.empty(), false);
    EXPECT_NO_THROW(e.problem.default_grid.validate());
    for (const auto& pr : e.problem.probes) EXPECT_TRUE(e.problem.gamma.box.contains(pr));
  }
  EXPECT_TRUE(catalog_get("arc-strip").bilevel.has_value());
  EXPECT_TRUE(catalog_get("wedge-polytope").problem.models.has_value());
}

TEST(Catalog, UnknownIdListsValidIds) {
  try {
    catalog_get("nope");
    FAIL();
  } catch (const InvalidInput& e) {
    std::string msg = e.what();
    for (const auto& id : catalog_ids()) EXPECT_NE(msg.find(id), std::string::npos);
  }
}

TEST(Catalog, OraclesAgreeWithDefinitions) {
  auto sr = catalog_get("sine-ramp").problem;
  EXPECT_FALSE(sr.oracles.psi({0}, {pi}));
  EXPECT_TRUE(sr.oracles.psi_w({0}, {pi}));
  EXPECT_TRUE(sr.oracles.psi({0}, {1.5 * pi}));
  EXPECT_TRUE(sr.oracles.psi({0}, {0}));
  EXPECT_FALSE(sr.oracles.psi({0}, {0.5}));
  auto arc = catalog_get("arc-strip").problem;
  EXPECT_FALSE(arc.oracles.psi({1}, {0, 1}));
  EXPECT_TRUE(arc.oracles.psi_bar({1}, {0, 1}));
  EXPECT_TRUE(arc.oracles.psi_w({1}, {-0.25, 1}));
  EXPECT_FALSE(arc.oracles.psi_bar({1}, {-0.25, 1}));
}

TEST(InlineSpec, ProblemFromJson) {
  auto j = nlohmann::json::parse(R"js({
    "id": "inline-ramp", "n": 1, "m": 1,
    "objectives": ["sin(y)", "y"],
    "feasibility": {"kind": "box", "box": {"lower": [0], "upper": ["2*pi"]}},
    "grid": {"lower": [0], "upper": ["2*pi"], "step": "pi/1000"},
    "probes": [[0], ["pi"], ["3*pi/2"]],
    "tau": 1e-12
  })js");
  auto p = problem_from_json(j);
  auto ref = catalog_get("sine-ramp").problem;
  EXPECT_EQ(p.default_grid.points(), ref.default_grid.points());
  for (double y : {0.0, 1.0, pi, 5.0}) EXPECT_EQ(p.eval({0}, {y}), ref.eval({0}, {y}));
  EXPECT_EQ(p.cone.dim(), 2u);
}

TEST(InlineSpec, PolyhedralAndConstraints) {
  auto j = nlohmann::json::parse(R"js({
    "n": 1, "m": 2, "objectives": ["y1", "y2"], "step": 1,
    "feasibility": {"kind": "polyhedral", "box": {"lower": [-2, -2], "upper": [2, 2]},
                    "B": [[-1, -2], [-2, -1]], "d": [0, 0]}
  })js");
  auto p = problem_from_json(j);
  EXPECT_EQ(feasible_sample(p, {0}, p.default_grid).size(), 11u);
  auto c = nlohmann::json::parse(R"js({
    "n": 1, "m": 2, "objectives": ["y1", "y2"], "step": 0.5,
    "feasibility": {"kind": "constraints", "box": {"lower": [-2, -2], "upper": [2, 2]},
                    "pieces": [["x^2 - y1^2 - y2^2", "-y1", "-y2"], ["-1 - y1", "y1", "abs(x) - y2"]],
                    "truncated": {"upper": [true, true]}}
  })js");
  auto q = problem_from_json(c);
  EXPECT_TRUE(q.gamma.contains({1}, {-1, 1}));
  EXPECT_FALSE(q.gamma.contains({1}, {0.5, 0.5}));
  EXPECT_TRUE(q.gamma.on_truncated_face({2, 0}));
  EXPECT_FALSE(q.gamma.on_truncated_face({-2, 0}));
  EXPECT_THROW(problem_from_json(nlohmann::json::parse(R"js({"n":1,"m":1,"objectives":["y"],"step":1,
    "feasibility":{"kind":"weird","box":{"lower":[0],"upper":[1]}}})js")),
               InvalidInput);
}
