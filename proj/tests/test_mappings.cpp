#include "mobilevel/catalog.hpp"
#include "mobilevel/mappings.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace mobilevel;

namespace {

constexpr double pi = std::numbers::pi;

bool contains_point(const std::vector<Vec>& pts, const Vec& p, double tol = 1e-12) {
  for (const auto& q : pts) {
    bool same = true;
    for (std::size_t k = 0; same && k < p.size(); ++k) same = std::abs(q[k] - p[k]) <= tol;
    if (same) return true;
  }
  return false;
}

// Distance from t to {0} u [pi, 3pi/2].
double dist_to_sine_set(double t) {
  double d = std::abs(t);
  if (t < pi) d = std::min(d, pi - t);
  else if (t > 1.5 * pi) d = std::min(d, t - 1.5 * pi);
  else d = 0;
  return d;
}

}  // namespace

TEST(PsiSample, SineRampFrontier) {
  auto p = catalog_get("sine-ramp").problem;
  const double h = pi / 1000;
  auto eff = psi_sample(p, {0}, p.default_grid, Concept::eff);
  auto weff = psi_sample(p, {0}, p.default_grid, Concept::weff);
  EXPECT_TRUE(contains_point(eff.points, {0}));
  EXPECT_FALSE(contains_point(eff.points, {pi}));
  EXPECT_TRUE(contains_point(eff.points, {1.5 * pi}));
  EXPECT_TRUE(contains_point(weff.points, {pi}));
  for (const auto& y : eff.points) EXPECT_LE(dist_to_sine_set(y[0]), h) << y[0];
  // Every grid point strictly inside the true set is sampled as efficient.
  for (const auto& y : p.default_grid.points()) {
    if (y[0] > pi && y[0] <= 1.5 * pi) {
      EXPECT_TRUE(contains_point(eff.points, y)) << y[0];
    }
  }
  EXPECT_FALSE(eff.unconfirmed_truncation);
  EXPECT_EQ(eff.truncation_artifacts, 0u);
}

TEST(PsiSample, TruncationArtifactsAreDroppedByOracle) {
  auto p = catalog_get("rotating-halfplane").problem;
  GridSpec g = p.default_grid;
  g.step = {0.1, 0.1};
  auto neg = psi_sample(p, {-0.5}, g, Concept::weff);
  EXPECT_TRUE(neg.points.empty());
  EXPECT_GT(neg.truncation_artifacts, 0u);
  auto eff0 = psi_sample(p, {0}, g, Concept::eff);
  EXPECT_TRUE(eff0.points.empty());
  auto weff0 = psi_sample(p, {0}, g, Concept::weff);
  ASSERT_FALSE(weff0.points.empty());
  for (const auto& y : weff0.points) EXPECT_EQ(y[0], 0.0);
  auto eff1 = psi_sample(p, {1}, g, Concept::eff);
  ASSERT_FALSE(eff1.points.empty());
  for (const auto& y : eff1.points) EXPECT_NEAR(y[0] + y[1], 0.0, 1e-12);

  p.oracles = {};
  auto flagged = psi_sample(p, {0}, g, Concept::weff);
  EXPECT_TRUE(flagged.unconfirmed_truncation);
  EXPECT_TRUE(contains_point(flagged.points, {1.0, -2.0}));
}

TEST(PsiSample, SigmaKeepsEverythingAndBarIsRejected) {
  auto p = catalog_get("wedge-polytope").problem;
  EXPECT_EQ(psi_sample(p, {0}, p.default_grid, Concept::sigma).points.size(), 11u);
  EXPECT_THROW(psi_sample(p, {0}, p.default_grid, Concept::bar), InvalidInput);
  auto eff = psi_sample(p, {0}, p.default_grid, Concept::eff);
  std::vector<Vec> expected = {{-1, 2}, {0, 0}, {2, -1}};
  EXPECT_EQ(eff.points, expected);
}

TEST(GraphSample, CsvHasOneRowPerRecord) {
  auto p = catalog_get("bilinear-segment").problem;
  GridSpec g = p.default_grid;
  g.step = {0.25};
  auto cloud = graph_sample(p, {{-1}, {0}, {1}}, g, Concept::weff);
  // x = -1 and x = 0: all of [0,1]; x = 1: only y = 0.
  EXPECT_EQ(cloud.records.size(), 5u + 5u + 1u);
  std::ostringstream os;
  write_csv(os, cloud);
  std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x1,y1,z1,z2,concept");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 12);
  EXPECT_EQ(cloud.images_at({1}), (std::vector<Vec>{{0, 0}}));
}

TEST(IntermediateClosure, OrderingPathology) {
  auto p = catalog_get("sine-diagonal").problem;
  auto bar = intermediate_closure(p, {{0}}, p.default_grid, 2);
  auto ys = bar.decision_points_at({0});
  EXPECT_TRUE(contains_point(ys, {0, pi}));
  auto cl = psi_closure_slice(p, {0}, p.default_grid, 2);
  EXPECT_FALSE(contains_point(cl, {0, pi}));
  EXPECT_TRUE(contains_point(cl, {pi, pi}));
  EXPECT_TRUE(contains_point(ys, {pi, pi}));
  for (const auto& r : bar.records) EXPECT_EQ(r.tag, Concept::bar);
}

TEST(IntermediateClosure, ArcStripAddsTheArcEnd) {
  auto p = catalog_get("arc-strip").problem;
  GridSpec g = p.default_grid;
  g.step = {0.05, 0.05};
  auto s = closure_slice(p, {1}, g, 2);
  EXPECT_TRUE(contains_point(s.psi_bar.points, {0, 1}));
  EXPECT_TRUE(contains_point(s.psi_bar.points, {-1, 1}));
  EXPECT_FALSE(contains_point(s.psi_bar.points, {-0.25, 1}));
  EXPECT_FALSE(contains_point(s.psi_bar.points, {-0.5, 1}));
  EXPECT_THROW(closure_slice(p, {1}, g, 1), InvalidInput);
}

TEST(Vfr, ArcStripVariantsDiverge) {
  auto p = catalog_get("arc-strip").problem;
  FrontierCache cache(p, p.default_grid);
  EXPECT_FALSE(vfr_feasible(cache, {1}, {-0.25, 1}, VfrVariant::Ebar));
  EXPECT_TRUE(vfr_feasible(cache, {1}, {-0.25, 1}, VfrVariant::Ebar_minusC));
  EXPECT_TRUE(vfr_feasible(cache, {1}, {-0.25, 1}, VfrVariant::Ew));
  EXPECT_FALSE(vfr_feasible(cache, {1}, {-0.25, 1}, VfrVariant::E));
  EXPECT_TRUE(vfr_feasible(cache, {1}, {-1, 1}, VfrVariant::E));
  EXPECT_THROW(vfr_feasible(cache, {1}, {0.5, 0.5}, VfrVariant::E), InfeasiblePoint);
}

TEST(Vfr, MinusConeVariantsAgreeOnGridPoints) {
  auto p = catalog_get("arc-strip").problem;
  GridSpec g = p.default_grid;
  g.step = {0.05, 0.05};
  FrontierCache cache(p, g);
  std::mt19937_64 rng(7);
  std::vector<Vec> xs = {{0.5}, {1.0}, {1.5}};
  std::size_t checked = 0;
  for (const auto& x : xs) {
    auto pts = feasible_sample(p, x, g);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    for (int i = 0; i < 500; ++i) {
      const auto& y = pts[pick(rng)];
      EXPECT_EQ(vfr_feasible(cache, x, y, VfrVariant::E), vfr_feasible(cache, x, y, VfrVariant::E_minusC));
      EXPECT_EQ(vfr_feasible(cache, x, y, VfrVariant::Ew), vfr_feasible(cache, x, y, VfrVariant::Ew_minusC));
      ++checked;
    }
  }
  EXPECT_EQ(checked, 1500u);
}

TEST(Closedness, SineRampMissingLimitPoint) {
  auto p = catalog_get("sine-ramp").problem;
  auto eff = probe_concept(p, Concept::eff, p.default_grid, {0}, {pi});
  EXPECT_EQ(eff.verdict, ClosednessKind::missing_limit_point);
  ASSERT_EQ(eff.witnesses.size(), 11u);
  for (const auto& w : eff.witnesses) {
    ASSERT_TRUE(w.point.has_value());
    EXPECT_LE(w.distance, w.radius);
    EXPECT_TRUE(p.oracles.psi({(*w.point)[0]}, {(*w.point)[1]}));
  }
  auto weff = probe_concept(p, Concept::weff, p.default_grid, {0}, {pi});
  EXPECT_EQ(weff.verdict, ClosednessKind::closed_here);
}

TEST(Closedness, RotatingHalfplaneAtZero) {
  auto p = catalog_get("rotating-halfplane").problem;
  GridSpec g = p.default_grid;
  g.step = {0.1, 0.1};
  auto v = probe_concept(p, Concept::eff, g, {0}, {0, 1});
  EXPECT_EQ(v.verdict, ClosednessKind::missing_limit_point);
  auto w = probe_concept(p, Concept::weff, g, {0}, {0, 1});
  EXPECT_EQ(w.verdict, ClosednessKind::closed_here);
}

TEST(Closedness, ArcStripAndInconclusive) {
  auto p = catalog_get("arc-strip").problem;
  GridSpec g = p.default_grid;
  g.step = {0.05, 0.05};
  EXPECT_EQ(probe_concept(p, Concept::eff, g, {1}, {0, 1}).verdict, ClosednessKind::missing_limit_point);
  EXPECT_EQ(probe_concept(p, Concept::bar, g, {1}, {0, 1}).verdict, ClosednessKind::closed_here);
  // Far from the graph: no samples approach, not a member.
  EXPECT_EQ(probe_concept(p, Concept::eff, g, {1}, {1.5, 1.5}).verdict, ClosednessKind::inconclusive);
  auto j = to_json(probe_concept(p, Concept::eff, g, {1}, {0, 1}));
  EXPECT_EQ(j["verdict"], "missing_limit_point");
  EXPECT_THROW(closedness_probe([](const Vec&) { return true; }, [](const Vec&, double) { return std::vector<Vec>{}; },
                                {0}, {0.1, 0.2}),
               InvalidInput);
}

TEST(Closedness, ImageSpaceProbe) {
  auto p = catalog_get("sine-ramp").problem;
  auto v = probe_concept(p, Concept::eff, p.default_grid, {0}, {0, pi}, true);
  EXPECT_EQ(v.verdict, ClosednessKind::missing_limit_point);
}
