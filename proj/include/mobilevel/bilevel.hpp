#pragma once

// Discrete bilevel solving over gph Psi_hat ∩ (X x R^m) for the three
// lower-level solution concepts, existence diagnostics and concept comparison.

#include "mobilevel/mappings.hpp"
#include "mobilevel/mo_core.hpp"
#include "mobilevel/parametric.hpp"
#include "mobilevel/spatial.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace mobilevel {

struct SolveOptions {
  std::optional<GridSpec> x_grid;  // default: instance.x_grid
  std::optional<GridSpec> y_grid;  // default: lower.default_grid
  std::size_t levels = 2;          // refinement levels for the bar concept
  double local_radius_steps = 3;   // neighbourhood of the local-minimality tag, in grid steps
  bool probe = true;               // closedness probes at minimizers and nearby probe points
  std::optional<GridSpec> probe_grid;  // base grid of the probes; default: y grid
};

struct BilevelPair {
  Vec x, y;
  Vec value;
  bool efficient = false;
  bool weakly_efficient = false;
  bool locally_minimal = false;
  bool on_truncated_face = false;
};

struct MinimizerFlag {
  std::size_t pair = 0;  // index into SolveReport::pairs
  ClosednessVerdict at_pair;
  std::vector<ClosednessVerdict> nearby;  // probe points within the local radius
  bool near_missing_limit_point = false;
};

struct SolveReport {
  std::string instance;
  Concept concept_used = Concept::weff;
  GridSpec x_grid, y_grid;
  std::size_t levels = 0;
  double local_radius_steps = 0;
  std::vector<BilevelPair> pairs;  // all feasible discrete pairs, sorted by (x, y)
  std::vector<std::size_t> efficient, weakly_efficient, local_minimizers;
  std::vector<MinimizerFlag> flags;
  bool existence = false;
  std::string reason;
  std::vector<std::string> caveats;
  std::size_t truncation_artifacts = 0;
};

namespace detail {

inline std::vector<Vec> x_points(const BilevelInstance& inst, const GridSpec& g) {
  std::vector<Vec> out;
  for (auto& x : g.points())
    if (inst.X.contains({}, x) && inst.lower.parameter_box.contains(x, 1e-12)) out.push_back(std::move(x));
  return out;
}

inline SliceSample concept_slice(const ParametricMOP& p, const Vec& x, const GridSpec& g, Concept c, std::size_t levels) {
  if (c == Concept::bar) return closure_slice(p, x, g, levels).psi_bar;
  if (c == Concept::sigma) throw InvalidInput("bilevel solve needs eff, weff or bar");
  return psi_sample(p, x, g, c);
}

inline Vec joined(const Vec& x, const Vec& y) {
  Vec v = x;
  v.insert(v.end(), y.begin(), y.end());
  return v;
}

inline Vec scaled(const Vec& v, const Vec& steps) {
  Vec out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] / steps[k];
  return out;
}

}  // namespace detail

/// min_K F(x, y) over grid pairs with x in X and y in Psi_hat(x).
inline SolveReport solve(const BilevelInstance& inst, Concept c, const SolveOptions& opt = {}) {
  inst.validate();
  const ParametricMOP& p = inst.lower;
  SolveReport r;
  r.instance = inst.id;
  r.concept_used = c;
  r.x_grid = opt.x_grid ? *opt.x_grid : inst.x_grid;
  r.y_grid = opt.y_grid ? *opt.y_grid : p.default_grid;
  r.x_grid.validate();
  r.y_grid.validate();
  r.levels = opt.levels;
  r.local_radius_steps = opt.local_radius_steps;

  bool unconfirmed = false;
  for (const auto& x : detail::x_points(inst, r.x_grid)) {
    auto s = detail::concept_slice(p, x, r.y_grid, c, opt.levels);
    unconfirmed |= s.unconfirmed_truncation;
    r.truncation_artifacts += s.truncation_artifacts;
    for (const auto& y : s.points) {
      BilevelPair bp;
      bp.x = x;
      bp.y = y;
      bp.value = inst.eval(x, y);
      bp.on_truncated_face = p.gamma.on_truncated_face(y) || inst.X.on_truncated_face(x);
      r.pairs.push_back(std::move(bp));
    }
  }
  if (r.pairs.empty()) {
    r.reason = "no feasible discrete pair: the x grid misses the domain of the lower-level solution map within X";
    return r;
  }

  ImageSet<double> images;
  for (const auto& bp : r.pairs) images.points.push_back(bp.value);
  const DominanceOptions dom{inst.tau, true};
  r.efficient = nondominated(images, inst.K, dom);
  r.weakly_efficient = weakly_nondominated(images, inst.K, dom);
  for (auto i : r.efficient) r.pairs[i].efficient = true;
  for (auto i : r.weakly_efficient) r.pairs[i].weakly_efficient = true;

  // Local minimality: no pair within the radius (in grid steps) K-dominates.
  Vec steps = r.x_grid.step;
  steps.insert(steps.end(), r.y_grid.step.begin(), r.y_grid.step.end());
  std::vector<Vec> scaled;
  for (const auto& bp : r.pairs) scaled.push_back(detail::scaled(detail::joined(bp.x, bp.y), steps));
  const double radius = opt.local_radius_steps + 1e-9;
  PointIndex index(scaled, radius);
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    bool dominated = false;
    index.for_each_within(scaled[i], radius, [&](std::size_t j) {
      if (!dominated && j != i) dominated = detail::dominates(inst.K, r.pairs[j].value, r.pairs[i].value, false, inst.tau);
    });
    r.pairs[i].locally_minimal = !dominated;
    if (!dominated && !r.pairs[i].efficient) r.local_minimizers.push_back(i);
  }

  r.existence = !r.efficient.empty();
  r.reason = "discrete minimizers found";

  if (opt.probe && detail::psi_oracle(p, c)) {
    const GridSpec& pg = opt.probe_grid ? *opt.probe_grid : r.y_grid;
    std::vector<std::pair<Vec, Vec>> candidates = inst.probes;
    for (auto i : r.efficient)
      for (const auto& y : p.probes) candidates.emplace_back(r.pairs[i].x, y);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::map<std::pair<Vec, Vec>, ClosednessVerdict> probed;
    for (auto i : r.efficient) {
      const auto& bp = r.pairs[i];
      MinimizerFlag f;
      f.pair = i;
      f.at_pair = probe_concept(p, c, pg, bp.x, bp.y);
      const Vec here = detail::scaled(detail::joined(bp.x, bp.y), steps);
      for (const auto& cand : candidates) {
        if (PointIndex::distance(detail::scaled(detail::joined(cand.first, cand.second), steps), here) > radius) continue;
        auto it = probed.find(cand);
        if (it == probed.end()) it = probed.emplace(cand, probe_concept(p, c, pg, cand.first, cand.second)).first;
        f.nearby.push_back(it->second);
        if (it->second.verdict == ClosednessKind::missing_limit_point) f.near_missing_limit_point = true;
      }
      if (f.at_pair.verdict == ClosednessKind::missing_limit_point) f.near_missing_limit_point = true;
      r.flags.push_back(std::move(f));
    }
    if (std::any_of(r.flags.begin(), r.flags.end(), [](const MinimizerFlag& f) { return f.near_missing_limit_point; }))
      r.reason = "discrete minimizer at a flagged missing limit point of the solution graph; a continuum minimizer may not exist";
  }

  if (unconfirmed) r.caveats.push_back("unconfirmed-on-truncated-box");
  if (r.truncation_artifacts) r.caveats.push_back("truncation artifacts dropped by the lower-level oracle");
  if (std::any_of(r.efficient.begin(), r.efficient.end(), [&](std::size_t i) { return r.pairs[i].on_truncated_face; }))
    r.caveats.push_back("an efficient pair lies on a truncated face of the sampling box");
  r.caveats.push_back("local minimality is a grid-neighbourhood convention (radius in grid steps)");
  return r;
}

// --- existence ---

struct ExistenceVerdict {
  Concept concept_used = Concept::weff;
  bool nonempty = false;
  bool bounded_in_box = true;  // false: a pair touches a truncated face (boundedness not asserted)
  std::vector<ClosednessVerdict> probes;
  bool closed_at_probes = true;
  bool hypotheses_pass = false;
  bool minimizers_found = false;
  bool existence = false;
  std::string reason;
  std::vector<std::string> warnings;
  SolveReport solve;
};

/// Desk-scale check of the existence hypotheses: nonempty and bounded sampled
/// feasible set, closedness probes at every catalog probe point.
inline ExistenceVerdict existence_check(const BilevelInstance& inst, Concept c, const SolveOptions& opt = {}) {
  ExistenceVerdict v;
  v.concept_used = c;
  SolveOptions o = opt;
  o.probe = false;
  v.solve = solve(inst, c, o);
  const auto& r = v.solve;
  v.nonempty = !r.pairs.empty();
  if (!v.nonempty) {
    v.reason = "empty feasible set: " + r.reason;
    return v;
  }
  v.bounded_in_box = std::none_of(r.pairs.begin(), r.pairs.end(), [](const BilevelPair& bp) { return bp.on_truncated_face; });
  if (!v.bounded_in_box) v.warnings.push_back("feasible pairs touch a truncated face; boundedness holds only relative to the sampling box");

  const ParametricMOP& p = inst.lower;
  if (detail::psi_oracle(p, c)) {
    std::vector<std::pair<Vec, Vec>> cands = inst.probes;
    std::set<Vec> xs;
    for (auto i : r.efficient) xs.insert(r.pairs[i].x);
    if (xs.empty())
      for (const auto& bp : r.pairs) xs.insert(bp.x);
    for (const auto& x : xs)
      for (const auto& y : p.probes)
        if (p.gamma.box.contains(y, 1e-12)) cands.emplace_back(x, y);
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    const GridSpec& pg = opt.probe_grid ? *opt.probe_grid : r.y_grid;
    for (const auto& [x, y] : cands) {
      auto pv = probe_concept(p, c, pg, x, y);
      if (pv.verdict == ClosednessKind::missing_limit_point) v.closed_at_probes = false;
      v.probes.push_back(std::move(pv));
    }
  } else {
    v.warnings.push_back("no analytic oracle for this concept; closedness not probed");
  }
  v.hypotheses_pass = v.nonempty && v.closed_at_probes;
  v.minimizers_found = !r.efficient.empty();
  v.existence = v.minimizers_found;
  if (v.hypotheses_pass) {
    v.reason = "hypotheses hold at desk scale; discrete minimizers found";
  } else {
    v.reason = "closedness fails at a probe point";
    v.warnings.push_back("the solution graph is not closed at a probe point: a minimizer may not exist");
  }
  return v;
}

// --- comparison ---

struct ConceptComparison {
  std::vector<SolveReport> reports;  // eff, bar, weff
  std::vector<std::string> chain_violations;
};

inline ConceptComparison compare_concepts(const BilevelInstance& inst, const SolveOptions& opt = {}) {
  ConceptComparison out;
  for (Concept c : {Concept::eff, Concept::bar, Concept::weff}) out.reports.push_back(solve(inst, c, opt));
  auto records = [](const SolveReport& r) {
    std::set<std::pair<Vec, Vec>> s;
    for (const auto& bp : r.pairs) s.emplace(bp.x, bp.y);
    return s;
  };
  const auto eff = records(out.reports[0]), bar = records(out.reports[1]), weff = records(out.reports[2]);
  auto check = [&](const std::set<std::pair<Vec, Vec>>& a, const std::set<std::pair<Vec, Vec>>& b, const std::string& name) {
    std::size_t missing = 0;
    for (const auto& e : a) missing += b.count(e) == 0;
    if (missing) out.chain_violations.push_back(name + ": " + std::to_string(missing) + " record(s) outside");
  };
  check(eff, bar, "eff in bar");
  check(bar, weff, "bar in weff");
  return out;
}

// --- export ---

inline nlohmann::json to_json(const BilevelPair& bp) {
  return {{"x", bp.x}, {"y", bp.y}, {"value", bp.value}, {"locally_minimal", bp.locally_minimal}};
}

inline nlohmann::json to_json(const SolveReport& r) {
  auto pick = [&](const std::vector<std::size_t>& idx) {
    auto a = nlohmann::json::array();
    for (auto i : idx) a.push_back(to_json(r.pairs[i]));
    return a;
  };
  auto flags = nlohmann::json::array();
  for (const auto& f : r.flags) {
    auto nearby = nlohmann::json::array();
    for (const auto& v : f.nearby) nearby.push_back({{"candidate", v.candidate}, {"verdict", to_string(v.verdict)}});
    flags.push_back({{"pair", to_json(r.pairs[f.pair])},
                     {"closedness_at_pair", to_string(f.at_pair.verdict)},
                     {"nearby_probes", nearby},
                     {"near_missing_limit_point", f.near_missing_limit_point}});
  }
  return {{"instance", r.instance},
          {"concept", to_string(r.concept_used)},
          {"grid", {{"x", to_json(r.x_grid)}, {"y", to_json(r.y_grid)}, {"levels", r.levels},
                    {"local_radius_steps", r.local_radius_steps}}},
          {"feasible_pairs", r.pairs.size()},
          {"efficient", pick(r.efficient)},
          {"weakly_efficient", pick(r.weakly_efficient)},
          {"local_minimizers", pick(r.local_minimizers)},
          {"closedness", flags},
          {"existence", r.existence},
          {"reason", r.reason},
          {"caveats", r.caveats}};
}

inline nlohmann::json to_json(const ExistenceVerdict& v) {
  auto probes = nlohmann::json::array();
  for (const auto& p : v.probes) probes.push_back({{"candidate", p.candidate}, {"verdict", to_string(p.verdict)}});
  return {{"concept", to_string(v.concept_used)}, {"nonempty", v.nonempty}, {"bounded_in_box", v.bounded_in_box},
          {"closed_at_probes", v.closed_at_probes}, {"probes", probes}, {"hypotheses_pass", v.hypotheses_pass},
          {"minimizers_found", v.minimizers_found}, {"existence", v.existence}, {"reason", v.reason},
          {"warnings", v.warnings}, {"efficient", to_json(v.solve)["efficient"]}};
}

inline nlohmann::json to_json(const ConceptComparison& c) {
  auto rows = nlohmann::json::array();
  for (const auto& r : c.reports) {
    nlohmann::json row{{"concept", to_string(r.concept_used)}, {"feasible_pairs", r.pairs.size()},
                       {"efficient", to_json(r)["efficient"]}, {"existence", r.existence}, {"reason", r.reason}};
    rows.push_back(row);
  }
  return {{"concepts", rows}, {"chain_violations", c.chain_violations}};
}

/// All feasible pairs with objective values and tags.
inline void write_csv(std::ostream& os, const SolveReport& r) {
  if (r.pairs.empty()) {
    os << "efficient,weakly_efficient,locally_minimal\n";
    return;
  }
  const auto& p0 = r.pairs.front();
  for (std::size_t k = 0; k < p0.x.size(); ++k) os << "x" << k + 1 << ",";
  for (std::size_t k = 0; k < p0.y.size(); ++k) os << "y" << k + 1 << ",";
  for (std::size_t k = 0; k < p0.value.size(); ++k) os << "F" << k + 1 << ",";
  os << "efficient,weakly_efficient,locally_minimal\n";
  for (const auto& bp : r.pairs) {
    for (double v : bp.x) os << format_double(v) << ",";
    for (double v : bp.y) os << format_double(v) << ",";
    for (double v : bp.value) os << format_double(v) << ",";
    os << bp.efficient << "," << bp.weakly_efficient << "," << bp.locally_minimal << "\n";
  }
}

}  // namespace mobilevel
