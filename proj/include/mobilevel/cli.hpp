#pragma once

// Config-driven runner behind the mobilevel command-line tool. Every
// subcommand writes report.json plus CSV data into the output directory.

#include "mobilevel/bilevel.hpp"
#include "mobilevel/catalog.hpp"
#include "mobilevel/estimates.hpp"
#include "mobilevel/mappings.hpp"
#include "mobilevel/scalarize.hpp"
#include "mobilevel/varanal.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace mobilevel::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"solve",           "frontier",    "diagnose-closedness",
                                             "scalarize-compare", "normal-cone", "coderivative-check"};
  return s;
}

struct RunConfig {
  std::string command;
  nlohmann::json data;  // the parsed config with overrides applied
  fs::path base_dir;    // relative paths in the config resolve against this
  fs::path output_dir;
};

struct RunResult {
  int status = kOk;
  std::string summary;
  nlohmann::json report;
  std::vector<fs::path> files;
};

inline nlohmann::json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidInput("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(p.string() + ": " + e.what());
  }
}

/// Temp file plus rename, so readers never see a partial artifact.
inline void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Output directory precedence: explicit override, MOBILEVEL_OUTPUT_DIR,
/// "output_dir" in the config, then ./mobilevel-out/<command>.
inline fs::path resolve_output_dir(const nlohmann::json& cfg, const std::string& command, const std::string& override_dir,
                                   const fs::path& base) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv("MOBILEVEL_OUTPUT_DIR"); env && *env) return env;
  if (cfg.contains("output_dir")) {
    fs::path p = cfg.at("output_dir").get<std::string>();
    return p.is_absolute() ? p : base / p;
  }
  return fs::path("mobilevel-out") / command;
}

namespace detail {

inline const nlohmann::json& problem_node(const RunConfig& rc) {
  if (!rc.data.contains("problem")) throw InvalidInput("config needs \"problem\" (catalog id, inline spec or {\"file\": path})");
  return rc.data.at("problem");
}

inline nlohmann::json inline_spec(const RunConfig& rc) {
  const auto& node = problem_node(rc);
  if (node.is_object() && node.contains("file")) {
    fs::path p = node.at("file").get<std::string>();
    return read_json_file(p.is_absolute() ? p : rc.base_dir / p);
  }
  return node;
}

inline ParametricMOP load_problem(const RunConfig& rc) {
  const auto& node = problem_node(rc);
  if (node.is_string()) return catalog_get(node.get<std::string>()).problem;
  return problem_from_json(inline_spec(rc));
}

inline BilevelInstance load_bilevel(const RunConfig& rc) {
  const auto& node = problem_node(rc);
  if (node.is_string()) {
    auto e = catalog_get(node.get<std::string>());
    if (!e.bilevel) throw InvalidInput("catalog problem '" + node.get<std::string>() + "' has no upper level");
    return *e.bilevel;
  }
  return bilevel_from_json(inline_spec(rc));
}

inline std::vector<Vec> parameter_points(const RunConfig& rc, const ParametricMOP& p) {
  std::vector<Vec> xs;
  if (rc.data.contains("xs"))
    for (const auto& x : rc.data.at("xs")) xs.push_back(vec_from_json(x));
  else if (rc.data.contains("x"))
    xs.push_back(vec_from_json(rc.data.at("x")));
  else
    xs.push_back(Vec(p.n, 0.0));
  for (const auto& x : xs)
    if (x.size() != p.n) throw InvalidInput("parameter point has wrong dimension");
  return xs;
}

inline GridSpec y_grid(const RunConfig& rc, const ParametricMOP& p) {
  if (rc.data.contains("y_grid")) return grid_from_json(rc.data.at("y_grid"));
  if (rc.data.contains("step")) {
    GridSpec g = p.default_grid;
    g.step.assign(p.m, number_from_json(rc.data.at("step")));
    return g;
  }
  return p.default_grid;
}

inline std::vector<Concept> concepts(const RunConfig& rc, std::vector<Concept> fallback) {
  if (!rc.data.contains("concepts") && !rc.data.contains("concept")) return fallback;
  std::vector<Concept> out;
  if (rc.data.contains("concepts"))
    for (const auto& c : rc.data.at("concepts")) out.push_back(concept_from_string(c.get<std::string>()));
  else
    out.push_back(concept_from_string(rc.data.at("concept").get<std::string>()));
  return out;
}

inline SphereNorm norm_of(const RunConfig& rc) {
  const auto n = rc.data.value("norm", std::string("euclidean"));
  if (n == "euclidean") return SphereNorm::euclidean;
  if (n == "one") return SphereNorm::one;
  if (n == "infinity") return SphereNorm::infinity;
  throw InvalidInput("unknown norm '" + n + "' (euclidean, one, infinity)");
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline void emit(RunResult& r, const RunConfig& rc, const std::string& name, const std::string& content) {
  const fs::path p = rc.output_dir / name;
  write_atomic(p, content);
  r.files.push_back(p);
}

template <class Writer>
std::string csv_of(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

}  // namespace detail

// --- subcommands ---

inline RunResult run_solve(const RunConfig& rc) {
  RunResult r;
  const auto inst = detail::load_bilevel(rc);
  SolveOptions opt;
  if (rc.data.contains("x_grid")) opt.x_grid = grid_from_json(rc.data.at("x_grid"));
  if (rc.data.contains("y_grid") || rc.data.contains("step")) opt.y_grid = detail::y_grid(rc, inst.lower);
  if (rc.data.contains("probe_grid")) opt.probe_grid = grid_from_json(rc.data.at("probe_grid"));
  opt.levels = rc.data.value("levels", std::size_t{2});
  opt.probe = rc.data.value("probe", true);
  const auto mode = rc.data.value("concept", std::string("all"));
  if (mode == "all") {
    auto cmp = compare_concepts(inst, opt);
    r.report = {{"command", "solve"}, {"instance", inst.id}, {"comparison", to_json(cmp)}};
    auto reports = nlohmann::json::array();
    for (const auto& s : cmp.reports) {
      reports.push_back(to_json(s));
      detail::emit(r, rc, "pairs-" + to_string(s.concept_used) + ".csv",
                   detail::csv_of([&](std::ostream& os) { write_csv(os, s); }));
    }
    r.report["reports"] = reports;
    if (!cmp.chain_violations.empty()) {
      r.status = kCheckFailed;
      r.summary = "record chain violated";
    } else {
      r.summary = "three concepts solved";
    }
  } else {
    const Concept c = concept_from_string(mode);
    auto s = solve(inst, c, opt);
    r.report = {{"command", "solve"}, {"report", to_json(s)}};
    if (rc.data.value("existence", false)) r.report["existence_check"] = to_json(existence_check(inst, c, opt));
    detail::emit(r, rc, "pairs-" + to_string(c) + ".csv", detail::csv_of([&](std::ostream& os) { write_csv(os, s); }));
    r.summary = s.reason;
  }
  return r;
}

inline RunResult run_frontier(const RunConfig& rc) {
  RunResult r;
  const auto p = detail::load_problem(rc);
  const auto xs = detail::parameter_points(rc, p);
  const auto grid = detail::y_grid(rc, p);
  const auto levels = rc.data.value("levels", std::size_t{2});
  GraphCloud all;
  all.grid = grid;
  all.xs = xs;
  auto rows = nlohmann::json::array();
  for (Concept c : detail::concepts(rc, {Concept::eff, Concept::weff})) {
    GraphCloud cloud = c == Concept::bar ? intermediate_closure(p, xs, grid, levels) : graph_sample(p, xs, grid, c);
    for (const auto& x : xs)
      rows.push_back({{"concept", to_string(c)}, {"x", x}, {"points", cloud.decision_points_at(x).size()},
                      {"images", cloud.images_at(x).size()}});
    all.records.insert(all.records.end(), cloud.records.begin(), cloud.records.end());
    all.unconfirmed_truncation |= cloud.unconfirmed_truncation;
    all.truncation_artifacts += cloud.truncation_artifacts;
  }
  all.levels = levels;
  r.report = {{"command", "frontier"}, {"problem", p.id}, {"slices", rows}, {"metadata", grid_metadata(all)}};
  detail::emit(r, rc, "frontier.csv", detail::csv_of([&](std::ostream& os) { write_csv(os, all); }));
  r.summary = std::to_string(all.records.size()) + " graph records";
  return r;
}

inline RunResult run_diagnose(const RunConfig& rc) {
  RunResult r;
  const auto p = detail::load_problem(rc);
  const auto xs = detail::parameter_points(rc, p);
  const auto grid = detail::y_grid(rc, p);
  const bool image = rc.data.value("image_space", false);
  std::vector<Vec> candidates = p.probes;
  if (rc.data.contains("candidates")) {
    candidates.clear();
    for (const auto& c : rc.data.at("candidates")) candidates.push_back(vec_from_json(c));
  }
  auto verdicts = nlohmann::json::array();
  std::ostringstream csv;
  csv << "concept,candidate,verdict\n";
  std::size_t missing = 0;
  for (Concept c : detail::concepts(rc, {Concept::eff, Concept::weff, Concept::bar})) {
    for (const auto& x : xs) {
      for (const auto& w : candidates) {
        if (!image && !p.gamma.contains(x, w)) continue;
        auto v = probe_concept(p, c, grid, x, w, image);
        missing += v.verdict == ClosednessKind::missing_limit_point;
        auto j = to_json(v);
        j["concept"] = to_string(c);
        verdicts.push_back(j);
        csv << to_string(c) << ",";
        for (std::size_t k = 0; k < v.candidate.size(); ++k) csv << (k ? " " : "") << format_double(v.candidate[k]);
        csv << "," << to_string(v.verdict) << "\n";
      }
    }
  }
  r.report = {{"command", "diagnose-closedness"},
              {"problem", p.id},
              {"space", image ? "image" : "decision"},
              {"grid", to_json(grid)},
              {"verdicts", verdicts},
              {"missing_limit_points", missing}};
  detail::emit(r, rc, "closedness.csv", csv.str());
  r.summary = std::to_string(missing) + " missing limit point(s) among " + std::to_string(verdicts.size()) + " probes";
  return r;
}

inline RunResult run_scalarize(const RunConfig& rc) {
  RunResult r;
  const auto p = detail::load_problem(rc);
  const auto xs = detail::parameter_points(rc, p);
  const auto grid = detail::y_grid(rc, p);
  const auto resolution = rc.data.value("resolution", std::size_t{64});
  const auto norm = detail::norm_of(rc);
  const double step = *std::max_element(grid.step.begin(), grid.step.end());
  auto rows = nlohmann::json::array();
  bool failed = false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto u = weak_efficiency_via_scalarization(p, xs[i], resolution, grid, norm);
    auto w = psi_sample(p, xs[i], grid, Concept::weff);
    const double h = hausdorff(u.points, w.points);
    const bool match = h <= step + 1e-12;
    if (u.equivalence && !match) failed = true;
    auto row = to_json(u);
    row.erase("points");
    row["x"] = xs[i];
    row["union_points"] = u.points.size();
    row["weakly_efficient_points"] = w.points.size();
    row["hausdorff"] = h;
    row["within_one_step"] = match;
    rows.push_back(row);
    detail::emit(r, rc, "sweep-" + std::to_string(i) + ".csv",
                 detail::csv_of([&](std::ostream& os) { write_sweep_csv(os, u); }));
  }
  r.report = {{"command", "scalarize-compare"}, {"problem", p.id}, {"resolution", resolution},
              {"grid", to_json(grid)}, {"comparisons", rows}};
  r.status = failed ? kCheckFailed : kOk;
  r.summary = failed ? "scalarization union differs from the weakly efficient set on a convex problem"
                     : "scalarization compared at " + std::to_string(xs.size()) + " parameter(s)";
  return r;
}

inline RunResult run_normal_cone(const RunConfig& rc) {
  RunResult r;
  const auto p = detail::load_problem(rc);
  if (!p.models) throw InvalidInput(p.id + ": no local polyhedral models");
  std::vector<std::string> graphs = {"sigma", "sigma_plus_c", "phi", "phi_w", "gamma", "psi_w"};
  if (rc.data.contains("graphs")) graphs = rc.data.at("graphs").get<std::vector<std::string>>();
  nlohmann::json golden;
  if (rc.data.contains("golden")) {
    fs::path g = rc.data.at("golden").get<std::string>();
    golden = read_json_file(g.is_absolute() ? g : rc.base_dir / g).at("cones");
  }
  const auto samples = rc.data.value("oracle_samples", std::size_t{0});
  const auto seed = rc.data.value("seed", std::uint64_t{0});
  auto cones = nlohmann::json::object();
  std::ostringstream csv;
  csv << "graph,piece,generator\n";
  bool failed = false;
  for (const auto& g : graphs) {
    auto n = model_normal_cone(p, g);
    nlohmann::json entry{{"cone", to_json(n)}};
    if (golden.contains(g)) {
      const bool same = same_set(n, cone_union_from_json(golden.at(g)));
      entry["golden_match"] = same;
      failed |= !same;
    }
    if (samples > 0) {
      const auto& M = *p.models;
      QVec pt = M.x_bar;
      const QVec& tail = (g == "gamma" || g == "psi_w") ? M.preimages.at(0).y_bar : M.z_bar;
      pt.insert(pt.end(), tail.begin(), tail.end());
      const auto& pieces = g == "sigma" ? M.gph_sigma : g == "sigma_plus_c" ? M.gph_sigma_plus_c : g == "phi" ? M.gph_phi
                           : g == "phi_w" ? M.gph_phi_w : g == "gamma" ? M.gph_gamma : M.gph_psi_w;
      auto s = proximal_normal_oracle(PolyUnion::from_hdata(pt.size(), pieces), pt, samples, 0.1, seed);
      auto v = validate_with_oracle(n, s);
      entry["oracle"] = {{"directions", v.directions}, {"outside", v.outside}, {"worst_containment", v.worst_containment},
                         {"unapproached_generators", v.unapproached}, {"worst_coverage", v.worst_coverage}};
      failed |= v.outside > 0 || v.unapproached > 0;
    }
    cones[g] = entry;
    for (std::size_t i = 0; i < n.pieces.size(); ++i)
      for (const auto& gen : n.pieces[i].generators()) {
        csv << g << "," << i << ",";
        for (std::size_t k = 0; k < gen.size(); ++k) csv << (k ? " " : "") << to_string(gen[k]);
        csv << "\n";
      }
  }
  r.report = {{"command", "normal-cone"}, {"problem", p.id}, {"cones", cones}};
  if (!p.models->reduction_note.empty()) r.report["model_note"] = p.models->reduction_note;
  detail::emit(r, rc, "cones.csv", csv.str());
  r.status = failed ? kCheckFailed : kOk;
  r.summary = failed ? "normal cone check failed" : "normal cones computed for " + std::to_string(graphs.size()) + " graph(s)";
  return r;
}

inline RunResult run_coderivative(const RunConfig& rc) {
  RunResult r;
  const auto p = detail::load_problem(rc);
  std::vector<EstimateKind> kinds;
  if (rc.data.contains("estimates"))
    for (const auto& k : rc.data.at("estimates")) kinds.push_back(estimate_kind_from_string(k.get<std::string>()));
  else
    kinds.push_back(estimate_kind_from_string(rc.data.value("estimate", std::string("weak_frontier"))));
  std::vector<QVec> zs;
  if (rc.data.contains("z_stars"))
    for (const auto& z : rc.data.at("z_stars")) zs.push_back(qvec_from_json(z));
  if (rc.data.contains("z_star")) zs.push_back(qvec_from_json(rc.data.at("z_star")));
  // Random rational weights in the interior of the dual cone.
  if (const auto n = rc.data.value("random_strict_weights", std::size_t{0}); n > 0) {
    std::mt19937_64 rng(rc.data.value("seed", std::uint64_t{0}));
    std::uniform_int_distribution<long> num(1, 50), den(1, 17);
    const auto gens = p.cone.dual_generators();
    for (std::size_t i = 0; i < n; ++i) {
      QVec z(p.q, Rational(0));
      for (const auto& g : gens) {
        const Rational c(num(rng), den(rng));
        for (std::size_t k = 0; k < p.q; ++k) z[k] += c * g[k];
      }
      zs.push_back(z);
    }
  }
  if (zs.empty()) throw InvalidInput("coderivative-check needs \"z_star\", \"z_stars\" or \"random_strict_weights\"");
  const auto expect = rc.data.value("expect", std::string("auto"));
  if (expect != "auto" && expect != "holds" && expect != "fails" && expect != "equality")
    throw InvalidInput("\"expect\" must be auto, holds, fails or equality");

  auto checks = nlohmann::json::array();
  std::ostringstream csv;
  csv << "estimate,z_star,strict_dual,holds,equality,lhs,rhs,status\n";
  bool failed = false;
  std::size_t refuted = 0;
  for (auto kind : kinds) {
    for (const auto& z : zs) {
      auto e = estimate_check(p, kind, z);
      std::string status;
      if (expect == "fails") status = e.holds ? "unexpectedly holds" : "refuted as expected";
      else if (expect == "holds") status = e.holds ? "holds as expected" : "fails";
      else if (expect == "equality") status = e.equality ? "equality as expected" : "equality fails";
      else if (e.holds) status = "holds";
      else status = e.strict_dual ? "fails" : "fails outside the strict dual cone";
      const bool bad = status == "unexpectedly holds" || status == "fails" || status == "equality fails";
      failed |= bad;
      refuted += status == "refuted as expected";
      auto j = to_json(e);
      j["status"] = status;
      checks.push_back(j);
      std::string zt;
      for (std::size_t k = 0; k < z.size(); ++k) zt += (k ? " " : "") + to_string(z[k]);
      csv << to_string(kind) << "," << zt << "," << e.strict_dual << "," << e.holds << "," << e.equality << ",\""
          << describe(e.lhs) << "\",\"" << describe(e.rhs) << "\"," << status << "\n";
    }
  }
  r.report = {{"command", "coderivative-check"}, {"problem", p.id}, {"expect", expect}, {"checks", checks}};
  detail::emit(r, rc, "estimates.csv", csv.str());
  r.status = failed ? kCheckFailed : kOk;
  if (failed) r.summary = "estimate check failed";
  else if (refuted == checks.size()) r.summary = "refuted as expected";
  else r.summary = std::to_string(checks.size()) + " estimate check(s) passed";
  return r;
}

/// Runs a subcommand; InvalidInput propagates for usage errors.
inline RunResult run(const RunConfig& rc) {
  RunResult r;
  if (rc.command == "solve") r = run_solve(rc);
  else if (rc.command == "frontier") r = run_frontier(rc);
  else if (rc.command == "diagnose-closedness") r = run_diagnose(rc);
  else if (rc.command == "scalarize-compare") r = run_scalarize(rc);
  else if (rc.command == "normal-cone") r = run_normal_cone(rc);
  else if (rc.command == "coderivative-check") r = run_coderivative(rc);
  else throw InvalidInput("unknown subcommand '" + rc.command + "'");
  r.report["status"] = r.status == kOk ? "ok" : "check failed";
  r.report["summary"] = r.summary;
  const fs::path report = rc.output_dir / "report.json";
  write_atomic(report, detail::dump(r.report));
  r.files.insert(r.files.begin(), report);
  return r;
}

/// Builds a RunConfig from a config file (may be empty) and overrides given
/// as a JSON object merged on top.
inline RunConfig make_config(const std::string& command, const std::string& config_path, const nlohmann::json& overrides,
                             const std::string& output_override) {
  RunConfig rc;
  rc.command = command;
  if (std::find(subcommands().begin(), subcommands().end(), command) == subcommands().end())
    throw InvalidInput("unknown subcommand '" + command + "'");
  rc.data = nlohmann::json::object();
  rc.base_dir = fs::current_path();
  if (!config_path.empty()) {
    rc.data = read_json_file(config_path);
    if (!rc.data.is_object()) throw InvalidInput("config must be a JSON object");
    rc.base_dir = fs::absolute(config_path).parent_path();
  }
  if (rc.data.contains("command") && rc.data.at("command").get<std::string>() != command)
    throw InvalidInput("config is for '" + rc.data.at("command").get<std::string>() + "', not '" + command + "'");
  if (!overrides.is_null()) {
    if (!overrides.is_object()) throw InvalidInput("overrides must be a JSON object");
    rc.data.merge_patch(overrides);
  }
  rc.output_dir = resolve_output_dir(rc.data, command, output_override, rc.base_dir);
  return rc;
}

}  // namespace mobilevel::cli
