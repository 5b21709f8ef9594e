#include "mobilevel/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using nlohmann::json;

json split_list(const std::string& text) {
  json out = json::array();
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (cur.empty()) throw mobilevel::InvalidInput("empty entry in list '" + text + "'");
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  return out;
}

// Numbers stay strings so expressions like pi/2 and rationals like 1/3 survive.
json numeric_list(const std::string& text) { return split_list(text); }

struct Options {
  std::string config;
  std::string problem;
  std::string concept_name;
  std::string output_dir;
  std::vector<std::string> xs;
  std::vector<std::string> z_stars;
  std::vector<std::string> estimates;
  std::string expect;
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
  std::optional<std::size_t> levels;
  std::optional<std::size_t> resolution;
  std::optional<std::size_t> oracle_samples;
  bool quiet = false;
};

json overrides_of(const Options& o) {
  json j = json::object();
  if (!o.problem.empty()) {
    if (o.problem.ends_with(".json")) j["problem"] = {{"file", std::filesystem::absolute(o.problem).string()}};
    else j["problem"] = o.problem;
  }
  if (!o.concept_name.empty()) j["concept"] = o.concept_name;
  if (!o.xs.empty()) {
    j["xs"] = json::array();
    for (const auto& x : o.xs) j["xs"].push_back(numeric_list(x));
  }
  if (!o.z_stars.empty()) {
    j["z_stars"] = json::array();
    for (const auto& z : o.z_stars) j["z_stars"].push_back(numeric_list(z));
  }
  if (!o.estimates.empty()) j["estimates"] = o.estimates;
  if (!o.expect.empty()) j["expect"] = o.expect;
  if (o.seed) j["seed"] = *o.seed;
  if (o.step) j["step"] = *o.step;
  if (o.levels) j["levels"] = *o.levels;
  if (o.resolution) j["resolution"] = *o.resolution;
  if (o.oracle_samples) j["oracle_samples"] = *o.oracle_samples;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = mobilevel::cli;
  CLI::App app{"Parametric multiobjective and bilevel analysis"};
  app.require_subcommand(1);
  Options opt;
  for (const auto& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", opt.config, "JSON run config")->check(CLI::ExistingFile);
    sub->add_option("-p,--problem", opt.problem, "catalog id or problem JSON file");
    sub->add_option("-o,--output-dir", opt.output_dir, "output directory");
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--x", opt.xs, "parameter point, comma separated (repeatable)");
    sub->add_option("--step", opt.step, "decision grid step");
    sub->add_option("--levels", opt.levels, "closure refinement levels");
    sub->add_flag("-q,--quiet", opt.quiet, "no summary line");
    if (name == "solve" || name == "frontier" || name == "diagnose-closedness")
      sub->add_option("--concept", opt.concept_name, "eff, weff, bar (solve also accepts all)");
    if (name == "scalarize-compare") sub->add_option("--resolution", opt.resolution, "weights on the dual sphere");
    if (name == "normal-cone") sub->add_option("--oracle-samples", opt.oracle_samples, "proximal normal samples");
    if (name == "coderivative-check") {
      sub->add_option("--z-star", opt.z_stars, "dual direction, comma separated rationals (repeatable)");
      sub->add_option("--estimate", opt.estimates,
                      "weak_frontier, frontier_image, feasibility_chain, solution_chain (repeatable)");
      sub->add_option("--expect", opt.expect, "auto, holds, fails, equality");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto rc = cli::make_config(command, opt.config, overrides_of(opt), opt.output_dir);
    auto r = cli::run(rc);
    if (!opt.quiet) {
      std::cout << command << ": " << r.summary << "\n";
      for (const auto& f : r.files) std::cout << "  " << f.string() << "\n";
    }
    return r.status;
  } catch (const mobilevel::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed config: " << e.what() << "\n";
    return cli::kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
