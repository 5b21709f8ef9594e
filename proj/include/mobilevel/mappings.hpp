#pragma once

// Samples of the solution mappings Psi, Psi_w, the frontier mappings Phi,
// Phi_w, the image map Sigma and the intermediate Phi_bar / Psi_bar;
// value-function feasibility in all variants; graph closedness probes.

#include "mobilevel/catalog.hpp"
#include "mobilevel/mo_core.hpp"
#include "mobilevel/parametric.hpp"
#include "mobilevel/spatial.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace mobilevel {

enum class Concept { eff, weff, bar, sigma };

inline std::string to_string(Concept c) {
  switch (c) {
    case Concept::eff: return "eff";
    case Concept::weff: return "weff";
    case Concept::bar: return "bar";
    case Concept::sigma: return "sigma";
  }
  return "?";
}

inline Concept concept_from_string(const std::string& s) {
  if (s == "eff") return Concept::eff;
  if (s == "weff") return Concept::weff;
  if (s == "bar") return Concept::bar;
  if (s == "sigma") return Concept::sigma;
  throw InvalidInput("unknown concept '" + s + "' (eff, weff, bar, sigma)");
}

/// y is outside Gamma(x): distinct from "feasible but not VFR-feasible".
class InfeasiblePoint : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct SliceSample {
  std::vector<Vec> points;  // decision points, lexicographic
  std::vector<Vec> images;  // f(x, .) of each point
  bool unconfirmed_truncation = false;  // kept points on truncated faces without an oracle
  std::size_t truncation_artifacts = 0;  // points dropped on truncated faces
};

namespace detail {

inline std::vector<Vec> images_of(const ParametricMOP& p, const Vec& x, const std::vector<Vec>& ys) {
  std::vector<Vec> out;
  out.reserve(ys.size());
  for (const auto& y : ys) out.push_back(p.eval(x, y));
  return out;
}

inline const std::function<bool(const Vec&, const Vec&)>& psi_oracle(const ParametricMOP& p, Concept c) {
  switch (c) {
    case Concept::eff: return p.oracles.psi;
    case Concept::weff: return p.oracles.psi_w;
    default: return p.oracles.psi_bar;
  }
}

inline const std::function<bool(const Vec&, const Vec&)>& phi_oracle(const ParametricMOP& p, Concept c) {
  switch (c) {
    case Concept::eff: return p.oracles.phi;
    case Concept::weff: return p.oracles.phi_w;
    default: return p.oracles.phi_bar;
  }
}

}  // namespace detail

/// Efficient (eff) or weakly efficient (weff) points among the given feasible
/// points; sigma keeps everything. Grid-minimal points on a truncated box face
/// are dropped when the analytic oracle rejects them, and flagged otherwise.
inline SliceSample psi_from_feasible(const ParametricMOP& p, const Vec& x, const std::vector<Vec>& feasible, Concept c) {
  SliceSample s;
  if (feasible.empty()) return s;
  auto images = detail::images_of(p, x, feasible);
  std::vector<std::size_t> idx;
  if (c == Concept::sigma) {
    idx.resize(feasible.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  } else {
    if (c == Concept::bar) throw InvalidInput("the bar concept is computed by intermediate_closure");
    ImageSet<double> set{images, {}};
    idx = c == Concept::eff ? nondominated(set, p.cone, p.dominance()) : weakly_nondominated(set, p.cone, p.dominance());
  }
  const auto& oracle = detail::psi_oracle(p, c);
  for (auto i : idx) {
    if (c != Concept::sigma && p.gamma.on_truncated_face(feasible[i])) {
      if (oracle) {
        if (!oracle(x, feasible[i])) {
          ++s.truncation_artifacts;
          continue;
        }
      } else {
        s.unconfirmed_truncation = true;
      }
    }
    s.points.push_back(feasible[i]);
    s.images.push_back(images[i]);
  }
  return s;
}

inline SliceSample psi_sample(const ParametricMOP& p, const Vec& x, const GridSpec& grid, Concept c) {
  return psi_from_feasible(p, x, feasible_sample(p, x, grid), c);
}

inline std::vector<Vec> unique_sorted(std::vector<Vec> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::vector<Vec> phi_sample(const ParametricMOP& p, const Vec& x, const GridSpec& grid, Concept c) {
  return unique_sorted(psi_sample(p, x, grid, c).images);
}

struct GraphRecord {
  Vec x;
  Vec y;
  Vec z;
  Concept tag = Concept::eff;
};

struct GraphCloud {
  std::vector<GraphRecord> records;
  std::vector<Vec> xs;
  GridSpec grid;
  std::size_t levels = 1;
  bool unconfirmed_truncation = false;
  std::size_t truncation_artifacts = 0;

  std::vector<Vec> decision_points_at(const Vec& x) const {
    std::vector<Vec> out;
    for (const auto& r : records)
      if (r.x == x) out.push_back(r.y);
    return out;
  }

  std::vector<Vec> images_at(const Vec& x) const {
    std::vector<Vec> out;
    for (const auto& r : records)
      if (r.x == x) out.push_back(r.z);
    return unique_sorted(out);
  }

  /// Concatenated (x, y) points.
  std::vector<Vec> graph_points() const {
    std::vector<Vec> out;
    out.reserve(records.size());
    for (const auto& r : records) {
      Vec v = r.x;
      v.insert(v.end(), r.y.begin(), r.y.end());
      out.push_back(std::move(v));
    }
    return out;
  }
};

/// Points of an x grid, probes included.
inline std::vector<Vec> grid_points(const GridSpec& g) { return g.points(); }

inline GraphCloud graph_sample(const ParametricMOP& p, const std::vector<Vec>& xs, const GridSpec& grid, Concept c) {
  if (c == Concept::bar) throw InvalidInput("use intermediate_closure for the bar concept");
  GraphCloud cloud;
  cloud.xs = xs;
  cloud.grid = grid;
  for (const auto& x : xs) {
    auto s = psi_sample(p, x, grid, c);
    cloud.unconfirmed_truncation |= s.unconfirmed_truncation;
    cloud.truncation_artifacts += s.truncation_artifacts;
    for (std::size_t i = 0; i < s.points.size(); ++i) cloud.records.push_back({x, s.points[i], s.images[i], c});
  }
  return cloud;
}

// --- intermediate mappings ---

struct ClosureSlice {
  std::vector<Vec> phi_bar;  // image points kept at every level
  SliceSample psi_bar;
};

/// Levels: the given grid is the finest; level l doubles the step l times.
/// An image f(x,y) of a finest-level feasible point is kept in Phi_bar(x) when
/// every level's Phi-sample comes within 2*step(l) of it and the point is grid
/// weakly efficient; Psi_bar(x) collects the feasible points whose own image was kept.
inline ClosureSlice closure_slice(const ParametricMOP& p, const Vec& x, const GridSpec& grid, std::size_t levels) {
  if (levels < 2) throw InvalidInput("intermediate closure needs at least 2 refinement levels");
  ClosureSlice out;
  auto feasible = feasible_sample(p, x, grid);
  if (feasible.empty()) return out;
  auto images = detail::images_of(p, x, feasible);
  std::vector<bool> keep(feasible.size(), true);
  const auto finest = psi_from_feasible(p, x, feasible, Concept::eff);
  for (std::size_t l = 0; l < levels; ++l) {
    const double factor = std::ldexp(1.0, static_cast<int>(l));
    const GridSpec g = grid.scaled(factor);
    const double eps = 2.0 * g.max_step();
    auto phi = l == 0 ? finest.images : psi_sample(p, x, g, Concept::eff).images;
    PointIndex index(phi, eps);
    for (std::size_t i = 0; i < feasible.size(); ++i)
      if (keep[i] && !index.any_within(images[i], eps)) keep[i] = false;
  }
  // Phi_bar(x) lies in the closed set Phi_w(x): drop grid neighbours of
  // isolated frontier points that are not weakly efficient.
  const auto weff = psi_from_feasible(p, x, feasible, Concept::weff).points;
  const std::set<Vec> weak(weff.begin(), weff.end());
  // Phi(x) is contained in its closure even where a coarse level lacks the tick.
  const std::set<Vec> eff(finest.points.begin(), finest.points.end());
  for (std::size_t i = 0; i < feasible.size(); ++i)
    if (eff.count(feasible[i])) keep[i] = true;
  for (std::size_t i = 0; i < feasible.size(); ++i) {
    if (!keep[i] || !weak.count(feasible[i])) continue;
    out.psi_bar.points.push_back(feasible[i]);
    out.psi_bar.images.push_back(images[i]);
    out.phi_bar.push_back(images[i]);
  }
  out.phi_bar = unique_sorted(out.phi_bar);
  return out;
}

inline GraphCloud intermediate_closure(const ParametricMOP& p, const std::vector<Vec>& xs, const GridSpec& grid,
                                       std::size_t levels = 2) {
  GraphCloud cloud;
  cloud.xs = xs;
  cloud.grid = grid;
  cloud.levels = levels;
  for (const auto& x : xs) {
    auto s = closure_slice(p, x, grid, levels);
    for (std::size_t i = 0; i < s.psi_bar.points.size(); ++i)
      cloud.records.push_back({x, s.psi_bar.points[i], s.psi_bar.images[i], Concept::bar});
  }
  return cloud;
}

/// Decision-space counterpart: feasible points within 2*step(l) of the
/// level-l Psi-sample at every level, i.e. an approximation of the x-slices
/// of cl gph Psi.
inline std::vector<Vec> psi_closure_slice(const ParametricMOP& p, const Vec& x, const GridSpec& grid, std::size_t levels) {
  if (levels < 2) throw InvalidInput("closure needs at least 2 refinement levels");
  auto feasible = feasible_sample(p, x, grid);
  std::vector<bool> keep(feasible.size(), true);
  for (std::size_t l = 0; l < levels; ++l) {
    const GridSpec g = grid.scaled(std::ldexp(1.0, static_cast<int>(l)));
    const double eps = 2.0 * g.max_step();
    auto psi = psi_sample(p, x, g, Concept::eff).points;
    PointIndex index(psi, eps);
    for (std::size_t i = 0; i < feasible.size(); ++i)
      if (keep[i] && !index.any_within(feasible[i], eps)) keep[i] = false;
  }
  std::vector<Vec> out;
  for (std::size_t i = 0; i < feasible.size(); ++i)
    if (keep[i]) out.push_back(feasible[i]);
  return out;
}

// --- value function reformulation feasibility ---

enum class VfrVariant { E, Ew, Ebar, E_minusC, Ew_minusC, Ebar_minusC };

inline std::string to_string(VfrVariant v) {
  switch (v) {
    case VfrVariant::E: return "E";
    case VfrVariant::Ew: return "Ew";
    case VfrVariant::Ebar: return "Ebar";
    case VfrVariant::E_minusC: return "E_minusC";
    case VfrVariant::Ew_minusC: return "Ew_minusC";
    case VfrVariant::Ebar_minusC: return "Ebar_minusC";
  }
  return "?";
}

inline VfrVariant vfr_variant_from_string(const std::string& s) {
  for (auto v : {VfrVariant::E, VfrVariant::Ew, VfrVariant::Ebar, VfrVariant::E_minusC, VfrVariant::Ew_minusC,
                 VfrVariant::Ebar_minusC})
    if (to_string(v) == s) return v;
  throw InvalidInput("unknown VFR variant '" + s + "'");
}

/// Frontier samples Phi(x), Phi_w(x), Phi_bar(x) on one grid, computed on
/// first use per x.
class FrontierCache {
 public:
  FrontierCache(const ParametricMOP& p, GridSpec grid, std::size_t levels = 2)
      : p_(p), grid_(std::move(grid)), levels_(levels) {}

  struct Entry {
    std::vector<Vec> phi, phi_w, phi_bar;
    double resolution = 0;  // smallest distance between distinct sampled images
  };

  const Entry& at(const Vec& x) {
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    Entry e;
    auto feasible = feasible_sample(p_, x, grid_);
    e.phi = unique_sorted(psi_from_feasible(p_, x, feasible, Concept::eff).images);
    e.phi_w = unique_sorted(psi_from_feasible(p_, x, feasible, Concept::weff).images);
    e.phi_bar = closure_slice(p_, x, grid_, levels_).phi_bar;
    e.resolution = image_resolution(detail::images_of(p_, x, feasible));
    return cache_.emplace(x, std::move(e)).first->second;
  }

  const ParametricMOP& problem() const { return p_; }
  const GridSpec& grid() const { return grid_; }

 private:
  double image_resolution(std::vector<Vec> images) const {
    images = unique_sorted(std::move(images));
    if (images.size() < 2) return grid_.max_step();
    // Distinct images closer than one grid step bound the resolution.
    const double h = grid_.max_step();
    PointIndex index(images, h);
    double best = h;
    for (std::size_t i = 0; i < images.size(); ++i)
      index.for_each_within(images[i], h, [&](std::size_t j) {
        if (j != i) best = std::min(best, PointIndex::distance(images[i], images[j]));
      });
    return best;
  }

  const ParametricMOP& p_;
  GridSpec grid_;
  std::size_t levels_;
  std::map<Vec, Entry> cache_;
};

/// f(x,y) in Phi(x) / Phi_w(x) / Phi_bar(x) (within `tolerance` of a sample)
/// or in that set minus C. Tolerance < 0 selects half the image resolution.
inline bool vfr_feasible(FrontierCache& cache, const Vec& x, const Vec& y, VfrVariant v, double tolerance = -1) {
  const auto& p = cache.problem();
  if (!p.gamma.contains(x, y)) throw InfeasiblePoint(p.id + ": y is not in Gamma(x)");
  const auto& e = cache.at(x);
  const double tol = tolerance >= 0 ? tolerance : 0.5 * e.resolution;
  const Vec z = p.eval(x, y);
  const std::vector<Vec>* set = nullptr;
  switch (v) {
    case VfrVariant::E:
    case VfrVariant::E_minusC: set = &e.phi; break;
    case VfrVariant::Ew:
    case VfrVariant::Ew_minusC: set = &e.phi_w; break;
    case VfrVariant::Ebar:
    case VfrVariant::Ebar_minusC: set = &e.phi_bar; break;
  }
  const bool minus_c = v == VfrVariant::E_minusC || v == VfrVariant::Ew_minusC || v == VfrVariant::Ebar_minusC;
  for (const auto& w : *set) {
    if (PointIndex::distance(w, z) <= tol) return true;
    if (minus_c) {
      Vec d(z.size());
      for (std::size_t k = 0; k < z.size(); ++k) d[k] = w[k] - z[k];
      if (p.cone.contains(d, Membership::closed, p.tau)) return true;
    }
  }
  return false;
}

// --- closedness probes ---

enum class ClosednessKind { closed_here, missing_limit_point, inconclusive };

inline std::string to_string(ClosednessKind k) {
  switch (k) {
    case ClosednessKind::closed_here: return "closed_here";
    case ClosednessKind::missing_limit_point: return "missing_limit_point";
    case ClosednessKind::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ClosednessVerdict {
  Vec candidate;
  ClosednessKind verdict = ClosednessKind::inconclusive;
  struct Witness {
    double radius;
    std::optional<Vec> point;  // nearest graph sample within the radius
    double distance;
  };
  std::vector<Witness> witnesses;
};

inline std::vector<double> radius_schedule(double r0 = 0.1, int count = 11) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(std::ldexp(r0, -k));
  return out;
}

/// Graph samples near a candidate at scale r.
using GraphSampler = std::function<std::vector<Vec>(const Vec& candidate, double r)>;

inline ClosednessVerdict closedness_probe(const std::function<bool(const Vec&)>& member, const GraphSampler& sampler,
                                          const Vec& candidate, const std::vector<double>& schedule) {
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k] < schedule[k - 1]) || !(schedule[k] > 0)) throw InvalidInput("radius schedule must decrease and stay positive");
  ClosednessVerdict v;
  v.candidate = candidate;
  bool approached = true;
  for (double r : schedule) {
    auto samples = sampler(candidate, r);
    ClosednessVerdict::Witness w{r, std::nullopt, std::numeric_limits<double>::infinity()};
    for (const auto& s : samples) {
      double d = PointIndex::distance(s, candidate);
      if (d <= r && d < w.distance) {
        w.distance = d;
        w.point = s;
      }
    }
    if (!w.point) approached = false;
    v.witnesses.push_back(w);
  }
  if (member(candidate)) v.verdict = ClosednessKind::closed_here;
  else if (approached && !schedule.empty()) v.verdict = ClosednessKind::missing_limit_point;
  else v.verdict = ClosednessKind::inconclusive;
  return v;
}

/// Sampler of gph Psi_hat (space "decision": points (x,y)) or gph Phi_hat
/// ("image": points (x,z)) near a candidate: at x in {x0 - r/4, x0, x0 + r/4}
/// the base grid is merged with windows of half-width r and step r/4. The
/// window is centred at the candidate's y in decision space, and at every
/// problem probe whose image at x0 lies within r of the candidate's z in image
/// space.
inline GraphSampler make_graph_sampler(const ParametricMOP& p, Concept c, const GridSpec& base, bool image_space) {
  return [&p, c, base, image_space](const Vec& cand, double r) {
    const Vec x0(cand.begin(), cand.begin() + static_cast<long>(p.n));
    const Vec w0(cand.begin() + static_cast<long>(p.n), cand.end());
    std::vector<Vec> centres;
    if (!image_space) centres.push_back(w0);
    else
      for (const auto& pr : p.probes)
        if (PointIndex::distance(p.eval(x0, pr), w0) <= r) centres.push_back(pr);
    std::vector<Vec> out;
    std::vector<Vec> xs;
    for (double dx : {-r / 4, 0.0, r / 4}) {
      Vec x = x0;
      for (double& v : x) v += dx;
      if (p.parameter_box.contains(x)) xs.push_back(x);
    }
    for (const auto& x : xs) {
      std::vector<Vec> window_points;
      for (const auto& y0 : centres) {
        GridSpec win;
        for (std::size_t k = 0; k < p.m; ++k) {
          win.lower.push_back(y0[k] - r);
          win.upper.push_back(y0[k] + r);
          win.step.push_back(r / 4);
        }
        win.probes.push_back(y0);
        for (const auto& pr : p.probes)
          if (Box{win.lower, win.upper}.contains(pr) && pr != y0) win.probes.push_back(pr);
        auto pts = feasible_sample(p, x, win);
        window_points.insert(window_points.end(), pts.begin(), pts.end());
      }
      auto feasible = feasible_sample(p, x, base);
      feasible.insert(feasible.end(), window_points.begin(), window_points.end());
      feasible = unique_sorted(std::move(feasible));
      SliceSample s;
      if (c == Concept::bar) s = closure_slice(p, x, base, 2).psi_bar;
      else s = psi_from_feasible(p, x, feasible, c);
      const auto& pts = image_space ? s.images : s.points;
      for (const auto& w : pts) {
        Vec v = x;
        v.insert(v.end(), w.begin(), w.end());
        out.push_back(std::move(v));
      }
    }
    return out;
  };
}

/// Probe of gph Psi_hat (or gph Phi_hat) at (x, w) against the catalog oracle.
inline ClosednessVerdict probe_concept(const ParametricMOP& p, Concept c, const GridSpec& base, const Vec& x,
                                      const Vec& w, bool image_space = false,
                                      const std::vector<double>& schedule = radius_schedule()) {
  const auto& oracle = image_space ? detail::phi_oracle(p, c) : detail::psi_oracle(p, c);
  Vec cand = x;
  cand.insert(cand.end(), w.begin(), w.end());
  if (!oracle) {
    ClosednessVerdict v;
    v.candidate = cand;
    return v;
  }
  const std::size_t n = p.n;
  auto member = [&](const Vec& v) {
    return oracle(Vec(v.begin(), v.begin() + static_cast<long>(n)), Vec(v.begin() + static_cast<long>(n), v.end()));
  };
  return closedness_probe(member, make_graph_sampler(p, c, base, image_space), cand, schedule);
}

// --- export ---

inline void write_csv(std::ostream& os, const GraphCloud& cloud) {
  if (cloud.records.empty()) {
    os << "concept\n";
    return;
  }
  const auto& r0 = cloud.records.front();
  for (std::size_t k = 0; k < r0.x.size(); ++k) os << "x" << k + 1 << ",";
  for (std::size_t k = 0; k < r0.y.size(); ++k) os << "y" << k + 1 << ",";
  for (std::size_t k = 0; k < r0.z.size(); ++k) os << "z" << k + 1 << ",";
  os << "concept\n";
  for (const auto& r : cloud.records) {
    for (double v : r.x) os << format_double(v) << ",";
    for (double v : r.y) os << format_double(v) << ",";
    for (double v : r.z) os << format_double(v) << ",";
    os << to_string(r.tag) << "\n";
  }
}

inline nlohmann::json to_json(const ClosednessVerdict& v) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& x : v.witnesses) {
    nlohmann::json e{{"radius", x.radius}};
    if (x.point) {
      e["point"] = *x.point;
      e["distance"] = x.distance;
    }
    w.push_back(e);
  }
  return {{"candidate", v.candidate}, {"verdict", to_string(v.verdict)}, {"witnesses", w}};
}

inline nlohmann::json grid_metadata(const GraphCloud& c) {
  nlohmann::json j{{"grid", to_json(c.grid)}, {"levels", c.levels}, {"records", c.records.size()}};
  if (c.unconfirmed_truncation) j["flags"] = {"unconfirmed-on-truncated-box"};
  if (c.truncation_artifacts) j["truncation_artifacts_dropped"] = c.truncation_artifacts;
  return j;
}

}  // namespace mobilevel
