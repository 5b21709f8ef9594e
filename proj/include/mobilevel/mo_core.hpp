#pragma once

// Finite-set multiobjective kernel: nondominance, weak nondominance and the
// domination property, by pairwise comparison with sweep fast paths.

#include "mobilevel/cones.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

namespace mobilevel {

template <class T>
struct ImageSet {
  std::vector<std::vector<T>> points;
  std::vector<std::string> labels;  // empty or one per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

  void validate() const {
    if (points.empty()) throw InvalidInput("image set is empty");
    const std::size_t q = points.front().size();
    for (const auto& p : points) {
      if (p.size() != q) throw InvalidInput("image points have mixed dimensions");
      if constexpr (std::is_floating_point_v<T>)
        for (T v : p)
          if (!std::isfinite(v)) throw InvalidInput("image point has a non-finite coordinate");
    }
    if (!labels.empty()) {
      if (labels.size() != points.size()) throw InvalidInput("label count differs from point count");
      auto sorted = labels;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw InvalidInput("duplicate image labels");
    }
  }
};

/// Dominance tolerance: z counts as a cone member when every dual inner
/// product is >= -tau (interior: > tau), and as nonzero when max |z_i| > tau.
struct DominanceOptions {
  double tau = 0.0;
  bool allow_fast_path = true;
};

namespace detail {

template <class T>
bool cone_member(const OrderingCone& cone, const std::vector<T>& z, Membership mode, double tau) {
  if constexpr (std::is_floating_point_v<T>) {
    return cone.contains(std::vector<double>(z.begin(), z.end()), mode, tau);
  } else {
    if (tau != 0) throw InvalidInput("exact images do not take a dominance tolerance");
    return cone.contains(QVec(z.begin(), z.end()), mode);
  }
}

template <class T>
bool nonzero(const std::vector<T>& z, double tau) {
  for (const auto& v : z) {
    if constexpr (std::is_floating_point_v<T>) {
      if (std::abs(v) > tau) return true;
    } else {
      if (v != 0) return true;
    }
  }
  return false;
}

template <class T>
std::vector<T> difference(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// a dominates b strictly in the cone order (closed membership, nonzero) or
// in the interior (weak).
template <class T>
bool dominates(const OrderingCone& cone, const std::vector<T>& a, const std::vector<T>& b, bool weak, double tau) {
  auto d = difference(b, a);
  if (weak) return cone_member(cone, d, Membership::interior, tau);
  return nonzero(d, tau) && cone_member(cone, d, Membership::closed, tau);
}

// Scalar objective: both notions reduce to argmin up to tau.
template <class T>
std::vector<std::size_t> scalar_minimal(const ImageSet<T>& s, double tau) {
  T best = s.points.front()[0];
  for (const auto& p : s.points) best = std::min(best, p[0]);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if constexpr (std::is_floating_point_v<T>) {
      if (s.points[i][0] - best <= tau) out.push_back(i);
    } else {
      if (s.points[i][0] == best) out.push_back(i);
    }
  }
  return out;
}

// R^2_+ sweep: sort by (z1, z2), compare against the running minimum of z2
// over strictly smaller z1 and against the minimum inside the z1 tie group.
template <class T>
std::vector<std::size_t> orthant2_minimal(const ImageSet<T>& s, bool weak) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.points[a] < s.points[b]; });
  std::vector<std::size_t> out;
  std::optional<T> best_prev;
  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t e = g;
    const T& a = s.points[order[g]][0];
    while (e < order.size() && s.points[order[e]][0] == a) ++e;
    const T& group_min = s.points[order[g]][1];
    for (std::size_t k = g; k < e; ++k) {
      const T& z2 = s.points[order[k]][1];
      bool dominated = weak ? (best_prev && *best_prev < z2) : ((best_prev && *best_prev <= z2) || group_min < z2);
      if (!dominated) out.push_back(order[k]);
    }
    best_prev = best_prev ? std::min(*best_prev, group_min) : group_min;
    g = e;
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <class T>
std::vector<std::size_t> minimal_indices(const ImageSet<T>& s, const OrderingCone& cone, bool weak,
                                         const DominanceOptions& opt) {
  s.validate();
  if (s.dim() != cone.dim()) throw InvalidInput("image dimension does not match cone dimension");
  if (s.dim() == 1) return scalar_minimal(s, opt.tau);
  if (opt.allow_fast_path && opt.tau == 0 && s.dim() == 2 && cone.is_orthant()) return orthant2_minimal(s, weak);
  std::vector<std::size_t> out;
  if constexpr (std::is_floating_point_v<T>) {
    const auto& duals = cone.dual_generators_double();
    const std::size_t q = s.dim();
    const double tau = opt.tau;
    auto dom = [&](const std::vector<T>& a, const std::vector<T>& b) {
      bool any = weak;
      for (std::size_t k = 0; k < q && !any; ++k) any = std::abs(b[k] - a[k]) > tau;
      if (!any) return false;
      for (const auto& h : duals) {
        double d = 0;
        for (std::size_t k = 0; k < q; ++k) d += h[k] * (b[k] - a[k]);
        if (weak ? d <= tau : d < -tau) return false;
      }
      return true;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < s.size() && !dominated; ++j)
        if (j != i && dom(s.points[j], s.points[i])) dominated = true;
      if (!dominated) out.push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < s.size() && !dominated; ++j)
        if (j != i && dominates(cone, s.points[j], s.points[i], weak, opt.tau)) dominated = true;
      if (!dominated) out.push_back(i);
    }
  }
  return out;
}

}  // namespace detail

/// Indices i with no j such that images[i] - images[j] lies in cone \ {0}.
/// Equal images are kept together.
template <class T>
std::vector<std::size_t> nondominated(const ImageSet<T>& images, const OrderingCone& cone,
                                      const DominanceOptions& opt = {}) {
  return detail::minimal_indices(images, cone, false, opt);
}

/// Indices i with no j such that images[i] - images[j] lies in int cone.
template <class T>
std::vector<std::size_t> weakly_nondominated(const ImageSet<T>& images, const OrderingCone& cone,
                                             const DominanceOptions& opt = {}) {
  return detail::minimal_indices(images, cone, true, opt);
}

enum class DominationMode { strong, weak };

struct DominationResult {
  bool holds = true;
  std::optional<std::size_t> witness;  // index of an uncovered image
};

/// Checks images ⊂ ND(images) + cone (strong) or images ⊂ WND(images) + cone (weak).
template <class T>
DominationResult domination_holds(const ImageSet<T>& images, const OrderingCone& cone, DominationMode mode,
                                  const DominanceOptions& opt = {}) {
  auto minimal = mode == DominationMode::strong ? nondominated(images, cone, opt) : weakly_nondominated(images, cone, opt);
  DominationResult r;
  for (std::size_t i = 0; i < images.size(); ++i) {
    bool covered = std::any_of(minimal.begin(), minimal.end(), [&](std::size_t j) {
      return detail::cone_member(cone, detail::difference(images.points[i], images.points[j]), Membership::closed, opt.tau);
    });
    if (!covered) {
      r.holds = false;
      r.witness = i;
      return r;
    }
  }
  return r;
}

// --- distances ---

inline double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double distance_to_set(const std::vector<double>& p, const std::vector<std::vector<double>>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set) best = std::min(best, euclidean_distance(p, q));
  return best;
}

/// One-sided excess sup_{a in A} dist(a, B).
inline double excess(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  double e = 0;
  for (const auto& p : a) e = std::max(e, distance_to_set(p, b));
  return e;
}

/// Hausdorff distance; +inf when exactly one side is empty, 0 when both are.
inline double hausdorff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(excess(a, b), excess(b, a));
}

// --- I/O: CSV (one point per row, optional leading label column) and JSON ---

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
std::string format_scalar(const T& v) {
  if constexpr (std::is_floating_point_v<T>) return format_double(v);
  else return to_string(v);
}

template <class T>
T parse_scalar(const std::string& text) {
  if constexpr (std::is_floating_point_v<T>) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw InvalidInput("bad number '" + text + "'");
    }
    if (used != text.size()) throw InvalidInput("bad number '" + text + "'");
    return v;
  } else {
    return parse_rational(text);
  }
}

template <class T>
void write_csv(std::ostream& os, const ImageSet<T>& s) {
  const bool labelled = !s.labels.empty();
  if (labelled) os << "label,";
  for (std::size_t k = 0; k < s.dim(); ++k) os << (k ? "," : "") << "z" << k + 1;
  os << "\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (labelled) os << s.labels[i] << ",";
    for (std::size_t k = 0; k < s.points[i].size(); ++k) os << (k ? "," : "") << format_scalar(s.points[i][k]);
    os << "\n";
  }
}

template <class T>
ImageSet<T> read_csv(std::istream& is) {
  ImageSet<T> s;
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("empty CSV");
  const bool labelled = line.rfind("label", 0) == 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    std::size_t start = 0;
    if (labelled) {
      s.labels.push_back(cells.at(0));
      start = 1;
    }
    std::vector<T> p;
    for (std::size_t k = start; k < cells.size(); ++k) p.push_back(parse_scalar<T>(cells[k]));
    s.points.push_back(std::move(p));
  }
  s.validate();
  return s;
}

template <class T>
nlohmann::json to_json(const ImageSet<T>& s) {
  nlohmann::json j;
  auto pts = nlohmann::json::array();
  for (const auto& p : s.points) {
    auto row = nlohmann::json::array();
    for (const auto& v : p) {
      if constexpr (std::is_floating_point_v<T>) row.push_back(v);
      else row.push_back(to_string(v));
    }
    pts.push_back(row);
  }
  j["points"] = pts;
  if (!s.labels.empty()) j["labels"] = s.labels;
  return j;
}

template <class T>
ImageSet<T> image_set_from_json(const nlohmann::json& j) {
  ImageSet<T> s;
  const auto& pts = j.is_array() ? j : j.at("points");
  for (const auto& row : pts) {
    std::vector<T> p;
    for (const auto& v : row) {
      if constexpr (std::is_floating_point_v<T>) p.push_back(v.is_string() ? parse_scalar<T>(v.get<std::string>()) : v.get<double>());
      else p.push_back(rational_from_json(v));
    }
    s.points.push_back(std::move(p));
  }
  if (j.is_object() && j.contains("labels")) s.labels = j.at("labels").get<std::vector<std::string>>();
  s.validate();
  return s;
}

}  // namespace mobilevel
