#pragma once

// Uniform hash grid for fixed-radius neighbour queries in low dimension.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

namespace mobilevel {

class PointIndex {
 public:
  PointIndex(const std::vector<std::vector<double>>& points, double cell) : points_(points), cell_(cell) {
    if (!(cell_ > 0)) cell_ = 1.0;
    for (std::size_t i = 0; i < points_.size(); ++i) buckets_[key(cell_of(points_[i]))].push_back(i);
  }

  /// Calls fn(index) for every point within `radius` (<= cell) of p.
  void for_each_within(const std::vector<double>& p, double radius, const std::function<void(std::size_t)>& fn) const {
    auto c = cell_of(p);
    std::vector<long long> off(c.size(), -1);
    for (;;) {
      std::vector<long long> nb(c.size());
      for (std::size_t k = 0; k < c.size(); ++k) nb[k] = c[k] + off[k];
      if (auto it = buckets_.find(key(nb)); it != buckets_.end())
        for (auto i : it->second)
          if (distance(points_[i], p) <= radius) fn(i);
      std::size_t k = 0;
      while (k < off.size() && off[k] == 1) off[k++] = -1;
      if (k == off.size()) break;
      ++off[k];
    }
  }

  bool any_within(const std::vector<double>& p, double radius) const {
    bool found = false;
    for_each_within(p, radius, [&](std::size_t) { found = true; });
    return found;
  }

  /// Nearest point within `radius`, or npos.
  std::size_t nearest_within(const std::vector<double>& p, double radius) const {
    std::size_t best = npos;
    double best_d = std::numeric_limits<double>::infinity();
    for_each_within(p, radius, [&](std::size_t i) {
      double d = distance(points_[i], p);
      if (d < best_d || (d == best_d && i < best)) {
        best_d = d;
        best = i;
      }
    });
    return best;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  static double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }

 private:
  std::vector<long long> cell_of(const std::vector<double>& p) const {
    std::vector<long long> c(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) c[k] = static_cast<long long>(std::floor(p[k] / cell_));
    return c;
  }

  static std::uint64_t key(const std::vector<long long>& c) {
    std::uint64_t h = 1469598103934665603ULL;
    for (long long v : c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h *= 1099511628211ULL;
    }
    return h;
  }

  const std::vector<std::vector<double>>& points_;
  double cell_;
  // Hash collisions only merge buckets; distances are always checked.
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace mobilevel
