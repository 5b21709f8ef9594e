#pragma once

// Coderivative estimates for frontier and solution mappings, evaluated on the
// exact local polyhedral models stored with catalog problems.

#include "mobilevel/parametric.hpp"
#include "mobilevel/varanal.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace mobilevel {

enum class EstimateKind {
  weak_frontier,      // D*Phi_w ⊆ D*(Sigma + C)
  frontier_image,     // D*Phi ⊆ D*Sigma
  feasibility_chain,  // D*Phi_w ⊆ ∪ f_x^T z* + D*Gamma(f_y^T z*)
  solution_chain,     // D*Phi_w ⊆ ∪ f_x^T z* + D*Psi_w(f_y^T z*)
};

inline std::string to_string(EstimateKind k) {
  switch (k) {
    case EstimateKind::weak_frontier: return "weak_frontier";
    case EstimateKind::frontier_image: return "frontier_image";
    case EstimateKind::feasibility_chain: return "feasibility_chain";
    case EstimateKind::solution_chain: return "solution_chain";
  }
  return "?";
}

inline EstimateKind estimate_kind_from_string(const std::string& s) {
  for (auto k : {EstimateKind::weak_frontier, EstimateKind::frontier_image, EstimateKind::feasibility_chain,
                 EstimateKind::solution_chain})
    if (to_string(k) == s) return k;
  throw InvalidInput("unknown estimate kind '" + s + "' (weak_frontier, frontier_image, feasibility_chain, solution_chain)");
}

struct EstimateReport {
  EstimateKind kind{};
  QVec z_star;
  bool strict_dual = false;  // z* in C*_>
  SliceUnion lhs, rhs;
  bool holds = false;
  std::optional<QVec> witness;
  bool equality = false;
  std::string note;
};

namespace detail {

inline QVec concat(const QVec& a, const QVec& b) {
  QVec r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

inline QVec transpose_apply(const QMat& m, const QVec& z, std::size_t cols) {
  QVec out(cols, Rational(0));
  for (std::size_t k = 0; k < m.size(); ++k)
    for (std::size_t j = 0; j < cols; ++j) out[j] += m[k][j] * z[k];
  return out;
}

inline const LocalModels& models_of(const ParametricMOP& p) {
  if (!p.models) throw InvalidInput(p.id + ": no local polyhedral models for coderivative checks");
  return *p.models;
}

}  // namespace detail

/// Limiting normal cone of one of the stored graph models at its reference point.
inline ConeUnion model_normal_cone(const ParametricMOP& p, const std::string& graph, std::size_t preimage = 0) {
  const auto& M = detail::models_of(p);
  const QVec xz = detail::concat(M.x_bar, M.z_bar);
  auto at_xz = [&](const std::vector<HData>& h) {
    if (h.empty()) throw InvalidInput(p.id + ": model for " + graph + " is missing");
    return limiting_normal_cone_union(PolyUnion::from_hdata(xz.size(), h, graph), xz);
  };
  if (graph == "sigma") return at_xz(M.gph_sigma);
  if (graph == "sigma_plus_c") return at_xz(M.gph_sigma_plus_c);
  if (graph == "phi") return at_xz(M.gph_phi);
  if (graph == "phi_w") return at_xz(M.gph_phi_w);
  if (graph == "gamma" || graph == "psi_w") {
    if (preimage >= M.preimages.size()) throw InvalidInput(p.id + ": no preimage point for " + graph);
    const QVec xy = detail::concat(M.x_bar, M.preimages[preimage].y_bar);
    const auto& h = graph == "gamma" ? M.gph_gamma : M.gph_psi_w;
    if (h.empty()) throw InvalidInput(p.id + ": model for " + graph + " is missing");
    return limiting_normal_cone_union(PolyUnion::from_hdata(xy.size(), h, graph), xy);
  }
  throw InvalidInput("unknown graph '" + graph + "' (sigma, sigma_plus_c, phi, phi_w, gamma, psi_w)");
}

inline EstimateReport estimate_check(const ParametricMOP& p, EstimateKind kind, const QVec& z_star) {
  const auto& M = detail::models_of(p);
  if (z_star.size() != p.q) throw InvalidInput("z* has wrong dimension");
  const std::size_t n = M.x_bar.size();
  EstimateReport r;
  r.kind = kind;
  r.z_star = z_star;
  r.strict_dual = p.cone.strict_dual_contains(z_star);
  switch (kind) {
    case EstimateKind::weak_frontier:
      r.lhs = coderivative_slice(model_normal_cone(p, "phi_w"), n, z_star);
      r.rhs = coderivative_slice(model_normal_cone(p, "sigma_plus_c"), n, z_star);
      if (!r.strict_dual) r.note = "z* is not in the strict dual cone; the inclusion is not guaranteed";
      break;
    case EstimateKind::frontier_image:
      r.lhs = coderivative_slice(model_normal_cone(p, "phi"), n, z_star);
      r.rhs = coderivative_slice(model_normal_cone(p, "sigma"), n, z_star);
      r.note = "estimate without the ordering cone; expected to fail in general";
      break;
    case EstimateKind::feasibility_chain:
    case EstimateKind::solution_chain: {
      if (M.preimages.empty()) throw InvalidInput(p.id + ": no preimage points stored");
      r.lhs = coderivative_slice(model_normal_cone(p, "phi_w"), n, z_star);
      r.rhs.dim = n;
      const std::string graph = kind == EstimateKind::feasibility_chain ? "gamma" : "psi_w";
      for (std::size_t i = 0; i < M.preimages.size(); ++i) {
        const auto& pre = M.preimages[i];
        const QVec y_star = detail::transpose_apply(pre.fy, z_star, pre.y_bar.size());
        const QVec shift = detail::transpose_apply(pre.fx, z_star, n);
        r.rhs = unite(r.rhs, translate(coderivative_slice(model_normal_cone(p, graph, i), n, y_star), shift));
      }
      if (!r.strict_dual) r.note = "z* is not in the strict dual cone; the hypothesis of the chain estimate fails";
      break;
    }
  }
  auto inc = inclusion_check(r.lhs, r.rhs);
  r.holds = inc.holds;
  r.witness = inc.witness;
  r.equality = r.holds && inclusion_check(r.rhs, r.lhs).holds;
  if (!M.reduction_note.empty()) r.note += (r.note.empty() ? "" : "; ") + M.reduction_note;
  return r;
}

inline nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j{{"kind", to_string(r.kind)},
                   {"z_star", to_json(r.z_star)},
                   {"z_star_in_strict_dual", r.strict_dual},
                   {"lhs", to_json(r.lhs)},
                   {"rhs", to_json(r.rhs)},
                   {"holds", r.holds},
                   {"equality", r.equality}};
  if (r.witness) j["witness"] = to_json(*r.witness);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace mobilevel
