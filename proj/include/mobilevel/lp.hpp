#pragma once

// Dense two-phase primal simplex over exact rationals with Bland's rule.
// Every optimal solve re-derives the dual from the final basis and checks
// dual feasibility and a zero duality gap; a violation throws.

#include "mobilevel/rational.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobilevel {

enum class RowSense { le, ge, eq };

struct LinearProgram {
  QVec objective;             // minimized
  QMat rows;                  // constraint matrix, one row per constraint
  QVec rhs;
  std::vector<RowSense> senses;
  std::vector<bool> nonnegative;  // per variable; false means free

  std::size_t num_vars() const { return objective.size(); }

  void validate() const {
    const auto n = objective.size();
    if (rhs.size() != rows.size() || senses.size() != rows.size())
      throw InvalidInput("linear program: rows, rhs and senses differ in length");
    if (nonnegative.size() != n) throw InvalidInput("linear program: sign flags do not match variable count");
    for (const auto& r : rows)
      if (r.size() != n) throw InvalidInput("linear program: row length does not match variable count");
  }

  /// Builder for the common "A x <= b, x free" case.
  static LinearProgram free_le(QVec c, QMat a, QVec b) {
    LinearProgram lp;
    lp.objective = std::move(c);
    lp.rows = std::move(a);
    lp.rhs = std::move(b);
    lp.senses.assign(lp.rows.size(), RowSense::le);
    lp.nonnegative.assign(lp.objective.size(), false);
    return lp;
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Rational value;
  QVec x;     // optimal basic solution (optimal) or a feasible point (unbounded)
  QVec ray;   // improving recession direction (unbounded)
  QVec dual;  // one multiplier per original row (optimal)
  bool duality_checked = false;
};

namespace detail {

class Tableau {
 public:
  // Standard form: min c^T v, M v = b, v >= 0, b >= 0.
  Tableau(QMat m, QVec b, QVec c) : m_(std::move(m)), b_(std::move(b)), c_(std::move(c)) {}

  LpResult run(std::size_t n_orig, const std::vector<std::pair<long, long>>& var_cols,
               const std::vector<int>& row_sign, const QMat& orig_rows) {
    const std::size_t rows = m_.size();
    const std::size_t cols = c_.size();
    // Phase one: artificial identity appended.
    t_.assign(rows, QVec(cols + rows + 1, Rational(0)));
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) t_[i][j] = m_[i][j];
      t_[i][cols + i] = 1;
      t_[i].back() = b_[i];
    }
    basis_.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) basis_[i] = cols + i;
    active_rows_.assign(rows, true);

    QVec phase1(cols + rows, Rational(0));
    for (std::size_t i = 0; i < rows; ++i) phase1[cols + i] = 1;
    iterate(phase1, cols + rows, nullptr);
    Rational infeas = 0;
    for (std::size_t i = 0; i < rows; ++i)
      if (active_rows_[i]) infeas += phase1[basis_[i]] * t_[i].back();
    LpResult res;
    if (infeas > 0) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // Drive zero-level artificials out; drop redundant rows.
    for (std::size_t i = 0; i < rows; ++i) {
      if (basis_[i] < cols) continue;
      std::size_t j = 0;
      while (j < cols && t_[i][j] == 0) ++j;
      if (j < cols) {
        pivot(i, j);
      } else {
        active_rows_[i] = false;
      }
    }
    QVec phase2(cols + rows, Rational(0));
    for (std::size_t j = 0; j < cols; ++j) phase2[j] = c_[j];
    std::optional<std::size_t> unbounded_col;
    iterate(phase2, cols, &unbounded_col);

    QVec v(cols, Rational(0));
    for (std::size_t i = 0; i < rows; ++i)
      if (active_rows_[i] && basis_[i] < cols) v[basis_[i]] = t_[i].back();
    auto to_orig = [&](const QVec& sv) {
      QVec x(n_orig, Rational(0));
      for (std::size_t k = 0; k < n_orig; ++k) {
        auto [p, q] = var_cols[k];
        x[k] = sv[p];
        if (q >= 0) x[k] -= sv[q];
      }
      return x;
    };
    res.x = to_orig(v);
    if (unbounded_col) {
      QVec d(cols, Rational(0));
      d[*unbounded_col] = 1;
      for (std::size_t i = 0; i < rows; ++i)
        if (active_rows_[i] && basis_[i] < cols) d[basis_[i]] = -t_[i][*unbounded_col];
      res.status = LpStatus::unbounded;
      res.ray = to_orig(d);
      return res;
    }
    res.status = LpStatus::optimal;
    res.value = dot(c_, v);
    res.dual = certify(v, res.value, row_sign, orig_rows.size());
    res.duality_checked = true;
    return res;
  }

 private:
  Rational reduced_cost(const QVec& cost, std::size_t j) const {
    Rational r = cost[j];
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (active_rows_[i]) r -= cost[basis_[i]] * t_[i][j];
    return r;
  }

  void pivot(std::size_t r, std::size_t c) {
    Rational inv = 1 / t_[r][c];
    for (auto& q : t_[r]) q *= inv;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i == r || t_[i][c] == 0) continue;
      Rational f = t_[i][c];
      for (std::size_t k = 0; k < t_[i].size(); ++k) t_[i][k] -= f * t_[r][k];
    }
    basis_[r] = c;
  }

  // Bland's rule: lowest-index entering column, ties in the ratio test broken
  // by lowest basic variable index.
  void iterate(const QVec& cost, std::size_t allowed_cols, std::optional<std::size_t>* unbounded) {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < allowed_cols; ++j) {
        if (is_basic(j)) continue;
        if (reduced_cost(cost, j) < 0) {
          enter = j;
          break;
        }
      }
      if (!enter) return;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < t_.size(); ++i) {
        if (!active_rows_[i] || t_[i][*enter] <= 0) continue;
        Rational ratio = t_[i].back() / t_[i][*enter];
        if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) {
        if (unbounded) *unbounded = *enter;
        return;
      }
      pivot(*leave, *enter);
    }
  }

  bool is_basic(std::size_t j) const {
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (active_rows_[i] && basis_[i] == j) return true;
    return false;
  }

  // Solves B^T pi = c_B on the surviving rows, then checks A^T pi <= c and
  // b^T pi == c^T v exactly.
  QVec certify(const QVec& v, const Rational& value, const std::vector<int>& row_sign, std::size_t n_rows) const {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < m_.size(); ++i)
      if (active_rows_[i]) live.push_back(i);
    const std::size_t k = live.size();
    QMat bt(k, QVec(k, Rational(0)));
    QVec cb(k);
    for (std::size_t a = 0; a < k; ++a) {
      std::size_t col = basis_[live[a]];
      cb[a] = col < c_.size() ? c_[col] : Rational(0);
      for (std::size_t r = 0; r < k; ++r) bt[a][r] = col < c_.size() ? m_[live[r]][col] : Rational(live[r] == col - c_.size() ? 1 : 0);
    }
    QVec pi;
    if (k > 0 && !solve_square(bt, cb, pi)) throw std::logic_error("simplex: singular final basis");
    QVec full(m_.size(), Rational(0));
    for (std::size_t a = 0; a < k; ++a) full[live[a]] = pi[a];
    Rational dual_value = 0;
    for (std::size_t i = 0; i < m_.size(); ++i) dual_value += b_[i] * full[i];
    for (std::size_t j = 0; j < c_.size(); ++j) {
      Rational r = c_[j];
      for (std::size_t i = 0; i < m_.size(); ++i) r -= m_[i][j] * full[i];
      if (r < 0) throw std::logic_error("simplex: dual infeasible at reported optimum");
    }
    if (dual_value != value || dot(c_, v) != value) throw std::logic_error("simplex: nonzero duality gap");
    QVec out(n_rows, Rational(0));
    for (std::size_t i = 0; i < n_rows; ++i) out[i] = full[i] * row_sign[i];
    return out;
  }

  QMat m_;
  QVec b_;
  QVec c_;
  QMat t_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_rows_;
};

}  // namespace detail

/// Solves min c^T x subject to the rows of `lp`.
///
/// The dual vector refers to the original rows in the convention
/// max b^T y, A^T y (=|<=) c, with y <= 0 on <= rows and y >= 0 on >= rows.
inline LpResult lp_solve(const LinearProgram& lp) {
  lp.validate();
  const std::size_t n = lp.num_vars();
  std::vector<std::pair<long, long>> var_cols(n);
  std::size_t cols = 0;
  for (std::size_t k = 0; k < n; ++k) {
    var_cols[k].first = static_cast<long>(cols++);
    var_cols[k].second = lp.nonnegative[k] ? -1 : static_cast<long>(cols++);
  }
  std::size_t slack_start = cols;
  for (auto s : lp.senses)
    if (s != RowSense::eq) ++cols;
  QMat m(lp.rows.size(), QVec(cols, Rational(0)));
  QVec b(lp.rows.size());
  std::vector<int> sign(lp.rows.size(), 1);
  std::size_t slack = slack_start;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      m[i][var_cols[k].first] = lp.rows[i][k];
      if (var_cols[k].second >= 0) m[i][var_cols[k].second] = -lp.rows[i][k];
    }
    if (lp.senses[i] == RowSense::le) m[i][slack++] = 1;
    if (lp.senses[i] == RowSense::ge) m[i][slack++] = -1;
    b[i] = lp.rhs[i];
    if (b[i] < 0) {
      sign[i] = -1;
      b[i] = -b[i];
      for (auto& q : m[i]) q = -q;
    }
  }
  QVec c(cols, Rational(0));
  for (std::size_t k = 0; k < n; ++k) {
    c[var_cols[k].first] = lp.objective[k];
    if (var_cols[k].second >= 0) c[var_cols[k].second] = -lp.objective[k];
  }
  detail::Tableau tab(std::move(m), std::move(b), std::move(c));
  return tab.run(n, var_cols, sign, lp.rows);
}

/// Feasibility of {x : rows x (senses) rhs}, x free; returns a point if feasible.
inline std::optional<QVec> lp_feasible_point(const QMat& rows, const QVec& rhs, const std::vector<RowSense>& senses,
                                             std::size_t dim) {
  LinearProgram lp;
  lp.objective.assign(dim, Rational(0));
  lp.rows = rows;
  lp.rhs = rhs;
  lp.senses = senses;
  lp.nonnegative.assign(dim, false);
  auto r = lp_solve(lp);
  if (r.status == LpStatus::infeasible) return std::nullopt;
  return r.x;
}

// --- JSON form: rationals as strings ("3/7"), numbers accepted on input ---

inline Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return parse_rational(j.dump());
  throw InvalidInput("expected a rational (string or number), got " + j.dump());
}

inline QVec qvec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidInput("expected an array of rationals, got " + j.dump());
  QVec v;
  for (const auto& e : j) v.push_back(rational_from_json(e));
  return v;
}

inline QMat qmat_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw InvalidInput("expected a matrix (array of arrays), got " + j.dump());
  QMat m;
  for (const auto& r : j) m.push_back(qvec_from_json(r));
  return m;
}

inline nlohmann::json to_json(const QVec& v) {
  auto out = nlohmann::json::array();
  for (const auto& q : v) out.push_back(to_string(q));
  return out;
}

inline nlohmann::json to_json(const QMat& m) {
  auto out = nlohmann::json::array();
  for (const auto& r : m) out.push_back(to_json(r));
  return out;
}

inline nlohmann::json to_json(const LinearProgram& lp) {
  nlohmann::json j;
  j["objective"] = to_json(lp.objective);
  j["rows"] = to_json(lp.rows);
  j["rhs"] = to_json(lp.rhs);
  auto senses = nlohmann::json::array();
  for (auto s : lp.senses) senses.push_back(s == RowSense::le ? "<=" : s == RowSense::ge ? ">=" : "=");
  j["senses"] = senses;
  auto signs = nlohmann::json::array();
  for (bool b : lp.nonnegative) signs.push_back(b ? "nonneg" : "free");
  j["variables"] = signs;
  return j;
}

inline LinearProgram linear_program_from_json(const nlohmann::json& j) {
  LinearProgram lp;
  lp.objective = qvec_from_json(j.at("objective"));
  lp.rows = j.contains("rows") ? qmat_from_json(j.at("rows")) : QMat{};
  lp.rhs = j.contains("rhs") ? qvec_from_json(j.at("rhs")) : QVec{};
  if (j.contains("senses")) {
    for (const auto& s : j.at("senses")) {
      auto t = s.get<std::string>();
      if (t == "<=") lp.senses.push_back(RowSense::le);
      else if (t == ">=") lp.senses.push_back(RowSense::ge);
      else if (t == "=") lp.senses.push_back(RowSense::eq);
      else throw InvalidInput("unknown row sense '" + t + "'");
    }
  } else {
    lp.senses.assign(lp.rows.size(), RowSense::le);
  }
  if (j.contains("variables")) {
    for (const auto& s : j.at("variables")) {
      auto t = s.get<std::string>();
      if (t != "free" && t != "nonneg") throw InvalidInput("unknown variable sign '" + t + "'");
      lp.nonnegative.push_back(t == "nonneg");
    }
  } else {
    lp.nonnegative.assign(lp.objective.size(), false);
  }
  lp.validate();
  return lp;
}

}  // namespace mobilevel
