#pragma once

// Linear programs as data: named, bounded columns, sparse rows with a
// relation and right-hand side, and a single linear objective. Columns carry
// a structured key describing which scheduling quantity they stand for, so
// rounding code can look variables up by role instead of by name string.
//
// Column roles:
//   frac    per-flow per-interval delivered volume fraction
//   done    per-flow completion value
//   flow    per-flow per-interval volume fraction routed on one arc
//   ptflow  per-packet flow on one time-expanded arc
//   arrive  per-packet arrival indicator at one time step
//   mass    per-packet per-interval arrival mass
//   aux     anything else (tests, ad-hoc programs)

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace coflow {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct VarKey {
  enum class Kind { frac, done, flow, ptflow, arrive, mass, aux };
  Kind kind = Kind::aux;
  int coflow = -1;
  int flow = -1;
  int interval = -1;
  int arc = -1;   // network arc for `flow`, expanded arc for `ptflow`
  int step = -1;  // time step for `arrive`

  friend bool operator==(const VarKey&, const VarKey&) = default;
  friend bool operator<(const VarKey& a, const VarKey& b) {
    return std::tie(a.kind, a.coflow, a.flow, a.interval, a.arc, a.step) <
           std::tie(b.kind, b.coflow, b.flow, b.interval, b.arc, b.step);
  }
};

enum class Rel { le, ge, eq };

struct LpVar {
  std::string name;
  double lo = 0.0;
  double hi = kInf;
  double obj = 0.0;
  VarKey key;
};

struct LpRow {
  std::string name;
  Rel rel = Rel::le;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> coeffs;  // (column, coefficient)
};

class LpProblem {
 public:
  bool maximize = false;

  int add_var(std::string name, double lo, double hi, double obj, VarKey key = {}) {
    if (name.empty()) throw std::invalid_argument("lp: empty variable name");
    if (lo > hi) throw std::invalid_argument("lp: crossed bounds on " + name);
    const int col = static_cast<int>(vars_.size());
    vars_.push_back({std::move(name), lo, hi, obj, key});
    if (key.kind != VarKey::Kind::aux) {
      auto [it, fresh] = by_key_.emplace(key, col);
      if (!fresh) throw std::invalid_argument("lp: duplicate variable key");
    }
    return col;
  }

  int add_row(std::string name, Rel rel, double rhs,
              std::vector<std::pair<int, double>> coeffs) {
    std::map<int, double> merged;
    for (auto [col, v] : coeffs) {
      if (col < 0 || col >= var_count())
        throw std::invalid_argument("lp: row references undeclared column");
      merged[col] += v;
    }
    LpRow row;
    row.name = std::move(name);
    row.rel = rel;
    row.rhs = rhs;
    for (auto [col, v] : merged)
      if (v != 0.0) row.coeffs.emplace_back(col, v);
    rows_.push_back(std::move(row));
    return static_cast<int>(rows_.size()) - 1;
  }

  int var_count() const { return static_cast<int>(vars_.size()); }
  int row_count() const { return static_cast<int>(rows_.size()); }
  const LpVar& var(int col) const { return vars_.at(static_cast<std::size_t>(col)); }
  const LpRow& row(int r) const { return rows_.at(static_cast<std::size_t>(r)); }
  const std::vector<LpVar>& vars() const { return vars_; }
  const std::vector<LpRow>& rows() const { return rows_; }

  int find_var(const VarKey& key) const {
    auto it = by_key_.find(key);
    return it == by_key_.end() ? -1 : it->second;
  }

  void set_bounds(int col, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("lp: crossed bounds");
    vars_.at(static_cast<std::size_t>(col)).lo = lo;
    vars_.at(static_cast<std::size_t>(col)).hi = hi;
  }

  void set_objective(int col, double obj) { vars_.at(static_cast<std::size_t>(col)).obj = obj; }

  double objective_value(const std::vector<double>& x) const {
    double v = 0.0;
    for (int j = 0; j < var_count(); ++j)
      v += vars_[static_cast<std::size_t>(j)].obj * x[static_cast<std::size_t>(j)];
    return v;
  }

  double row_activity(int r, const std::vector<double>& x) const {
    double v = 0.0;
    for (auto [col, a] : rows_[static_cast<std::size_t>(r)].coeffs)
      v += a * x[static_cast<std::size_t>(col)];
    return v;
  }

  // Largest relative violation of any row or bound at point x.
  double max_violation(const std::vector<double>& x) const {
    if (x.size() != vars_.size()) throw std::invalid_argument("lp: point has wrong dimension");
    double worst = 0.0;
    for (int r = 0; r < row_count(); ++r) {
      const LpRow& row = rows_[static_cast<std::size_t>(r)];
      const double act = row_activity(r, x);
      const double scale = std::max(1.0, std::abs(row.rhs));
      double gap = 0.0;
      if (row.rel == Rel::le) gap = act - row.rhs;
      if (row.rel == Rel::ge) gap = row.rhs - act;
      if (row.rel == Rel::eq) gap = std::abs(act - row.rhs);
      worst = std::max(worst, gap / scale);
    }
    for (int j = 0; j < var_count(); ++j) {
      const LpVar& v = vars_[static_cast<std::size_t>(j)];
      const double xv = x[static_cast<std::size_t>(j)];
      const double scale = std::max(1.0, std::abs(xv));
      worst = std::max(worst, (v.lo - xv) / scale);
      worst = std::max(worst, (xv - v.hi) / scale);
    }
    return worst;
  }

 private:
  std::vector<LpVar> vars_;
  std::vector<LpRow> rows_;
  std::map<VarKey, int> by_key_;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numeric_error };

inline const char* lp_status_name(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration-limit";
    case LpStatus::numeric_error: return "numeric-error";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::numeric_error;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
  double max_violation = 0.0;  // independent re-check of the returned point
};

}  // namespace coflow
