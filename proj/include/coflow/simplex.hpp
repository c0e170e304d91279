#pragma once

// Two-phase revised simplex over bounded variables.
//
// Every row gets one slack with bounds encoding its relation (<=: [0,inf),
// >=: (-inf,0], =: [0,0]), so the working system is always Ax + Is = b.
// Rows whose initial residual the slack cannot absorb get an artificial
// column; phase 1 minimizes the artificial total, phase 2 pins artificials
// to zero and minimizes the true cost.
//
// The basis inverse is kept in product form: a short eta file extended by
// one factor per pivot and rebuilt from scratch every few dozen pivots
// (singleton columns first, then by increasing density, pivoting on the
// largest available entry). Basic values are recomputed at every rebuild,
// which also caps drift from the incremental updates.
//
// Pricing is textbook Dantzig; after a long run of degenerate pivots the
// solver drops to Bland's rule until it makes real progress again, which
// rules out cycling. The returned point is re-checked against the original
// problem; a violation beyond the configured tolerance downgrades the
// status to numeric_error rather than returning a bad "optimal".

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "coflow/lp_problem.hpp"

namespace coflow {

struct SolveOptions {
  double feas_tol = 1e-7;   // relative tolerance of the post-solve re-check
  long iter_cap = 1000000;  // pivot budget across both phases
  int refactor_every = 64;  // eta-file length that triggers a rebuild
};

namespace detail {

class Simplex {
 public:
  Simplex(const LpProblem& p, const SolveOptions& opt) : prob_(p), opt_(opt) {
    m_ = p.row_count();
    const double sense = p.maximize ? -1.0 : 1.0;
    for (int j = 0; j < p.var_count(); ++j) {
      const LpVar& v = p.var(j);
      add_col(v.lo, v.hi, sense * v.obj);
    }
    structural_ = ncols_;
    for (int r = 0; r < m_; ++r)
      for (auto [col, a] : p.row(r).coeffs)
        if (a != 0.0) cols_[static_cast<std::size_t>(col)].push_back({r, a});
    b_.resize(static_cast<std::size_t>(m_));
    for (int r = 0; r < m_; ++r) {
      b_[static_cast<std::size_t>(r)] = p.row(r).rhs;
      double slo = 0.0, shi = 0.0;
      switch (p.row(r).rel) {
        case Rel::le: slo = 0.0, shi = kInf; break;
        case Rel::ge: slo = -kInf, shi = 0.0; break;
        case Rel::eq: slo = 0.0, shi = 0.0; break;
      }
      const int s = add_col(slo, shi, 0.0);
      cols_[static_cast<std::size_t>(s)].push_back({r, 1.0});
    }
    for (double c : cost_) cost_scale_ = std::max(cost_scale_, std::abs(c));
  }

  LpStatus run(long& iterations_out) {
    init_basis();
    LpStatus st = LpStatus::optimal;
    if (need_phase1_) {
      phase1_ = true;
      st = iterate();
      if (st == LpStatus::optimal) {
        double left = 0.0;
        for (int j = artificial_; j < ncols_; ++j)
          left += x_[static_cast<std::size_t>(j)];
        double scale = 1.0;
        for (double b : b_) scale = std::max(scale, std::abs(b));
        if (left > 1e-7 * scale) st = LpStatus::infeasible;
      } else if (st == LpStatus::unbounded) {
        st = LpStatus::numeric_error;  // phase 1 is bounded below by zero
      }
      for (int j = artificial_; j < ncols_; ++j) {
        lo_[static_cast<std::size_t>(j)] = 0.0;
        hi_[static_cast<std::size_t>(j)] = 0.0;
      }
    }
    if (st == LpStatus::optimal) {
      phase1_ = false;
      st = iterate();
    }
    if (st == LpStatus::optimal) refresh();  // final accuracy pass
    iterations_out = iterations_;
    return st;
  }

  double value(int col) const { return x_[static_cast<std::size_t>(col)]; }

 private:
  struct Eta {
    int p = -1;
    double diag = 1.0;
    std::vector<std::pair<int, double>> rest;
  };

  int add_col(double lo, double hi, double cost) {
    lo_.push_back(lo);
    hi_.push_back(hi);
    cost_.push_back(cost);
    x_.push_back(0.0);
    stat_.push_back(kAtLower);
    cols_.emplace_back();
    return ncols_++;
  }

  double nonbasic_start(int j) const {
    if (std::isfinite(lo_[static_cast<std::size_t>(j)])) return lo_[static_cast<std::size_t>(j)];
    if (std::isfinite(hi_[static_cast<std::size_t>(j)])) return hi_[static_cast<std::size_t>(j)];
    return 0.0;
  }

  void init_basis() {
    basis_.assign(static_cast<std::size_t>(m_), -1);
    for (int j = 0; j < ncols_; ++j) {
      x_[static_cast<std::size_t>(j)] = nonbasic_start(j);
      stat_[static_cast<std::size_t>(j)] =
          !std::isfinite(lo_[static_cast<std::size_t>(j)]) &&
                  !std::isfinite(hi_[static_cast<std::size_t>(j)])
              ? kFreeNB
              : (x_[static_cast<std::size_t>(j)] == lo_[static_cast<std::size_t>(j)] ? kAtLower
                                                                                     : kAtUpper);
    }
    std::vector<double> res = b_;
    for (int j = 0; j < structural_; ++j) {
      const double v = x_[static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      for (auto [r, a] : cols_[static_cast<std::size_t>(j)])
        res[static_cast<std::size_t>(r)] -= a * v;
    }
    artificial_ = ncols_;
    need_phase1_ = false;
    for (int r = 0; r < m_; ++r) {
      const int s = structural_ + r;
      const double want = res[static_cast<std::size_t>(r)];
      if (want >= lo_[static_cast<std::size_t>(s)] && want <= hi_[static_cast<std::size_t>(s)]) {
        basis_[static_cast<std::size_t>(r)] = s;
        stat_[static_cast<std::size_t>(s)] = kBasic;
        x_[static_cast<std::size_t>(s)] = want;
      } else {
        // slack stays at zero, an artificial absorbs the residual
        const int a = add_col(0.0, kInf, 0.0);
        cols_[static_cast<std::size_t>(a)].push_back({r, want >= 0.0 ? 1.0 : -1.0});
        basis_[static_cast<std::size_t>(r)] = a;
        stat_[static_cast<std::size_t>(a)] = kBasic;
        x_[static_cast<std::size_t>(a)] = std::abs(want);
        need_phase1_ = true;
      }
    }
    reinvert();
  }

  double phase_cost(int j) const {
    if (phase1_) return j >= artificial_ ? 1.0 : 0.0;
    return cost_[static_cast<std::size_t>(j)];
  }

  // ---- product-form inverse ------------------------------------------------

  void ftran(std::vector<double>& v) const {
    for (const Eta& e : etas_) {
      double t = v[static_cast<std::size_t>(e.p)];
      if (t == 0.0) continue;
      t /= e.diag;
      v[static_cast<std::size_t>(e.p)] = t;
      for (auto [i, a] : e.rest) v[static_cast<std::size_t>(i)] -= a * t;
    }
  }

  void ftran_tracked(std::vector<double>& v, std::vector<int>& touched) const {
    for (const Eta& e : etas_) {
      double t = v[static_cast<std::size_t>(e.p)];
      if (t == 0.0) continue;
      t /= e.diag;
      v[static_cast<std::size_t>(e.p)] = t;
      for (auto [i, a] : e.rest) {
        if (v[static_cast<std::size_t>(i)] == 0.0) touched.push_back(i);
        v[static_cast<std::size_t>(i)] -= a * t;
      }
    }
  }

  void btran(std::vector<double>& y) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = y[static_cast<std::size_t>(it->p)];
      for (auto [i, a] : it->rest) acc -= a * y[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(it->p)] = acc / it->diag;
    }
  }

  void reinvert() {
    etas_.clear();
    std::vector<int> order(static_cast<std::size_t>(m_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return cols_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(a)])].size() <
             cols_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(b)])].size();
    });
    std::vector<char> row_used(static_cast<std::size_t>(m_), 0);
    std::vector<int> new_basis(static_cast<std::size_t>(m_), -1);
    std::vector<double> work(static_cast<std::size_t>(m_), 0.0);
    std::vector<int> touched;
    for (int pos : order) {
      const int j = basis_[static_cast<std::size_t>(pos)];
      touched.clear();
      for (auto [r, a] : cols_[static_cast<std::size_t>(j)]) {
        work[static_cast<std::size_t>(r)] = a;
        touched.push_back(r);
      }
      ftran_tracked(work, touched);
      // A row cancelled to exactly zero and refilled by a later eta enters
      // `touched` twice; a duplicate would also duplicate its eta entry below.
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      int p = -1;
      double best = 0.0;
      for (int i : touched)
        if (!row_used[static_cast<std::size_t>(i)] &&
            std::abs(work[static_cast<std::size_t>(i)]) > best) {
          best = std::abs(work[static_cast<std::size_t>(i)]);
          p = i;
        }
      if (p < 0 || best < 1e-10) throw std::runtime_error("simplex: singular basis");
      Eta e;
      e.p = p;
      e.diag = work[static_cast<std::size_t>(p)];
      for (int i : touched)
        if (i != p && std::abs(work[static_cast<std::size_t>(i)]) > 1e-13)
          e.rest.push_back({i, work[static_cast<std::size_t>(i)]});
      etas_.push_back(std::move(e));
      row_used[static_cast<std::size_t>(p)] = 1;
      new_basis[static_cast<std::size_t>(p)] = j;
      for (int i : touched) work[static_cast<std::size_t>(i)] = 0.0;
    }
    basis_ = std::move(new_basis);
    base_etas_ = static_cast<int>(etas_.size());
    recompute_basics();
  }

  void recompute_basics() {
    std::vector<double> res = b_;
    std::vector<char> basic(static_cast<std::size_t>(ncols_), 0);
    for (int r = 0; r < m_; ++r) basic[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = 1;
    for (int j = 0; j < ncols_; ++j) {
      if (basic[static_cast<std::size_t>(j)]) continue;
      const double v = x_[static_cast<std::size_t>(j)];
      if (v == 0.0) continue;
      for (auto [r, a] : cols_[static_cast<std::size_t>(j)])
        res[static_cast<std::size_t>(r)] -= a * v;
    }
    ftran(res);
    for (int r = 0; r < m_; ++r)
      x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] =
          res[static_cast<std::size_t>(r)];
  }

  void refresh() {
    reinvert();
  }

  // ---- pivoting --------------------------------------------------------------

  LpStatus iterate() {
    const double dtol = 1e-9 * std::max(1.0, cost_scale_);
    int degenerate_streak = 0;
    bool bland = false;
    for (;;) {
      if (iterations_ >= opt_.iter_cap) return LpStatus::iteration_limit;
      if (static_cast<int>(etas_.size()) - base_etas_ >= opt_.refactor_every) reinvert();

      std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
      for (int r = 0; r < m_; ++r)
        y[static_cast<std::size_t>(r)] = phase_cost(basis_[static_cast<std::size_t>(r)]);
      btran(y);

      int enter = -1, dir = 0;
      double best_score = dtol;
      for (int j = 0; j < ncols_; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (stat_[js] == kBasic) continue;
        if (hi_[js] - lo_[js] <= 0.0) continue;  // fixed columns never move
        double d = phase_cost(j);
        for (auto [r, a] : cols_[js]) d -= a * y[static_cast<std::size_t>(r)];
        int cand_dir = 0;
        if (stat_[js] == kAtLower && d < -best_score) cand_dir = 1;
        else if (stat_[js] == kAtUpper && d > best_score) cand_dir = -1;
        else if (stat_[js] == kFreeNB && std::abs(d) > best_score) cand_dir = d < 0.0 ? 1 : -1;
        if (cand_dir == 0) continue;
        if (bland) {  // first eligible index wins
          enter = j;
          dir = cand_dir;
          break;
        }
        best_score = std::abs(d);
        enter = j;
        dir = cand_dir;
      }
      if (enter < 0) return LpStatus::optimal;
      const auto es = static_cast<std::size_t>(enter);

      std::vector<double> w(static_cast<std::size_t>(m_), 0.0);
      for (auto [r, a] : cols_[es]) w[static_cast<std::size_t>(r)] = a;
      ftran(w);

      // ratio test: entering moves by dir*t, basic r by -dir*t*w_r; the move
      // stops at the entering column's far bound or the first basic bound
      const double ptol = 1e-9;
      const double flip = hi_[es] - lo_[es];
      double limit = flip;
      int leave = -1;
      auto room_of = [&](int r, double g) {
        const auto bs = static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)]);
        double room;
        if (g < 0.0)
          room = std::isfinite(lo_[bs]) ? (x_[bs] - lo_[bs]) / -g : kInf;
        else
          room = std::isfinite(hi_[bs]) ? (hi_[bs] - x_[bs]) / g : kInf;
        return std::max(room, 0.0);
      };
      for (int r = 0; r < m_; ++r) {
        const double g = -dir * w[static_cast<std::size_t>(r)];
        if (std::abs(g) > ptol) limit = std::min(limit, room_of(r, g));
      }
      if (!std::isfinite(limit)) return LpStatus::unbounded;
      // Re-pick the most stable blocking row among those whose variable would
      // land within a hair of its bound after a step of `limit`. The slack is
      // measured in value space, (room - limit) * |g|: a step-space comparison
      // would accept rows with huge |g| whose variable is still far from its
      // bound, and snapping such a variable to the bound corrupts the iterate.
      double best_pivot = 0.0;
      for (int r = 0; r < m_; ++r) {
        const double g = -dir * w[static_cast<std::size_t>(r)];
        if (std::abs(g) <= ptol) continue;
        const double overshoot = (room_of(r, g) - limit) * std::abs(g);
        if (overshoot <= 1e-9 && std::abs(g) > best_pivot) {
          best_pivot = std::abs(g);
          leave = r;
        }
      }

      ++iterations_;
      if (limit <= 1e-11) {
        if (++degenerate_streak > 60) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      // apply the move
      x_[es] += dir * limit;
      if (limit > 0.0)
        for (int r = 0; r < m_; ++r) {
          const double g = -dir * w[static_cast<std::size_t>(r)];
          if (g != 0.0)
            x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] += g * limit;
        }

      if (leave < 0 || flip <= limit + 1e-12) {
        // bound flip: the entering column moves to its other bound, no pivot
        x_[es] = dir > 0 ? hi_[es] : lo_[es];
        stat_[es] = dir > 0 ? kAtUpper : kAtLower;
        continue;
      }

      // basis change at row `leave`
      const int out = basis_[static_cast<std::size_t>(leave)];
      const auto os = static_cast<std::size_t>(out);
      const double g_out = -dir * w[static_cast<std::size_t>(leave)];
      if (g_out < 0.0) {
        x_[os] = lo_[os];
        stat_[os] = kAtLower;
      } else {
        x_[os] = hi_[os];
        stat_[os] = kAtUpper;
      }
      basis_[static_cast<std::size_t>(leave)] = enter;
      stat_[es] = kBasic;
      Eta e;
      e.p = leave;
      e.diag = w[static_cast<std::size_t>(leave)];
      for (int r = 0; r < m_; ++r)
        if (r != leave && std::abs(w[static_cast<std::size_t>(r)]) > 1e-13)
          e.rest.push_back({r, w[static_cast<std::size_t>(r)]});
      etas_.push_back(std::move(e));
    }
  }

  enum : std::uint8_t { kBasic, kAtLower, kAtUpper, kFreeNB };

  const LpProblem& prob_;
  SolveOptions opt_;
  int m_ = 0;
  int ncols_ = 0;
  int structural_ = 0;
  int artificial_ = 0;
  bool need_phase1_ = false;
  bool phase1_ = false;
  double cost_scale_ = 1.0;
  long iterations_ = 0;
  int base_etas_ = 0;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, hi_, cost_, x_, b_;
  std::vector<std::uint8_t> stat_;
  std::vector<int> basis_;
  std::vector<Eta> etas_;
};

}  // namespace detail

inline LpSolution solve(const LpProblem& p, const SolveOptions& opt = {}) {
  LpSolution sol;
  if (p.var_count() == 0) throw std::invalid_argument("solve: problem has no variables");
  detail::Simplex s(p, opt);
  sol.status = s.run(sol.iterations);
  if (sol.status != LpStatus::optimal) return sol;
  sol.x.resize(static_cast<std::size_t>(p.var_count()));
  for (int j = 0; j < p.var_count(); ++j) sol.x[static_cast<std::size_t>(j)] = s.value(j);
  sol.objective = p.objective_value(sol.x);
  sol.max_violation = p.max_violation(sol.x);
  if (sol.max_violation > opt.feas_tol) sol.status = LpStatus::numeric_error;
  return sol;
}

}  // namespace coflow
