#pragma once

// Geometric time grids indexing the fluid and packet relaxations. A grid is a
// sequence of intervals; interval l spans (lower(l), upper(l)].
//
//   circuit: upper(l) = (1+eps)^l, so the intervals are (0,1], (1,1+eps], ...
//            The published boundary list starts with the origin 0.
//   packet:  upper(l) = 2^l over integral steps; interval 0 holds step 1.
//            The published boundary list is 1, 2, 4, ...
//
// Interval count L is the smallest count whose last upper boundary reaches the
// horizon. Completion bookkeeping weights an interval by its right endpoint;
// per-interval rate normalization divides by the left endpoint, except the
// first interval, which has length one and divides by one.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace coflow {

enum class GridKind { circuit, packet };

class IntervalGrid {
 public:
  static IntervalGrid make(GridKind kind, double eps, double horizon) {
    if (horizon <= 0.0) throw std::invalid_argument("grid: horizon must be positive");
    if (kind == GridKind::circuit && eps <= 0.0)
      throw std::invalid_argument("grid: epsilon must be positive");
    if (kind == GridKind::packet && eps != 1.0)
      throw std::invalid_argument("grid: packet grids double, epsilon must be 1");
    IntervalGrid g;
    g.kind_ = kind;
    g.eps_ = eps;
    g.count_ = 1;
    while (g.upper(g.count_ - 1) < horizon) ++g.count_;
    return g;
  }

  GridKind kind() const { return kind_; }
  double epsilon() const { return eps_; }
  int intervals() const { return count_; }

  // Right endpoint; defined for any l >= 0 so rounded schedules can be placed
  // in displaced intervals beyond the horizon.
  double upper(int l) const {
    if (l < 0) throw std::invalid_argument("grid: negative interval");
    return std::pow(1.0 + eps_, l);
  }

  double lower(int l) const { return l == 0 ? 0.0 : upper(l - 1); }
  double length(int l) const { return upper(l) - lower(l); }

  // Divisor turning per-interval delivered volume into the relaxation's rate.
  double rate_divisor(int l) const { return l == 0 ? 1.0 : upper(l - 1); }

  // Smallest interval whose right endpoint covers time t > 0.
  int interval_of(double t) const {
    if (t <= 0.0) throw std::invalid_argument("grid: interval_of needs t > 0");
    int l = 0;
    while (upper(l) < t) ++l;
    return l;
  }

  // Boundary list as published in serialized form: circuit grids include the
  // origin, packet grids start at 1.
  std::vector<double> bounds() const {
    std::vector<double> b;
    if (kind_ == GridKind::circuit) b.push_back(0.0);
    for (int l = 0; l < count_; ++l) b.push_back(upper(l));
    return b;
  }

 private:
  GridKind kind_ = GridKind::circuit;
  double eps_ = 1.0;
  int count_ = 1;
};

inline IntervalGrid make_grid(GridKind kind, double eps, double horizon) {
  return IntervalGrid::make(kind, eps, horizon);
}

}  // namespace coflow
