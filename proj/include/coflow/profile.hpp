#pragma once

// Piecewise-constant bandwidth over time. Breakpoints are strictly increasing;
// segment i carries rate_[i] on [t_[i], t_[i+1]); the rate is zero before the
// first breakpoint and after the last. Normalization keeps representations
// canonical (no zero-length or mergeable segments, no leading/trailing zeros)
// so equal behavior means equal data.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace coflow {

class BandwidthProfile {
 public:
  BandwidthProfile() = default;

  static BandwidthProfile constant(double start, double end, double rate) {
    BandwidthProfile p;
    p.add(start, end, rate);
    return p;
  }

  bool empty() const { return t_.empty(); }
  const std::vector<double>& breakpoints() const { return t_; }
  const std::vector<double>& rates() const { return rate_; }

  // Superposes `rate` on [start, end).
  void add(double start, double end, double rate) {
    if (!(start >= 0.0)) throw std::invalid_argument("profile: negative start");
    if (end == start) return;
    if (!(end > start)) throw std::invalid_argument("profile: end before start");
    if (rate < 0.0) throw std::invalid_argument("profile: negative rate");
    if (rate == 0.0) return;
    std::vector<double> cuts = t_;
    cuts.push_back(start);
    cuts.push_back(end);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<double> nt, nr;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      double r = rate_at(cuts[i]);
      if (cuts[i] >= start && cuts[i + 1] <= end) r += rate;
      nt.push_back(cuts[i]);
      nr.push_back(r);
    }
    nt.push_back(cuts.back());
    t_ = std::move(nt);
    rate_ = std::move(nr);
    normalize();
  }

  double rate_at(double t) const {
    for (std::size_t i = 0; i < rate_.size(); ++i)
      if (t >= t_[i] && t < t_[i + 1]) return rate_[i];
    return 0.0;
  }

  double volume() const {
    double v = 0.0;
    for (std::size_t i = 0; i < rate_.size(); ++i) v += rate_[i] * (t_[i + 1] - t_[i]);
    return v;
  }

  double volume_until(double t) const {
    double v = 0.0;
    for (std::size_t i = 0; i < rate_.size(); ++i) {
      if (t_[i] >= t) break;
      v += rate_[i] * (std::min(t, t_[i + 1]) - t_[i]);
    }
    return v;
  }

  double start_time() const { return t_.empty() ? 0.0 : t_.front(); }
  double end_time() const { return t_.empty() ? 0.0 : t_.back(); }

  // Earliest time at which cumulative delivery reaches sigma (within tol).
  // Zero demand completes at `release`; undeliverable demand is +infinity.
  double completion_time(double sigma, double release, double tol = 1e-9) const {
    if (sigma <= tol) return release;
    double v = 0.0;
    for (std::size_t i = 0; i < rate_.size(); ++i) {
      const double seg = rate_[i] * (t_[i + 1] - t_[i]);
      if (v + seg >= sigma - tol) {
        if (rate_[i] <= 0.0) return t_[i];
        return t_[i] + std::max(0.0, sigma - v) / rate_[i];
      }
      v += seg;
    }
    return std::numeric_limits<double>::infinity();
  }

  // Uniform time dilation by factor s >= 1: volume is preserved, every rate
  // drops by s, every breakpoint moves out by s.
  void stretch(double s) {
    if (s < 1.0) throw std::invalid_argument("profile: stretch factor below 1");
    for (double& t : t_) t *= s;
    for (double& r : rate_) r /= s;
  }

 private:
  void normalize() {
    struct Seg {
      double a, b, r;
    };
    std::vector<Seg> segs;
    for (std::size_t i = 0; i < rate_.size(); ++i) {
      if (t_[i + 1] <= t_[i]) continue;
      if (!segs.empty() && segs.back().r == rate_[i] && segs.back().b == t_[i])
        segs.back().b = t_[i + 1];
      else
        segs.push_back({t_[i], t_[i + 1], rate_[i]});
    }
    while (!segs.empty() && segs.front().r == 0.0) segs.erase(segs.begin());
    while (!segs.empty() && segs.back().r == 0.0) segs.pop_back();
    t_.clear();
    rate_.clear();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      t_.push_back(segs[i].a);
      rate_.push_back(segs[i].r);
    }
    if (!segs.empty()) t_.push_back(segs.back().b);
  }

  std::vector<double> t_;     // breakpoints, size = rate_.size() + 1 (or empty)
  std::vector<double> rate_;  // rate per segment
};

}  // namespace coflow
