#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qbattery/errors.hpp"

namespace qb {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-11;
  double h0 = 0.0;  // 0 = automatic
  double hmax = 0.0;
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

/// Dormand-Prince 5(4) with FSAL and the 4th-order continuous extension.
/// State needs +, - and scalar *. The error norm receives (y_old, y_new, err, rtol, atol)
/// and must return a value <= 1 for an acceptable step. `observe(i, y)` runs at each grid point.
template <typename State>
class DormandPrince {
 public:
  using Rhs = std::function<void(double, const State&, State&)>;
  using ErrNorm = std::function<double(const State&, const State&, const State&, double, double)>;
  using PostStep = std::function<void(State&)>;

  DormandPrince(Rhs rhs, ErrNorm norm, OdeOptions opt = {})
      : rhs_(std::move(rhs)), norm_(std::move(norm)), opt_(opt) {}

  void set_post_step(PostStep f) { post_ = std::move(f); }
  const OdeStats& stats() const { return stats_; }

  template <typename Observer>
  void integrate(State y, const std::vector<double>& grid, Observer&& observe) {
    if (grid.empty()) return;
    double t = grid.front();
    std::size_t next = 0;
    while (next < grid.size() && grid[next] <= t) observe(next++, y);
    if (next == grid.size()) return;
    const double t_end = grid.back();

    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ynew = y, err = y, tmp = y;
    rhs_(t, y, k1);
    double h = opt_.h0 > 0 ? opt_.h0 : initial_step(t, y, k1, tmp, k2);
    const double hmax = opt_.hmax > 0 ? opt_.hmax : std::abs(t_end - t);
    double fac_old = 1e-4;
    long steps = 0;

    while (next < grid.size()) {
      if (++steps > opt_.max_steps) throw StepSizeUnderflow(t, "step budget exhausted");
      h = std::min(h, hmax);
      if (t + h > t_end) h = t_end - t;
      if (h <= 1e-14 * std::max(1.0, std::abs(t)))
        throw StepSizeUnderflow(t, "step size underflow at t=" + std::to_string(t));

      tmp = y + h * (a21 * k1);
      rhs_(t + c2 * h, tmp, k2);
      tmp = y + h * (a31 * k1 + a32 * k2);
      rhs_(t + c3 * h, tmp, k3);
      tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs_(t + c4 * h, tmp, k4);
      tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs_(t + c5 * h, tmp, k5);
      tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs_(t + h, tmp, k6);
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs_(t + h, ynew, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double en = norm_(y, ynew, err, opt_.rtol, opt_.atol);
      if (!std::isfinite(en)) {
        h *= 0.1;
        ++stats_.rejected;
        continue;
      }
      if (en <= 1.0) {
        // Dense output coefficients.
        const State r1 = y;
        const State r2 = ynew - y;
        const State r3 = h * k1 - r2;
        const State r4 = r2 - h * k7 - r3;
        const State r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        const double t_new = t + h;
        while (next < grid.size() && grid[next] <= t_new) {
          const double th = (grid[next] - t) / h, th1 = 1.0 - th;
          State yi = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
          if (grid[next] == t_new) yi = ynew;
          if (post_) post_(yi);
          observe(next++, yi);
        }
        if (post_) post_(ynew);
        y = ynew;
        k1 = k7;
        t = t_new;
        ++stats_.accepted;
        // PI step control.
        const double fac = std::clamp(std::pow(en, 0.17) * std::pow(fac_old, -0.04) / 0.9,
                                      0.1, 5.0);
        fac_old = std::max(en, 1e-4);
        h = h / fac;
      } else {
        ++stats_.rejected;
        h = h / std::min(10.0, std::pow(en, 0.2) / 0.9);
      }
    }
  }

 private:
  double initial_step(double t, const State& y, const State& f0, State& tmp, State& f1) {
    const double d0 = norm_(y, y, y, opt_.rtol, opt_.atol);
    const double dd = norm_(y, y, f0, opt_.rtol, opt_.atol);
    double h0 = (d0 < 1e-5 || dd < 1e-5) ? 1e-6 : 0.01 * d0 / dd;
    tmp = y + h0 * f0;
    rhs_(t + h0, tmp, f1);
    const double d2 = norm_(y, y, f1 - f0, opt_.rtol, opt_.atol) / h0;
    const double h1 = std::max(dd, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(dd, d2), 0.2);
    return std::min(100 * h0, h1);
  }

  Rhs rhs_;
  ErrNorm norm_;
  PostStep post_;
  OdeOptions opt_;
  OdeStats stats_;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

/// Max-norm of e scaled by atol + rtol*max(|y0|,|y1|), elementwise, for Eigen types.
template <typename State>
double scaled_max_norm(const State& y0, const State& y1, const State& e, double rtol, double atol) {
  const auto sc = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return (e.cwiseAbs().array() / sc).maxCoeff();
}

}  // namespace qb
