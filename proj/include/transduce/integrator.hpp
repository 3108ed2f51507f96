// integrator.hpp - Dormand-Prince 5(4) with PI step control and cubic
// Hermite dense output.

#pragma once

#include "transduce/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>

namespace transduce {

struct Tolerance {
  double rel = 1e-9;
  double abs = 1e-12;
};

/// One accepted step, handed to observers. f0/f1 are the derivatives at the
/// step ends, which is all the cubic Hermite interpolant needs.
struct StepRecord {
  double t0;
  double t1;
  const Eigen::VectorXd& y0;
  const Eigen::VectorXd& f0;
  const Eigen::VectorXd& y1;
  const Eigen::VectorXd& f1;

  double width() const { return t1 - t0; }

  Eigen::VectorXd interpolate(double t) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
  }

  /// Exact integral of the Hermite interpolant of w . y over the step.
  double integral(const Eigen::VectorXd& weights) const {
    const double h = t1 - t0;
    return 0.5 * h * (weights.dot(y0) + weights.dot(y1)) +
           h * h / 12.0 * (weights.dot(f0) - weights.dot(f1));
  }

  Eigen::VectorXd integral() const {
    const double h = t1 - t0;
    return 0.5 * h * (y0 + y1) + h * h / 12.0 * (f0 - f1);
  }
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

namespace detail {

struct DormandPrince {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                         const Eigen::VectorXd& y1, const Tolerance& tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale = tol.abs + tol.rel * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / scale;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 to t1. rhs has signature
/// void(double t, const VectorXd& y, VectorXd& dydt). The observer is called
/// once per accepted step with a StepRecord; if it returns bool, false stops
/// the integration at the end of that step. Returns the final state.
template <class Rhs, class Observer>
Eigen::VectorXd integrate(Rhs&& rhs, Eigen::VectorXd y, double t0, double t1, const Tolerance& tol,
                          Observer&& observer, IntegratorStats* stats = nullptr,
                          double* t_stop = nullptr) {
  using DP = detail::DormandPrince;
  const Eigen::Index n = y.size();
  if (t_stop) *t_stop = t0;
  if (!(t1 > t0)) return y;

  const double span = t1 - t0;
  IntegratorStats local;
  IntegratorStats& st = stats ? *stats : local;

  Eigen::VectorXd f0(n), k2(n), k3(n), k4(n), k5(n), k6(n), f1(n), ytmp(n), y1(n), err(n);
  rhs(t0, y, f0);
  ++st.evaluations;

  // Initial step after Hairer, Norsett & Wanner II.4.
  double h;
  {
    Eigen::VectorXd scale =
        (tol.abs + tol.rel * y.array().abs()).matrix();
    const double d0 = std::sqrt((y.array() / scale.array()).square().mean());
    const double d1 = std::sqrt((f0.array() / scale.array()).square().mean());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    ytmp = y + h0 * f0;
    rhs(t0 + h0, ytmp, k2);
    ++st.evaluations;
    const double d2 = std::sqrt(((k2 - f0).array() / scale.array()).square().mean()) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, span});
  }

  constexpr double safety = 0.9;
  constexpr double alpha = 0.7 / 5.0;
  constexpr double beta = 0.4 / 5.0;
  constexpr double min_factor = 0.2;
  constexpr double max_factor = 10.0;
  double err_prev = 1e-4;
  bool last_rejected = false;
  double t = t0;

  while (t < t1) {
    const double min_step = 1e-13 * std::max(std::abs(t), span);
    if (h < min_step) {
      throw StepSizeUnderflow("step size underflow at t=" + std::to_string(t) +
                              " (h=" + std::to_string(h) + ")");
    }
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < min_step) {
      h = t1 - t;
      last = true;
    }

    ytmp = y + h * (DP::a21 * f0);
    rhs(t + DP::c2 * h, ytmp, k2);
    ytmp = y + h * (DP::a31 * f0 + DP::a32 * k2);
    rhs(t + DP::c3 * h, ytmp, k3);
    ytmp = y + h * (DP::a41 * f0 + DP::a42 * k2 + DP::a43 * k3);
    rhs(t + DP::c4 * h, ytmp, k4);
    ytmp = y + h * (DP::a51 * f0 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4);
    rhs(t + DP::c5 * h, ytmp, k5);
    ytmp = y + h * (DP::a61 * f0 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5);
    const double t_new = last ? t1 : t + h;
    rhs(t_new, ytmp, k6);
    y1 = y + h * (DP::b1 * f0 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 + DP::b6 * k6);
    rhs(t_new, y1, f1);
    st.evaluations += 6;

    err = h * (DP::e1 * f0 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * f1);
    double en = detail::error_norm(err, y, y1, tol);
    if (!std::isfinite(en)) en = std::numeric_limits<double>::max();

    if (en <= 1.0) {
      ++st.accepted;
      bool keep_going = true;
      const StepRecord rec{t, t_new, y, f0, y1, f1};
      if constexpr (std::is_same_v<std::invoke_result_t<Observer, const StepRecord&>, bool>) {
        keep_going = observer(rec);
      } else {
        observer(rec);
      }
      t = t_new;
      y.swap(y1);
      f0.swap(f1);
      if (!keep_going) break;

      double factor = en == 0.0 ? max_factor
                                : safety * std::pow(en, -alpha) * std::pow(err_prev, beta);
      factor = std::clamp(factor, min_factor, max_factor);
      if (last_rejected) factor = std::min(factor, 1.0);
      err_prev = std::max(en, 1e-4);
      last_rejected = false;
      h *= factor;
    } else {
      ++st.rejected;
      const double factor = std::max(min_factor, safety * std::pow(en, -1.0 / 5.0));
      h *= factor;
      last_rejected = true;
    }
  }
  if (t_stop) *t_stop = t;
  return y;
}

template <class Rhs>
Eigen::VectorXd integrate(Rhs&& rhs, Eigen::VectorXd y, double t0, double t1, const Tolerance& tol) {
  return integrate(std::forward<Rhs>(rhs), std::move(y), t0, t1, tol, [](const StepRecord&) {});
}

}  // namespace transduce
