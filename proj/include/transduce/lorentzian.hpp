// lorentzian.hpp - damped Gauss-Newton fit of offset + amplitude * Lorentzian

#pragma once

#include "transduce/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace transduce {

struct LorentzianFit {
  double center = 0.0;
  double fwhm = 1.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;

  double operator()(double x) const {
    const double g = 0.5 * fwhm;
    const double d = x - center;
    return offset + amplitude * g * g / (d * d + g * g);
  }
};

struct FitOptions {
  double step_tolerance = 1e-10;
  int max_iterations = 200;
  int max_consecutive_increases = 10;
};

namespace detail {

struct LorentzianGuess {
  double center, fwhm, amplitude, offset;
};

/// Peak location, half-maximum crossings and min/max levels.
inline LorentzianGuess lorentzian_guess(std::span<const double> x, std::span<const double> y) {
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
  if (!(hi - lo > 1e-12 * scale)) throw FitDiverged("flat spectrum: no peak to fit");

  const std::size_t peak = static_cast<std::size_t>(hi_it - y.begin());
  const double half = lo + 0.5 * (hi - lo);

  auto crossing = [&](std::size_t i, std::size_t j) {
    // linear interpolation between samples i (above half) and j (below)
    const double t = (y[i] - half) / (y[i] - y[j]);
    return x[i] + t * (x[j] - x[i]);
  };

  double left = 0.0, right = 0.0;
  bool has_left = false, has_right = false;
  for (std::size_t i = peak; i > 0; --i) {
    if (y[i - 1] < half) {
      left = crossing(i, i - 1);
      has_left = true;
      break;
    }
  }
  for (std::size_t i = peak; i + 1 < y.size(); ++i) {
    if (y[i + 1] < half) {
      right = crossing(i, i + 1);
      has_right = true;
      break;
    }
  }
  const double span = x.back() - x.front();
  double width;
  if (has_left && has_right)
    width = right - left;
  else if (has_left)
    width = 2.0 * (x[peak] - left);
  else if (has_right)
    width = 2.0 * (right - x[peak]);
  else
    width = 0.5 * span;
  if (!(width > 0.0)) width = span / static_cast<double>(x.size());
  return {x[peak], width, hi - lo, lo};
}

}  // namespace detail

/// Least-squares fit of offset + amplitude (w/2)^2 / ((x - c)^2 + (w/2)^2).
/// Levenberg-style damping; FitDiverged after too many consecutive rejected
/// (residual-increasing) steps.
inline LorentzianFit fit_lorentzian(std::span<const double> x, std::span<const double> y,
                                    const FitOptions& opts = {}) {
  if (x.size() != y.size() || x.size() < 5) throw std::invalid_argument("need at least 5 samples");
  const auto guess = detail::lorentzian_guess(x, y);
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());

  Eigen::Vector4d p(guess.center, guess.fwhm, guess.amplitude, guess.offset);

  auto residuals = [&](const Eigen::Vector4d& q, Eigen::VectorXd& r) {
    const double g = 0.5 * q(1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = x[i] - q(0);
      r(i) = y[i] - (q(3) + q(2) * g * g / (d * d + g * g));
    }
  };
  auto jacobian = [&](const Eigen::Vector4d& q, Eigen::MatrixXd& J) {
    const double g = 0.5 * q(1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = x[i] - q(0);
      const double den = d * d + g * g;
      const double lor = g * g / den;
      J(i, 0) = q(2) * 2.0 * g * g * d / (den * den);
      J(i, 1) = q(2) * g * d * d / (den * den);  // d/dw = (1/2) d/dg
      J(i, 2) = lor;
      J(i, 3) = 1.0;
    }
  };

  Eigen::VectorXd r(n), r_trial(n);
  Eigen::MatrixXd J(n, 4);
  residuals(p, r);
  double ssr = r.squaredNorm();
  const double data_scale = Eigen::Map<const Eigen::VectorXd>(y.data(), n).squaredNorm();

  double lambda = 1e-3;
  int increases = 0;
  LorentzianFit fit;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    fit.iterations = it;
    jacobian(p, J);
    const Eigen::Vector4d diag = (J.transpose() * J).diagonal().cwiseMax(1e-300);

    Eigen::MatrixXd A(n + 4, 4);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 4);
    A.topRows(n) = J;
    A.bottomRows(4) = (lambda * diag).cwiseSqrt().asDiagonal();
    b.head(n) = r;
    const Eigen::Vector4d step = A.colPivHouseholderQr().solve(b);

    const Eigen::Vector4d scale(std::abs(p(1)), std::abs(p(1)), std::max(std::abs(p(2)), 1e-300),
                                std::max({std::abs(p(3)), std::abs(p(2)), 1e-300}));
    const double rel_step = (step.array().abs() / scale.array()).maxCoeff();

    Eigen::Vector4d trial = p + step;
    trial(1) = std::abs(trial(1));
    residuals(trial, r_trial);
    const double ssr_trial = r_trial.squaredNorm();

    if (std::isfinite(ssr_trial) && ssr_trial <= ssr) {
      p = trial;
      r.swap(r_trial);
      ssr = ssr_trial;
      lambda = std::max(lambda * 0.1, 1e-12);
      increases = 0;
      if (rel_step < opts.step_tolerance) {
        fit.converged = true;
        break;
      }
    } else {
      // a "rise" at the rounding level of ssr means we sit on the minimum
      const bool stalled = std::isfinite(ssr_trial) && ssr_trial - ssr <= 1e-13 * ssr;
      if (stalled || rel_step < opts.step_tolerance || ssr <= 1e-30 * data_scale) {
        fit.converged = true;
        break;
      }
      lambda *= 10.0;
      if (++increases >= opts.max_consecutive_increases)
        throw FitDiverged("residual increased on consecutive damped steps");
    }
    if (ssr <= 1e-30 * data_scale) {
      fit.converged = true;
      break;
    }
  }

  fit.center = p(0);
  fit.fwhm = std::abs(p(1));
  fit.amplitude = p(2);
  fit.offset = p(3);
  fit.residual_norm = std::sqrt(ssr);
  if (!(fit.fwhm > 0.0) || !std::isfinite(fit.residual_norm))
    throw FitDiverged("fit left the valid parameter region");
  return fit;
}

inline LorentzianFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y,
                                    const FitOptions& opts = {}) {
  return fit_lorentzian(std::span<const double>(x), std::span<const double>(y), opts);
}

}  // namespace transduce
