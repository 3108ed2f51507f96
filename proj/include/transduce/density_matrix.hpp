// density_matrix.hpp - trace-normalized Hermitian state of the Lambda atom

#pragma once

#include "transduce/lindblad.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace transduce {

/// Level indices. The sink exists only in the 4-level representation.
enum Level : int { level_a = 0, level_b = 1, level_c = 2, level_sink = 3 };

class DensityMatrix {
 public:
  DensityMatrix() : DensityMatrix(pure(level_b, 3)) {}

  explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || (m_.rows() != 3 && m_.rows() != 4))
      throw std::invalid_argument("density matrix must be 3x3 or 4x4");
  }

  static DensityMatrix pure(Level level, int dim) {
    if (level >= dim) throw std::invalid_argument("level outside the state space");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    m(level, level) = 1.0;
    return DensityMatrix(std::move(m));
  }

  static DensityMatrix from_real(const Eigen::VectorXd& v, int dim) {
    return DensityMatrix(density_from_real(v, dim));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

  double population(int level) const { return level < dim() ? m_(level, level).real() : 0.0; }

  double trace() const { return m_.trace().real(); }

  double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_diagonal() const { return m_.diagonal().real().minCoeff(); }

  /// Largest imaginary part on the diagonal.
  double diagonal_imag() const { return m_.diagonal().imag().cwiseAbs().maxCoeff(); }

  DensityMatrix symmetrized() const {
    return DensityMatrix(Eigen::MatrixXcd(0.5 * (m_ + m_.adjoint())));
  }

  Eigen::VectorXd to_real() const { return real_from_density(m_); }

  /// Embeds a 3-level state into the 4-level space with an empty sink.
  DensityMatrix with_dim(int dim) const {
    if (dim == this->dim()) return *this;
    if (dim == 4 && this->dim() == 3) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
      m.topLeftCorner(3, 3) = m_;
      return DensityMatrix(std::move(m));
    }
    throw std::invalid_argument("can only embed a 3-level state into 4 levels");
  }

  bool satisfies_invariants(double trace_tol = 1e-9, double herm_tol = 1e-12,
                            double diag_tol = 1e-9) const {
    return std::abs(trace() - 1.0) < trace_tol && hermiticity_error() < herm_tol &&
           min_diagonal() >= -diag_tol;
  }

 private:
  Eigen::MatrixXcd m_;
};

}  // namespace transduce
