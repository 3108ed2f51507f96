// lindblad.hpp - real vectorization of density matrices and Lindblad
// generators acting on that representation.
//
// A Hermitian N x N matrix rho maps to N^2 reals, index i*N + j:
//   i == j : rho_ii
//   i <  j : Re rho_ij
//   i >  j : Im rho_ji
// Any Hermiticity-preserving generator is then a real N^2 x N^2 matrix.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <vector>

namespace transduce {

using cplx = std::complex<double>;
using SparseC = Eigen::SparseMatrix<cplx>;
using SparseR = Eigen::SparseMatrix<double>;

inline Eigen::VectorXd real_from_density(const Eigen::MatrixXcd& rho) {
  const Eigen::Index n = rho.rows();
  Eigen::VectorXd v(n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j)
        v(i * n + j) = rho(i, i).real();
      else if (i < j)
        v(i * n + j) = rho(i, j).real();
      else
        v(i * n + j) = rho(j, i).imag();
    }
  }
  return v;
}

inline Eigen::MatrixXcd density_from_real(const Eigen::VectorXd& v, Eigen::Index n) {
  Eigen::MatrixXcd rho(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rho(i, i) = v(i * n + i);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      rho(i, j) = cplx(v(i * n + j), v(j * n + i));
      rho(j, i) = std::conj(rho(i, j));
    }
  }
  return rho;
}

/// Weights w with w . real_from_density(rho) == Re tr(op rho) for Hermitian op.
inline Eigen::VectorXd expectation_weights(const Eigen::MatrixXcd& op) {
  const Eigen::Index n = op.rows();
  Eigen::VectorXd w(n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        w(i * n + j) = op(i, i).real();
      } else if (i < j) {
        // op_ji rho_ij + op_ij rho_ji = 2 Re(op_ji) Re(rho_ij) - 2 Im(op_ji) Im(rho_ij)
        w(i * n + j) = 2.0 * op(j, i).real();
      } else {
        w(i * n + j) = -2.0 * op(i, j).imag();
      }
    }
  }
  return w;
}

inline Eigen::VectorXd trace_weights(Eigen::Index n) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n * n);
  for (Eigen::Index i = 0; i < n; ++i) w(i * n + i) = 1.0;
  return w;
}

/// Sparse |i><j| in an n-dimensional space.
inline SparseC basis_op(Eigen::Index n, Eigen::Index i, Eigen::Index j, cplx value = 1.0) {
  SparseC m(n, n);
  m.insert(i, j) = value;
  return m;
}

/// Real generator of drho/dt = -i[H, rho] + sum_k D[C_k] rho.
/// Built column by column from the action on each Hermitian basis element.
inline SparseR lindblad_generator(const SparseC& hamiltonian, const std::vector<SparseC>& jumps) {
  const Eigen::Index n = hamiltonian.rows();
  const cplx I(0.0, 1.0);

  std::vector<SparseC> jump_adj;
  std::vector<SparseC> jump_norm;
  jump_adj.reserve(jumps.size());
  jump_norm.reserve(jumps.size());
  for (const auto& c : jumps) {
    SparseC cd = c.adjoint();
    jump_adj.push_back(cd);
    jump_norm.push_back((cd * c).pruned());
  }

  auto apply = [&](const SparseC& rho) -> SparseC {
    SparseC out = (-I * (hamiltonian * rho - rho * hamiltonian)).pruned();
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      out += jumps[k] * rho * jump_adj[k];
      out -= 0.5 * (jump_norm[k] * rho + rho * jump_norm[k]);
    }
    return out;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  auto push_column = [&](const SparseC& image, Eigen::Index column) {
    for (int k = 0; k < image.outerSize(); ++k) {
      for (SparseC::InnerIterator it(image, k); it; ++it) {
        const Eigen::Index i = it.row();
        const Eigen::Index j = it.col();
        const cplx z = it.value();
        if (i == j) {
          if (z.real() != 0.0) triplets.emplace_back(i * n + i, column, z.real());
        } else if (i < j) {
          if (z.real() != 0.0) triplets.emplace_back(i * n + j, column, z.real());
          if (z.imag() != 0.0) triplets.emplace_back(j * n + i, column, z.imag());
        }
      }
    }
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      SparseC e(n, n);
      if (i == j) {
        e.insert(i, i) = 1.0;
      } else if (i < j) {
        e.insert(i, j) = 1.0;
        e.insert(j, i) = 1.0;
      } else {
        // coordinate Im rho_ji (upper element (j, i)) has basis i|j><i| - i|i><j|
        e.insert(j, i) = I;
        e.insert(i, j) = -I;
      }
      push_column(apply(e), i * n + j);
    }
  }

  SparseR gen(n * n, n * n);
  gen.setFromTriplets(triplets.begin(), triplets.end());
  gen.prune(0.0);
  return gen;
}

}  // namespace transduce
