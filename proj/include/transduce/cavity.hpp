// cavity.hpp - atom + single cavity mode master equation for the cavity
// enhanced absorption (cavity on a<->c) and collection (cavity on a<->b)
// schemes.
//
// Joint basis index: atom_level * (cutoff + 1) + photon_number.
// Coupling follows the (W/2) convention of the stage Hamiltonian:
//   H_int = (g/2) (|a><x| a + a^dag |x><a|),  x = c or b,
// so g is the single-photon Rabi frequency.

#pragma once

#include "transduce/errors.hpp"
#include "transduce/integrator.hpp"
#include "transduce/lindblad.hpp"
#include "transduce/physcore.hpp"
#include "transduce/density_matrix.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace transduce {

struct CavityConfig {
  double g = 0.0;                // rad/s
  double kappa = 0.0;            // rad/s, field-energy decay rate
  double cavity_detuning = 0.0;  // rad/s
  int fock_cutoff = 2;           // highest photon number kept

  void validate() const {
    if (!(g >= 0.0)) throw std::invalid_argument("cavity coupling must be non-negative");
    if (!(kappa > 0.0)) throw std::invalid_argument("cavity decay must be positive");
    if (fock_cutoff < 1) throw std::invalid_argument("fock cutoff must be at least 1");
  }
};

/// Density matrix on (atom levels) x (Fock states 0..cutoff).
struct JointState {
  Eigen::MatrixXcd rho;
  int atom_levels = 3;
  int fock_cutoff = 1;

  int fock_dim() const { return fock_cutoff + 1; }

  double trace() const { return rho.trace().real(); }
  double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
  double min_diagonal() const { return rho.diagonal().real().minCoeff(); }

  double atom_population(int level) const {
    double p = 0.0;
    for (int n = 0; n < fock_dim(); ++n) p += rho(level * fock_dim() + n, level * fock_dim() + n).real();
    return p;
  }
  double mean_photons() const {
    double m = 0.0;
    for (int l = 0; l < atom_levels; ++l)
      for (int n = 0; n < fock_dim(); ++n) m += n * rho(l * fock_dim() + n, l * fock_dim() + n).real();
    return m;
  }
  double photon_probability(int n) const {
    double p = 0.0;
    for (int l = 0; l < atom_levels; ++l) p += rho(l * fock_dim() + n, l * fock_dim() + n).real();
    return p;
  }
};

struct CavityOptions {
  Tolerance tol{1e-9, 1e-12};
  int max_cutoff = 20;
  double convergence = 1e-3;  // |change| < convergence * max(1, |result|)
};

namespace detail {

inline SparseC kron(const SparseC& a, const SparseC& b) {
  SparseC out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<cplx>> t;
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseC::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseC::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline SparseC identity(Eigen::Index n) {
  SparseC m(n, n);
  m.setIdentity();
  return m;
}

inline SparseC annihilation(int cutoff) {
  SparseC a(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// Joint-space generator and the observables the simulations integrate.
struct JointModel {
  int atom_levels;
  int cutoff;
  SparseR generator;
  Eigen::VectorXd photons;   // weights for <n>
  Eigen::VectorXd excited;   // weights for P(|a>)
  Eigen::VectorXd ground;    // P(|b>)
  Eigen::VectorXd metastable;// P(|c>)
  Eigen::VectorXd sink;      // P(sink), zero when absent

  int dim() const { return atom_levels * (cutoff + 1); }
};

inline Eigen::VectorXd level_weights(int atom_levels, int cutoff, int level) {
  const int nf = cutoff + 1;
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(atom_levels * nf, atom_levels * nf);
  if (level < atom_levels)
    for (int n = 0; n < nf; ++n) op(level * nf + n, level * nf + n) = 1.0;
  return expectation_weights(op);
}

inline JointModel joint_model(const AtomSpecies& atom, const CavityConfig& cav, Level lower,
                              double probe_rabi, int cutoff) {
  const int na = atom.level_count();
  const int nf = cutoff + 1;
  const SparseC ia = identity(na);
  const SparseC ifock = identity(nf);
  const SparseC a = annihilation(cutoff);
  const SparseC adag = a.adjoint();
  const SparseC number = (adag * a).pruned();

  SparseC h = cav.cavity_detuning * kron(ia, number);
  if (probe_rabi != 0.0) {
    h += kron(basis_op(na, level_a, level_b, 0.5 * probe_rabi), ifock);
    h += kron(basis_op(na, level_b, level_a, 0.5 * probe_rabi), ifock);
  }
  if (cav.g != 0.0) {
    h += kron(basis_op(na, level_a, lower, 0.5 * cav.g), a);
    h += kron(basis_op(na, lower, level_a, 0.5 * cav.g), adag);
  }
  h.prune(cplx(0.0));

  std::vector<SparseC> jumps;
  if (atom.gamma_ab > 0.0) jumps.push_back(kron(basis_op(na, level_b, level_a, std::sqrt(atom.gamma_ab)), ifock));
  if (atom.gamma_ac > 0.0) jumps.push_back(kron(basis_op(na, level_c, level_a, std::sqrt(atom.gamma_ac)), ifock));
  if (atom.sink_enabled && atom.gamma_sink > 0.0)
    jumps.push_back(kron(basis_op(na, level_sink, level_a, std::sqrt(atom.gamma_sink)), ifock));
  jumps.push_back(kron(ia, std::sqrt(cav.kappa) * a));

  JointModel m{na, cutoff, lindblad_generator(h, jumps), {}, {}, {}, {}, {}};
  m.photons = expectation_weights(Eigen::MatrixXcd(kron(ia, number)));
  m.excited = level_weights(na, cutoff, level_a);
  m.ground = level_weights(na, cutoff, level_b);
  m.metastable = level_weights(na, cutoff, level_c);
  m.sink = level_weights(na, cutoff, level_sink);
  return m;
}

inline Eigen::VectorXd joint_pure(int atom_levels, int cutoff, int level, int photons) {
  const int nf = cutoff + 1;
  const int n = atom_levels * nf;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  rho(level * nf + photons, level * nf + photons) = 1.0;
  return real_from_density(rho);
}

inline bool cutoff_converged(double previous, double current, double tol) {
  return std::abs(current - previous) < tol * std::max(1.0, std::abs(current));
}

}  // namespace detail

struct AbsorptionResult {
  double absorbed = 0.0;   // terminal P(|b>)
  double leaked = 0.0;     // kappa * integral <n> dt
  double scattered = 0.0;  // excitation lost by a->c (and a->sink) free-space decay
  double stored = 0.0;     // terminal <n> + P(|a>)
  double duration = 0.0;
  int fock_cutoff = 0;
  JointState final_state;

  double bookkeeping_error() const { return std::abs(absorbed + leaked + scattered + stored - 1.0); }
};

/// Absorption at a fixed Fock cutoff. The atom starts in |c> with one photon
/// pre-loaded in the cavity on a<->c.
inline AbsorptionResult absorb_at_cutoff(const AtomSpecies& atom, const CavityConfig& cav, double duration,
                                         int cutoff, const Tolerance& tol = {1e-9, 1e-12}) {
  cav.validate();
  if (cutoff < 1) throw std::invalid_argument("cutoff must hold the initial photon");
  const detail::JointModel m = detail::joint_model(atom, cav, level_c, 0.0, cutoff);
  double int_photons = 0.0;
  double int_excited = 0.0;
  auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy.noalias() = m.generator * y; };
  auto observer = [&](const StepRecord& rec) {
    int_photons += rec.integral(m.photons);
    int_excited += rec.integral(m.excited);
  };
  const Eigen::VectorXd y =
      integrate(rhs, detail::joint_pure(m.atom_levels, cutoff, level_c, 1), 0.0, duration, tol, observer);

  AbsorptionResult r;
  r.duration = duration;
  r.fock_cutoff = cutoff;
  r.absorbed = m.ground.dot(y);
  r.leaked = cav.kappa * int_photons;
  const double lost_rate = atom.gamma_ac + (atom.sink_enabled ? atom.gamma_sink : 0.0);
  r.scattered = lost_rate * int_excited;
  r.stored = m.photons.dot(y) + m.excited.dot(y);
  r.final_state = JointState{density_from_real(y, m.dim()), m.atom_levels, cutoff};
  return r;
}

/// Raises the cutoff from cav.fock_cutoff (at least 2) until one more photon
/// state changes the absorption by less than the convergence tolerance. The
/// reported cutoff is the accepted one.
inline AbsorptionResult absorb_sim(const AtomSpecies& atom, const CavityConfig& cav, double duration,
                                   const CavityOptions& opts = {}) {
  int cutoff = std::max(cav.fock_cutoff, 2);
  AbsorptionResult prev = absorb_at_cutoff(atom, cav, duration, cutoff, opts.tol);
  while (cutoff < opts.max_cutoff) {
    AbsorptionResult next = absorb_at_cutoff(atom, cav, duration, cutoff + 1, opts.tol);
    if (detail::cutoff_converged(prev.absorbed, next.absorbed, opts.convergence)) return prev;
    prev = std::move(next);
    ++cutoff;
  }
  throw CutoffNotConverged("absorption not converged at fock cutoff " + std::to_string(opts.max_cutoff));
}

struct CollectOptions {
  double max_duration = 0.0;      // s; the run stops earlier once dark
  double dark_threshold = 0.99;   // P(|c>) + P(sink) that ends the run
  double baseline_photons = 4.1;  // free-space collected photons per atom
  CavityOptions cavity{Tolerance{1e-8, 1e-11}};
};

struct CollectionResult {
  double cavity_photons = 0.0;      // kappa * integral <n> dt
  double free_space_photons = 0.0;  // gamma_ab * integral P(|a>) dt
  double duration = 0.0;            // dark-state completion time, or max_duration
  double dark_population = 0.0;
  double enhancement = 0.0;         // cavity_photons / baseline
  bool reached_dark = false;
  int fock_cutoff = 0;
};

/// Collection at a fixed cutoff. The atom starts in |b> with an empty cavity on
/// a<->b and is driven by the probe until the dark levels hold dark_threshold.
inline CollectionResult collect_at_cutoff(const AtomSpecies& atom, const CavityConfig& cav, double probe_rabi,
                                          int cutoff, const CollectOptions& opts) {
  cav.validate();
  if (!(opts.max_duration > 0.0)) throw std::invalid_argument("collection needs a positive max duration");
  const detail::JointModel m = detail::joint_model(atom, cav, level_b, probe_rabi, cutoff);
  const Eigen::VectorXd dark_w = m.metastable + m.sink;

  double int_photons = 0.0;
  double int_excited = 0.0;
  CollectionResult r;
  r.fock_cutoff = cutoff;

  auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy.noalias() = m.generator * y; };
  auto observer = [&](const StepRecord& rec) -> bool {
    const double dark_end = dark_w.dot(rec.y1);
    if (dark_end < opts.dark_threshold) {
      int_photons += rec.integral(m.photons);
      int_excited += rec.integral(m.excited);
      return true;
    }
    // Bisect the Hermite interpolant for the crossing, then integrate the
    // cubic up to it with Simpson's rule (exact for cubics).
    double lo = rec.t0, hi = rec.t1;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (dark_w.dot(rec.interpolate(mid)) < opts.dark_threshold)
        lo = mid;
      else
        hi = mid;
    }
    const double t_cross = hi;
    const Eigen::VectorXd y_mid = rec.interpolate(0.5 * (rec.t0 + t_cross));
    const Eigen::VectorXd y_end = rec.interpolate(t_cross);
    const double w = (t_cross - rec.t0) / 6.0;
    int_photons += w * (m.photons.dot(rec.y0) + 4.0 * m.photons.dot(y_mid) + m.photons.dot(y_end));
    int_excited += w * (m.excited.dot(rec.y0) + 4.0 * m.excited.dot(y_mid) + m.excited.dot(y_end));
    r.duration = t_cross;
    r.dark_population = dark_w.dot(y_end);
    r.reached_dark = true;
    return false;
  };
  const Eigen::VectorXd y = integrate(rhs, detail::joint_pure(m.atom_levels, cutoff, level_b, 0), 0.0,
                                      opts.max_duration, opts.cavity.tol, observer);
  if (!r.reached_dark) {
    r.duration = opts.max_duration;
    r.dark_population = dark_w.dot(y);
  }
  r.cavity_photons = cav.kappa * int_photons;
  r.free_space_photons = atom.gamma_ab * int_excited;
  r.enhancement = r.cavity_photons / opts.baseline_photons;
  return r;
}

inline CollectionResult collect_sim(const AtomSpecies& atom, const CavityConfig& cav, double probe_rabi,
                                    const CollectOptions& opts) {
  int cutoff = std::max(cav.fock_cutoff, 1);
  CollectionResult prev = collect_at_cutoff(atom, cav, probe_rabi, cutoff, opts);
  while (cutoff < opts.cavity.max_cutoff) {
    CollectionResult next = collect_at_cutoff(atom, cav, probe_rabi, cutoff + 1, opts);
    if (detail::cutoff_converged(prev.cavity_photons, next.cavity_photons, opts.cavity.convergence))
      return prev;
    prev = next;
    ++cutoff;
  }
  throw CutoffNotConverged("collection not converged at fock cutoff " +
                           std::to_string(opts.cavity.max_cutoff));
}

}  // namespace transduce
