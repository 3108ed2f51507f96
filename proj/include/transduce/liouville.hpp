// liouville.hpp - optical Bloch dynamics of the Lambda atom
//
// The generator is built from the stage Hamiltonian
//   H = D_ab |b><b| + D_ac |c><c| + (W_ab/2)(|b><a| + h.c.) + (W_ac/2)(|c><a| + h.c.)
// and spontaneous emission a->b, a->c (and a->sink when enabled) in Lindblad
// form.

#pragma once

#include "transduce/density_matrix.hpp"
#include "transduce/errors.hpp"
#include "transduce/integrator.hpp"
#include "transduce/lindblad.hpp"
#include "transduce/physcore.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace transduce {

struct DriveConfig {
  double delta_ab = 0.0;
  double delta_ac = 0.0;
  double omega_ab = 0.0;
  double omega_ac = 0.0;

  /// Pump or probe stage: only the a<->b transition is driven.
  static DriveConfig ab_only(double omega, double detuning = 0.0) {
    return DriveConfig{detuning, 0.0, omega, 0.0};
  }
  /// Transduction stage: only the a<->c transition is driven.
  static DriveConfig ac_only(double omega, double detuning = 0.0) {
    return DriveConfig{0.0, detuning, 0.0, omega};
  }

  DriveConfig scaled_rabi(double factor) const {
    return DriveConfig{delta_ab, delta_ac, omega_ab * factor, omega_ac * factor};
  }
};

/// Gaussian time envelope of the Rabi frequency, exp(-(t - center)^2 / 2 sigma^2).
struct DriveEnvelope {
  double center = 0.0;
  double sigma = 1.0;

  double operator()(double t) const {
    const double x = (t - center) / sigma;
    return std::exp(-0.5 * x * x);
  }

  /// Envelope over [0, duration] with sigma = duration / 4 and the peak Rabi
  /// scale that keeps the pulse fluence (integral of W^2) equal to a top-hat.
  static DriveEnvelope over(double duration) { return {0.5 * duration, 0.25 * duration}; }
  static double peak_scale() { return std::sqrt(4.0 / std::sqrt(std::numbers::pi)); }
};

/// Real superoperator split into a drive-independent part and the part
/// proportional to the Rabi frequencies, so envelopes can scale the latter.
class Liouvillian {
 public:
  Liouvillian(int dim, Eigen::MatrixXd free_part, Eigen::MatrixXd drive_part)
      : dim_(dim), free_(std::move(free_part)), drive_(std::move(drive_part)),
        full_(free_ + drive_) {}

  int dim() const { return dim_; }
  const Eigen::MatrixXd& matrix() const { return full_; }
  const Eigen::MatrixXd& free_part() const { return free_; }
  const Eigen::MatrixXd& drive_part() const { return drive_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return full_ * v; }

 private:
  int dim_;
  Eigen::MatrixXd free_;
  Eigen::MatrixXd drive_;
  Eigen::MatrixXd full_;
};

namespace detail {

inline SparseC stage_hamiltonian(int dim, const DriveConfig& d, bool detunings, bool drives) {
  SparseC h(dim, dim);
  std::vector<Eigen::Triplet<cplx>> t;
  if (detunings) {
    if (d.delta_ab != 0.0) t.emplace_back(level_b, level_b, d.delta_ab);
    if (d.delta_ac != 0.0) t.emplace_back(level_c, level_c, d.delta_ac);
  }
  if (drives) {
    if (d.omega_ab != 0.0) {
      t.emplace_back(level_a, level_b, 0.5 * d.omega_ab);
      t.emplace_back(level_b, level_a, 0.5 * d.omega_ab);
    }
    if (d.omega_ac != 0.0) {
      t.emplace_back(level_a, level_c, 0.5 * d.omega_ac);
      t.emplace_back(level_c, level_a, 0.5 * d.omega_ac);
    }
  }
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

inline std::vector<SparseC> atomic_jumps(int dim, const AtomSpecies& atom) {
  std::vector<SparseC> jumps;
  if (atom.gamma_ab > 0.0) jumps.push_back(basis_op(dim, level_b, level_a, std::sqrt(atom.gamma_ab)));
  if (atom.gamma_ac > 0.0) jumps.push_back(basis_op(dim, level_c, level_a, std::sqrt(atom.gamma_ac)));
  if (dim == 4 && atom.sink_enabled && atom.gamma_sink > 0.0)
    jumps.push_back(basis_op(dim, level_sink, level_a, std::sqrt(atom.gamma_sink)));
  return jumps;
}

}  // namespace detail

/// dim defaults to 3 (4 with the sink). A 4-level space with the sink channel
/// disabled keeps the sink population frozen.
inline Liouvillian build_liouvillian(const AtomSpecies& atom, const DriveConfig& drive,
                                     int dim = 0) {
  if (dim == 0) dim = atom.level_count();
  if (dim != 3 && dim != 4) throw std::invalid_argument("Liouvillian dimension must be 3 or 4");
  if (dim == 3 && atom.sink_enabled)
    throw std::invalid_argument("sink channel needs the 4-level representation");

  const SparseC h_free = detail::stage_hamiltonian(dim, drive, true, false);
  const SparseC h_drive = detail::stage_hamiltonian(dim, drive, false, true);
  Eigen::MatrixXd free_part = Eigen::MatrixXd(lindblad_generator(h_free, detail::atomic_jumps(dim, atom)));
  Eigen::MatrixXd drive_part = Eigen::MatrixXd(lindblad_generator(h_drive, {}));
  return Liouvillian(dim, std::move(free_part), std::move(drive_part));
}

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  /// Time integral of each diagonal population over the whole run.
  Eigen::VectorXd integrated_populations;
  IntegratorStats stats;

  const DensityMatrix& final_state() const { return states.back(); }

  std::vector<double> populations(int level) const {
    std::vector<double> p;
    p.reserve(states.size());
    for (const auto& s : states) p.push_back(s.population(level));
    return p;
  }

  double integrated_population(int level) const {
    return level < integrated_populations.size() ? integrated_populations(level) : 0.0;
  }
};

struct EvolveOptions {
  Tolerance tol{};
  int samples = 101;  // uniform output points including both ends
  std::optional<DriveEnvelope> envelope;
};

inline Trajectory evolve(const DensityMatrix& rho0, const Liouvillian& gen, double duration,
                         const EvolveOptions& opts = {}) {
  if (duration < 0.0) throw std::invalid_argument("duration must be non-negative");
  if (rho0.dim() != gen.dim()) throw std::invalid_argument("state and generator dimensions differ");
  const int dim = rho0.dim();
  const int samples = std::max(opts.samples, 2);

  Trajectory traj;
  traj.integrated_populations = Eigen::VectorXd::Zero(dim);
  if (duration == 0.0) {
    traj.times = {0.0};
    traj.states = {rho0};
    return traj;
  }

  traj.times.reserve(samples);
  traj.states.reserve(samples);
  traj.times.push_back(0.0);
  traj.states.push_back(rho0);

  std::vector<double> sample_times(samples);
  for (int k = 0; k < samples; ++k) sample_times[k] = duration * k / (samples - 1);
  int next = 1;

  Eigen::VectorXd integral = Eigen::VectorXd::Zero(dim * dim);
  auto observer = [&](const StepRecord& rec) {
    integral += rec.integral();
    while (next < samples - 1 && sample_times[next] <= rec.t1) {
      traj.times.push_back(sample_times[next]);
      traj.states.push_back(DensityMatrix::from_real(rec.interpolate(sample_times[next]), dim));
      ++next;
    }
  };

  Eigen::VectorXd y0 = rho0.to_real();
  Eigen::VectorXd y1;
  if (opts.envelope) {
    const DriveEnvelope env = *opts.envelope;
    const Eigen::MatrixXd& f = gen.free_part();
    const Eigen::MatrixXd& d = gen.drive_part();
    auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
      dy.noalias() = f * y;
      dy.noalias() += env(t) * (d * y);
    };
    y1 = integrate(rhs, std::move(y0), 0.0, duration, opts.tol, observer, &traj.stats);
  } else {
    const Eigen::MatrixXd& m = gen.matrix();
    auto rhs = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy.noalias() = m * y; };
    y1 = integrate(rhs, std::move(y0), 0.0, duration, opts.tol, observer, &traj.stats);
  }

  traj.times.push_back(duration);
  traj.states.push_back(DensityMatrix::from_real(y1, dim).symmetrized());
  for (int i = 0; i < dim; ++i) traj.integrated_populations(i) = integral(i * dim + i);
  return traj;
}

inline Trajectory evolve(const DensityMatrix& rho0, const AtomSpecies& atom, const DriveConfig& drive,
                         double duration, const EvolveOptions& opts = {}) {
  return evolve(rho0, build_liouvillian(atom, drive, rho0.dim()), duration, opts);
}

/// Independent propagation through the matrix exponential of the generator.
inline DensityMatrix expm_oracle(const DensityMatrix& rho0, const Liouvillian& gen, double t) {
  if (t == 0.0) return rho0;
  const Eigen::MatrixXd propagator = (gen.matrix() * t).exp();
  return DensityMatrix::from_real(propagator * rho0.to_real(), rho0.dim());
}

inline DensityMatrix expm_oracle(const DensityMatrix& rho0, const AtomSpecies& atom,
                                 const DriveConfig& drive, double t) {
  return expm_oracle(rho0, build_liouvillian(atom, drive, rho0.dim()), t);
}

struct SteadyState {
  DensityMatrix rho;
  double residual = 0.0;  // ||L rho|| / ||L||, dimensionless
};

/// Trace-one kernel vector of the generator; throws DegenerateKernel when the
/// kernel is more than one-dimensional.
inline SteadyState steady_state_of(const Liouvillian& gen) {
  const Eigen::MatrixXd& m = gen.matrix();
  const int dim = gen.dim();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  int nullity = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) <= 1e-9 * smax) ++nullity;
  if (nullity != 1) {
    throw DegenerateKernel("generator kernel has dimension " + std::to_string(nullity));
  }

  // Least squares on [L; tr] x = [0; 1] pins the trace-one representative.
  const Eigen::Index n2 = m.rows();
  Eigen::MatrixXd aug(n2 + 1, n2);
  aug.topRows(n2) = m / smax;
  aug.row(n2) = trace_weights(dim).transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n2 + 1);
  rhs(n2) = 1.0;
  Eigen::VectorXd x = aug.colPivHouseholderQr().solve(rhs);
  x /= trace_weights(dim).dot(x);

  SteadyState out{DensityMatrix::from_real(x, dim), (m * x).norm() / m.norm()};
  return out;
}

inline DensityMatrix steady_state(const AtomSpecies& atom, const DriveConfig& drive) {
  return steady_state_of(build_liouvillian(atom, drive)).rho;
}

}  // namespace transduce
