// pipeline.hpp - preparation, transduction and amplified detection stages,
// plus the photon-counting chain that turns emitted photons into counts.

#pragma once

#include "transduce/errors.hpp"
#include "transduce/liouville.hpp"
#include "transduce/physcore.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace transduce {

struct DetectionChain {
  double solid_angle = 0.067;
  double optical_loss = 0.72;
  double detector_qe = 0.55;
  double density = 2.82e6;    // atoms / cm^3
  double volume = 2.75e-5;    // cm^3
  double tau_probe = 2.92e-6; // s

  /// Optical losses times detector quantum efficiency.
  double loss_efficiency() const { return optical_loss * detector_qe; }

  void validate() const {
    auto unit = [](double v, const char* name) {
      if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in (0, 1]");
    };
    unit(solid_angle, "solid_angle");
    unit(optical_loss, "optical_loss");
    unit(detector_qe, "detector_qe");
    if (!(density > 0.0) || !(volume > 0.0) || !(tau_probe > 0.0))
      throw std::invalid_argument("density, volume and tau_probe must be positive");
  }
};

struct StageResult {
  DensityMatrix rho_out;
  double duration = 0.0;
  double pumping_efficiency = 0.0;   // rho_cc after preparation
  double absorbed_photons = 0.0;     // rise of rho_bb across transduction
  double emitted_photons = 0.0;      // gamma_ab * integral of rho_aa during detection
  double rho_cc_after_probe = 0.0;
};

struct StageOptions {
  Tolerance tol{};
  int samples = 2;
};

namespace detail {

inline EvolveOptions stage_evolve_options(const BeamField& beam, double duration,
                                          const StageOptions& opts) {
  EvolveOptions eo;
  eo.tol = opts.tol;
  eo.samples = opts.samples;
  if (beam.profile == BeamProfile::gaussian) eo.envelope = DriveEnvelope::over(duration);
  return eo;
}

inline double stage_rabi(const BeamField& beam, const AtomSpecies& atom, Transition which) {
  const double rabi = rabi_from_power(beam, atom, which);
  return beam.profile == BeamProfile::gaussian ? rabi * DriveEnvelope::peak_scale() : rabi;
}

inline DensityMatrix fit_dim(const DensityMatrix& rho, const AtomSpecies& atom) {
  return rho.dim() < atom.level_count() ? rho.with_dim(atom.level_count()) : rho;
}

}  // namespace detail

/// Stage (i): the atom enters in |b> and is optically pumped towards |c>.
/// dim = 4 keeps a sink level even when the sink channel is off here.
inline StageResult run_preparation(const BeamField& pump, const AtomSpecies& atom,
                                   const AtomicBeam& atoms, int dim = 0,
                                   const StageOptions& opts = {}) {
  dim = std::max(dim, atom.level_count());
  const double duration = transit_time(pump, atoms);
  const DriveConfig drive = DriveConfig::ab_only(detail::stage_rabi(pump, atom, Transition::ab),
                                                 pump.detuning);
  const Trajectory traj = evolve(DensityMatrix::pure(level_b, dim), atom, drive, duration,
                                 detail::stage_evolve_options(pump, duration, opts));
  StageResult r{traj.final_state()};
  r.duration = duration;
  r.pumping_efficiency = r.rho_out.population(level_c);
  return r;
}

/// Stage (ii): the input beam drives a<->c; decay from |a> lands in |b>.
inline StageResult run_transduction(const BeamField& input, const DensityMatrix& rho_prepared,
                                    const AtomSpecies& atom, const AtomicBeam& atoms,
                                    const StageOptions& opts = {}) {
  const DensityMatrix rho0 = detail::fit_dim(rho_prepared, atom);
  const double duration = transit_time(input, atoms);
  const DriveConfig drive = DriveConfig::ac_only(detail::stage_rabi(input, atom, Transition::ac),
                                                 input.detuning);
  const Trajectory traj = evolve(rho0, atom, drive, duration,
                                 detail::stage_evolve_options(input, duration, opts));
  StageResult r{traj.final_state()};
  r.duration = duration;
  r.absorbed_photons = r.rho_out.population(level_b) - rho0.population(level_b);
  return r;
}

/// Stage (iii): the probe cycles a<->b for tau_probe; every decay a->b is one
/// emitted photon at lambda_ab.
inline StageResult run_detection(const BeamField& probe, const DensityMatrix& rho_after_input,
                                 const AtomSpecies& atom, double tau_probe,
                                 const StageOptions& opts = {}) {
  const DensityMatrix rho0 = detail::fit_dim(rho_after_input, atom);
  const DriveConfig drive = DriveConfig::ab_only(detail::stage_rabi(probe, atom, Transition::ab),
                                                 probe.detuning);
  const Trajectory traj = evolve(rho0, atom, drive, tau_probe,
                                 detail::stage_evolve_options(probe, tau_probe, opts));
  StageResult r{traj.final_state()};
  r.duration = tau_probe;
  r.emitted_photons = atom.gamma_ab * traj.integrated_population(level_a);
  r.rho_cc_after_probe = r.rho_out.population(level_c);
  return r;
}

/// Field-free flight between two beams.
inline DensityMatrix free_flight(const DensityMatrix& rho, const AtomSpecies& atom, double duration,
                                 const Tolerance& tol = {}) {
  if (duration <= 0.0) return rho;
  EvolveOptions eo;
  eo.tol = tol;
  eo.samples = 2;
  return evolve(detail::fit_dim(rho, atom), atom, DriveConfig{}, duration, eo).final_state();
}

/// Detected photons per atom: emitted x solid angle x losses x quantum efficiency.
inline double apply_detection_chain(double emitted_photons, const DetectionChain& chain) {
  if (emitted_photons < 0.0) throw std::invalid_argument("emitted photon number must be non-negative");
  return emitted_photons * chain.solid_angle * chain.optical_loss * chain.detector_qe;
}

/// SPCM count rate (counts/s) for a flux n V / tau_probe of atoms through the probe.
inline double count_rate(const DetectionChain& chain, const AtomSpecies& atom, double rho_cc_probe,
                         double rho_bb_input) {
  return chain.loss_efficiency() * chain.solid_angle * (atom.gamma_ab / atom.gamma_ac) *
         rho_cc_probe * (chain.density * chain.volume / chain.tau_probe) * rho_bb_input;
}

/// Amplified internal efficiency ceiling gamma_ab / gamma_ac.
inline double efficiency_ceiling(const AtomSpecies& atom) { return atom.gamma_ab / atom.gamma_ac; }

struct PipelineConfig {
  AtomSpecies atom = AtomSpecies::barium138();
  AtomicBeam atomic_beam{};
  BeamField pump{};
  BeamField input{};
  BeamField probe{};
  DetectionChain chain{};
  double gap_pump_input = 10e-3;  // m
  double gap_input_probe = 10e-3; // m
  bool sink_in_preparation = false;
  bool sink_in_transduction = true;
  bool sink_in_detection = true;
  Tolerance tol{};

  int state_dim() const {
    const bool any = atom.gamma_sink > 0.0 &&
                     (sink_in_preparation || sink_in_transduction || sink_in_detection);
    return any ? 4 : 3;
  }
  AtomSpecies stage_atom(bool sink) const { return atom.with_sink(sink && state_dim() == 4); }
};

struct PipelineResult {
  StageResult preparation;
  StageResult transduction;
  StageResult detection;
  double detected_photons = 0.0;    // per atom, all emission after the chain
  double background_photons = 0.0;  // detected per atom with the input beam off
  double signal_photons() const { return detected_photons - background_photons; }
};

inline StageResult prepare(const PipelineConfig& cfg) {
  StageOptions so{cfg.tol};
  return run_preparation(cfg.pump, cfg.stage_atom(cfg.sink_in_preparation), cfg.atomic_beam,
                         cfg.state_dim(), so);
}

namespace detail {

inline StageResult detect_after_flight(const PipelineConfig& cfg, const DensityMatrix& rho) {
  StageOptions so{cfg.tol};
  const DensityMatrix arrived = free_flight(rho, cfg.stage_atom(cfg.sink_in_detection),
                                            cfg.gap_input_probe / cfg.atomic_beam.velocity, cfg.tol);
  return run_detection(cfg.probe, arrived, cfg.stage_atom(cfg.sink_in_detection),
                       cfg.chain.tau_probe, so);
}

}  // namespace detail

/// Detected photons per atom when the input beam is off: residual |b>
/// population left by imperfect pumping still fluoresces in the probe.
inline double background_photons(const PipelineConfig& cfg, const StageResult& preparation) {
  const DensityMatrix at_input = free_flight(preparation.rho_out, cfg.stage_atom(cfg.sink_in_transduction),
                                             cfg.gap_pump_input / cfg.atomic_beam.velocity, cfg.tol);
  const double input_time = transit_time(cfg.input, cfg.atomic_beam);
  const DensityMatrix dark = free_flight(at_input, cfg.stage_atom(cfg.sink_in_transduction),
                                         input_time, cfg.tol);
  return apply_detection_chain(detail::detect_after_flight(cfg, dark).emitted_photons, cfg.chain);
}

/// Full three-stage run reusing an already computed preparation stage.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const StageResult& preparation,
                                   double background) {
  StageOptions so{cfg.tol};
  PipelineResult out;
  out.preparation = preparation;
  const AtomSpecies trans_atom = cfg.stage_atom(cfg.sink_in_transduction);
  const DensityMatrix at_input = free_flight(preparation.rho_out, trans_atom,
                                             cfg.gap_pump_input / cfg.atomic_beam.velocity, cfg.tol);
  out.transduction = run_transduction(cfg.input, at_input, trans_atom, cfg.atomic_beam, so);
  out.detection = detail::detect_after_flight(cfg, out.transduction.rho_out);
  out.detected_photons = apply_detection_chain(out.detection.emitted_photons, cfg.chain);
  out.background_photons = background;
  return out;
}

inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const StageResult prep = prepare(cfg);
  return run_pipeline(cfg, prep, background_photons(cfg, prep));
}

/// Background-subtracted detected photons per absorbed input photon.
inline double internal_efficiency(const PipelineResult& run) {
  const double absorbed = run.transduction.absorbed_photons;
  if (!(absorbed > 0.0)) throw DivisionByZeroAbsorption("no input photons absorbed");
  return run.signal_photons() / absorbed;
}

}  // namespace transduce
