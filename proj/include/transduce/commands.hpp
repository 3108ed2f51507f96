// commands.hpp - one ResultTable per CLI subcommand

#pragma once

#include "transduce/cavity.hpp"
#include "transduce/config.hpp"
#include "transduce/liouville.hpp"
#include "transduce/parallel.hpp"
#include "transduce/pipeline.hpp"
#include "transduce/result_table.hpp"
#include "transduce/spectro.hpp"

#include <cmath>
#include <string>
#include <vector>

#ifndef TRANSDUCE_VERSION
#define TRANSDUCE_VERSION "dev"
#endif

namespace transduce {

namespace detail {

inline std::string rate_echo(double rate) {
  return format_number(mhz_from_rate(rate)) + " MHz = " + format_number(rate) + " rad/s";
}

inline void stamp(ResultTable& t, const RunConfig& rc, const std::string& command) {
  t.add_meta("tool", std::string("transduce ") + TRANSDUCE_VERSION);
  t.add_meta("command", command);
  t.add_meta("config_hash", "fnv1a64:" + rc.hash);
  t.add_meta("atom", rc.pipeline.atom.name);
  t.add_meta("gamma_ab", rate_echo(rc.pipeline.atom.gamma_ab));
  t.add_meta("gamma_ac", rate_echo(rc.pipeline.atom.gamma_ac));
  t.add_meta("gamma_sink", rate_echo(rc.pipeline.atom.gamma_sink));
  t.add_meta("rate_convention", "1 MHz linewidth = " + format_number(rad_per_mhz) + " rad/s");
}

constexpr double mW = 1e-3;
constexpr double us = 1e-6;

}  // namespace detail

/// Pumping efficiency against pump power with and without the stretch.
inline ResultTable cmd_pump_sweep(const RunConfig& rc, int threads = 1) {
  ResultTable t({{"power_mW", "mW"}, {"efficiency_stretched", "1"}, {"efficiency_unstretched", "1"}});
  detail::stamp(t, rc, "pump-sweep");
  t.add_meta("stretch_factor", format_number(rc.pipeline.pump.stretch_factor));
  const PipelineConfig& cfg = rc.pipeline;
  const AtomSpecies atom = cfg.stage_atom(cfg.sink_in_preparation);
  StageOptions so{cfg.tol};
  const std::size_t n = rc.pump_powers.size();
  // even index: stretched, odd: unstretched
  const auto eff = parallel_map(2 * n, threads, [&](std::size_t i) {
    BeamField pump = cfg.pump;
    pump.power = rc.pump_powers[i / 2];
    if (i % 2 == 1) pump.stretch_factor = 1.0;
    return run_preparation(pump, atom, cfg.atomic_beam, cfg.state_dim(), so).pumping_efficiency;
  });
  for (std::size_t k = 0; k < n; ++k) t.add_row({rc.pump_powers[k] / detail::mW, eff[2 * k], eff[2 * k + 1]});
  return t;
}

/// Detected photons per atom against absorbed photons per atom for every
/// probe setting. Rows with nothing absorbed have no defined efficiency and
/// are left out.
inline ResultTable cmd_efficiency_curve(const RunConfig& rc, int threads = 1) {
  ResultTable t({{"probe_saturation", "I/I_sat"},
                 {"input_power_mW", "mW"},
                 {"absorbed_per_atom", "photons"},
                 {"emitted_per_atom", "photons"},
                 {"detected_per_atom", "photons"},
                 {"background_per_atom", "photons"},
                 {"internal_efficiency", "1"}});
  detail::stamp(t, rc, "efficiency-curve");
  t.add_meta("tau_input_us", format_number(rc.input_tau / detail::us));
  t.add_meta("internal_efficiency", "(detected - background) / absorbed");
  const StageResult prep = prepare(rc.pipeline);
  for (double s : rc.probe_saturations) {
    PipelineConfig base = rc.with_probe_saturation(s);
    const double background = background_photons(base, prep);
    const auto runs = parallel_map(rc.input_powers.size(), threads, [&](std::size_t i) {
      PipelineConfig cfg = base;
      cfg.input = beam_for_interaction_time(rc.input_powers[i], rc.input_tau, cfg.atomic_beam,
                                            rc.pipeline.input.detuning);
      cfg.input.profile = rc.pipeline.input.profile;
      return run_pipeline(cfg, prep, background);
    });
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const PipelineResult& r = runs[i];
      if (!(r.transduction.absorbed_photons > 0.0)) continue;
      t.add_row({s, rc.input_powers[i] / detail::mW, r.transduction.absorbed_photons,
                 r.detection.emitted_photons, r.detected_photons, r.background_photons,
                 internal_efficiency(r)});
    }
  }
  return t;
}

/// Detected photons per atom against input detuning, one block per power.
inline ResultTable cmd_spectrum(const RunConfig& rc, int threads = 1) {
  ResultTable t({{"power_mW", "mW"}, {"detuning_MHz", "MHz"}, {"response", rc.normalize_spectra ? "1" : "photons"}});
  detail::stamp(t, rc, "spectrum");
  t.add_meta("tau_input_us", format_number(rc.input_tau / detail::us));
  t.add_meta("normalized", rc.normalize_spectra ? "true" : "false");
  const PipelineConfig cfg = rc.with_probe_saturation(rc.probe_saturations.front());
  t.add_meta("probe_saturation", format_number(rc.probe_saturations.front()));
  for (double p : rc.spectrum_powers) {
    Spectrum s = excitation_spectrum(p, rc.input_tau, default_grid(cfg, p, rc.input_tau, rc.grid), cfg, threads);
    if (rc.normalize_spectra) s = s.normalized_copy();
    for (std::size_t i = 0; i < s.detunings.size(); ++i)
      t.add_row({p / detail::mW, mhz_from_rate(s.detunings[i]), s.response[i]});
  }
  return t;
}

/// Fitted transduction bandwidth against input power for every interaction time.
inline ResultTable cmd_bandwidth(const RunConfig& rc, int threads = 1) {
  ResultTable t({{"power_mW", "mW"},
                 {"tau_input_us", "us"},
                 {"fwhm_MHz", "MHz"},
                 {"center_MHz", "MHz"},
                 {"amplitude", "photons"},
                 {"converged", "1"}});
  detail::stamp(t, rc, "bandwidth");
  const PipelineConfig cfg = rc.with_probe_saturation(rc.probe_saturations.front());
  t.add_meta("probe_saturation", format_number(rc.probe_saturations.front()));
  t.add_meta("floor_MHz", format_number(mhz_from_rate(bandwidth_floor(cfg))));
  for (double tau : rc.tau_inputs) {
    for (const BandwidthPoint& bp : bandwidth_vs_power(rc.bandwidth_powers, tau, cfg, rc.grid, threads))
      t.add_row({bp.power / detail::mW, tau / detail::us, mhz_from_rate(bp.fit.fwhm),
                 mhz_from_rate(bp.fit.center), bp.fit.amplitude, bp.fit.converged ? 1.0 : 0.0});
  }
  return t;
}

enum class CavityScenario {
  absorption = 1,
  absorption_uncoupled = 2,
  absorption_bad_cavity = 3,
  collection = 4,
  collection_uncoupled = 5,
  collection_undriven = 6,
};

/// Absorption (1-3) and collection (4-6) scenarios. Scenario 3 uses
/// kappa = 100 gamma_ab.
inline ResultTable cmd_cavity(const RunConfig& rc, int threads = 1) {
  ResultTable t({{"scenario", "id"},
                 {"g_MHz", "MHz"},
                 {"kappa_MHz", "MHz"},
                 {"probe_rabi_MHz", "MHz"},
                 {"duration_us", "us"},
                 {"fock_cutoff", "1"},
                 {"result", "1"},
                 {"leaked", "1"},
                 {"scattered", "1"},
                 {"stored", "1"},
                 {"free_space_photons", "photons"},
                 {"enhancement", "1"}});
  detail::stamp(t, rc, "cavity");
  t.add_meta("scenarios",
             "1 absorption, 2 absorption g=0, 3 absorption kappa=100 gamma_ab, 4 collection, "
             "5 collection g=0, 6 collection probe off");
  t.add_meta("result", "absorption: terminal P(b); collection: kappa * integral <n> dt (photons)");
  t.add_meta("coupling", "H_int = (g/2)(|a><x| a + h.c.); rates given as value / 2pi");

  const AtomSpecies atom = rc.pipeline.atom;
  const std::vector<CavityScenario> ids = {
      CavityScenario::absorption, CavityScenario::absorption_uncoupled, CavityScenario::absorption_bad_cavity,
      CavityScenario::collection, CavityScenario::collection_uncoupled, CavityScenario::collection_undriven};

  const auto rows = parallel_map(ids.size(), threads, [&](std::size_t i) {
    const CavityScenario id = ids[i];
    const double sid = static_cast<double>(static_cast<int>(id));
    if (id == CavityScenario::absorption || id == CavityScenario::absorption_uncoupled ||
        id == CavityScenario::absorption_bad_cavity) {
      CavityConfig cav = rc.absorption_cavity;
      if (id == CavityScenario::absorption_uncoupled) cav.g = 0.0;
      if (id == CavityScenario::absorption_bad_cavity) cav.kappa = 100.0 * atom.gamma_ab;
      CavityOptions opts = rc.cavity_options;
      opts.tol = rc.pipeline.tol;
      const AbsorptionResult r = absorb_sim(atom, cav, rc.absorption_duration, opts);
      return std::vector<double>{sid, mhz_from_rate(cav.g), mhz_from_rate(cav.kappa), 0.0,
                                 r.duration / detail::us, static_cast<double>(r.fock_cutoff), r.absorbed,
                                 r.leaked, r.scattered, r.stored, 0.0, 0.0};
    }
    CavityConfig cav = rc.collection_cavity;
    double rabi = rc.collection_probe_rabi;
    if (id == CavityScenario::collection_uncoupled) cav.g = 0.0;
    if (id == CavityScenario::collection_undriven) rabi = 0.0;
    const CollectionResult r =
        collect_sim(atom.with_sink(rc.pipeline.sink_in_detection), cav, rabi, rc.collection);
    return std::vector<double>{sid, mhz_from_rate(cav.g), mhz_from_rate(cav.kappa), mhz_from_rate(rabi),
                               r.duration / detail::us, static_cast<double>(r.fock_cutoff), r.cavity_photons,
                               0.0, 0.0, 0.0, r.free_space_photons, r.enhancement};
  });
  for (const auto& row : rows) t.add_row(row);
  return t;
}

/// Population dynamics of the pumping stage in units of 1/gamma_ab: panel 0
/// is the unstretched beam, panel 1 the stretched one at equal power.
inline ResultTable cmd_populations(const RunConfig& rc, int threads = 1) {
  ResultTable t({{"panel", "id"}, {"time_gamma", "1/gamma_ab"}, {"rho_aa", "1"}, {"rho_bb", "1"}, {"rho_cc", "1"}});
  detail::stamp(t, rc, "populations");
  const PopulationSettings& ps = rc.populations;
  t.add_meta("decay_ratio", format_number(ps.decay_ratio));
  t.add_meta("panels", "0 unstretched, 1 stretched x" + format_number(ps.stretch_factor));
  const AtomSpecies atom = AtomSpecies::unit_lambda(ps.decay_ratio);
  const auto traj = parallel_map(2, threads, [&](std::size_t panel) {
    const double k = panel == 0 ? 1.0 : ps.stretch_factor;
    EvolveOptions eo;
    eo.tol = rc.pipeline.tol;
    eo.samples = ps.samples;
    return evolve(DensityMatrix::pure(level_b, 3), atom,
                  DriveConfig::ab_only(ps.rabi_over_gamma / std::sqrt(k), 0.0), ps.duration_gamma * k, eo);
  });
  for (std::size_t panel = 0; panel < 2; ++panel)
    for (std::size_t i = 0; i < traj[panel].times.size(); ++i) {
      const DensityMatrix& r = traj[panel].states[i];
      t.add_row({static_cast<double>(panel), traj[panel].times[i], r.population(level_a), r.population(level_b),
                 r.population(level_c)});
    }
  return t;
}

}  // namespace transduce
