// spectro.hpp - excitation spectroscopy of the transduction stage:
// input-detuning sweeps, Lorentzian bandwidth extraction, power broadening.

#pragma once

#include "transduce/lorentzian.hpp"
#include "transduce/parallel.hpp"
#include "transduce/pipeline.hpp"
#include "transduce/physcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace transduce {

struct Spectrum {
  std::vector<double> detunings;  // rad/s, ascending
  std::vector<double> response;   // detected photons per atom
  bool normalized = false;

  double peak() const { return *std::max_element(response.begin(), response.end()); }

  Spectrum normalized_copy() const {
    Spectrum s = *this;
    const double m = peak();
    if (m > 0.0)
      for (double& v : s.response) v /= m;
    s.normalized = true;
    return s;
  }
};

/// Linear grid on [-half_span, half_span] with exact mirror symmetry.
inline std::vector<double> symmetric_grid(double half_span, int points) {
  if (points < 3 || points % 2 == 0) throw std::invalid_argument("grid needs an odd point count >= 3");
  std::vector<double> g(points);
  const int mid = points / 2;
  for (int k = 0; k < mid; ++k) {
    const double x = -half_span * (1.0 - static_cast<double>(k) / mid);
    g[k] = x;
    g[points - 1 - k] = -x;
  }
  g[mid] = 0.0;
  return g;
}

/// Total decay rate of |a> as seen by the transduction stage, the low-power
/// floor of the transduction bandwidth.
inline double bandwidth_floor(const PipelineConfig& cfg) {
  return cfg.stage_atom(cfg.sink_in_transduction).total_decay();
}

/// Rate-model estimate of the spectrum FWHM: absorption 1 - exp(-R(D) tau)
/// with Lorentzian R(D), widened by coherent power broadening.
inline double expected_fwhm(const PipelineConfig& cfg, double input_power, double tau_input) {
  const double floor = bandwidth_floor(cfg);
  const BeamField beam = beam_for_interaction_time(input_power, tau_input, cfg.atomic_beam);
  const double rabi = rabi_from_power(beam, cfg.atom, Transition::ac);
  const double x0 = rabi * rabi * tau_input / floor;
  double width = floor;
  if (x0 > 1e-6) {
    const double x_half = -std::log(0.5 * (1.0 + std::exp(-x0)));
    width = floor * std::sqrt(std::max(1.0, x0 / x_half - 1.0));
  }
  return std::max(width, floor * std::sqrt(1.0 + 2.0 * rabi * rabi / (floor * floor)));
}

struct GridOptions {
  int points = 161;
  double span_factor = 8.0;  // full grid span in units of the expected FWHM
};

inline std::vector<double> default_grid(const PipelineConfig& cfg, double input_power, double tau_input,
                                        const GridOptions& opts = {}) {
  return symmetric_grid(0.5 * opts.span_factor * expected_fwhm(cfg, input_power, tau_input),
                        opts.points);
}

/// One full pipeline run per detuning. The preparation stage does not depend
/// on the input beam and is computed once.
inline Spectrum excitation_spectrum(double input_power, double tau_input, const std::vector<double>& grid,
                                    const PipelineConfig& cfg, int threads = 1) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("detuning grid must ascend");
  const StageResult prep = prepare(cfg);
  PipelineConfig base = cfg;
  base.input = beam_for_interaction_time(input_power, tau_input, cfg.atomic_beam);
  const double background = background_photons(base, prep);

  Spectrum s;
  s.detunings = grid;
  s.response = parallel_map(grid.size(), threads, [&](std::size_t i) {
    PipelineConfig point = base;
    point.input.detuning = grid[i];
    return run_pipeline(point, prep, background).detected_photons;
  });
  return s;
}

inline LorentzianFit fit_lorentzian(const Spectrum& s, const FitOptions& opts = {}) {
  return fit_lorentzian(s.detunings, s.response, opts);
}

struct BandwidthPoint {
  double power = 0.0;      // W
  double tau_input = 0.0;  // s
  LorentzianFit fit;
};

inline std::vector<BandwidthPoint> bandwidth_vs_power(const std::vector<double>& powers, double tau_input,
                                                      const PipelineConfig& cfg, const GridOptions& grid = {},
                                                      int threads = 1) {
  for (std::size_t i = 0; i < powers.size(); ++i) {
    if (!(powers[i] > 0.0)) throw std::invalid_argument("bandwidth powers must be positive");
    if (i > 0 && !(powers[i] > powers[i - 1])) throw std::invalid_argument("bandwidth powers must ascend");
  }
  std::vector<BandwidthPoint> out;
  out.reserve(powers.size());
  for (double p : powers) {
    const Spectrum s = excitation_spectrum(p, tau_input, default_grid(cfg, p, tau_input, grid), cfg, threads);
    out.push_back({p, tau_input, fit_lorentzian(s)});
  }
  return out;
}

struct EnergyScalingRow {
  double tau = 0.0;             // s
  double area = 0.0;            // m^2, circular beam of diameter v tau
  double intensity = 0.0;       // W/m^2
  double photons = 0.0;         // sigma0 I tau / (hbar omega), unsaturated
  double relative_to_first = 0.0;
  double tau_scaled = 0.0;      // relative_to_first * tau / tau_first; 1 for a 1/tau law
};

/// Photons transferred per atom in the unsaturated limit when both beam
/// dimensions scale with the transit length (area ~ tau^2) at fixed power.
inline std::vector<EnergyScalingRow> energy_scaling_check(const std::vector<double>& tau_values,
                                                          double fixed_power, const AtomSpecies& atom,
                                                          const AtomicBeam& atoms) {
  const double photon_energy = constants::planck * constants::speed_of_light / atom.lambda_ac;
  const double sigma = absorption_cross_section(atom, 0.0);
  std::vector<EnergyScalingRow> rows;
  for (double tau : tau_values) {
    if (!(tau > 0.0)) throw std::invalid_argument("interaction times must be positive");
    const BeamField beam = beam_for_interaction_time(fixed_power, tau, atoms);
    EnergyScalingRow row;
    row.tau = tau;
    row.area = beam.area();
    row.intensity = beam.intensity();
    row.photons = sigma * row.intensity / photon_energy * tau;
    rows.push_back(row);
  }
  for (auto& row : rows) {
    row.relative_to_first = row.photons / rows.front().photons;
    row.tau_scaled = row.relative_to_first * row.tau / rows.front().tau;
  }
  return rows;
}

}  // namespace transduce
