// physcore.hpp - constants, unit conversions and laboratory-to-model bridges
//
// Every rate and detuning is stored in angular units (rad/s). Lengths are in
// metres, powers in watts, times in seconds unless a name says otherwise.

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace transduce {

namespace constants {
inline constexpr double planck = 6.62607015e-34;        // J s
inline constexpr double speed_of_light = 299792458.0;   // m/s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
}  // namespace constants

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double rad_per_mhz = two_pi * 1.0e6;

/// Linewidth in MHz (cycles per second, experimentalist convention) to rad/s.
constexpr double rate_from_mhz(double mhz) { return mhz * rad_per_mhz; }
constexpr double mhz_from_rate(double rate) { return rate / rad_per_mhz; }
constexpr double rate_from_hz(double hz) { return hz * two_pi; }
constexpr double hz_from_rate(double rate) { return rate / two_pi; }

enum class Transition { ab, ac };

/// Level data of a Lambda atom: excited |a>, ground |b>, metastable |c>, plus
/// an optional sink level fed only from |a>.
struct AtomSpecies {
  std::string name = "custom";
  double lambda_ab = 0.0;   // m
  double lambda_ac = 0.0;   // m
  double gamma_ab = 0.0;    // rad/s
  double gamma_ac = 0.0;    // rad/s
  double gamma_sink = 0.0;  // rad/s
  bool sink_enabled = false;

  /// Ba-138: 1S0 (b), 1P1 (a), 1D2 (c), with 3D2 as the sink channel.
  static AtomSpecies barium138() {
    AtomSpecies ba;
    ba.name = "Ba-138";
    ba.lambda_ab = 553e-9;
    ba.lambda_ac = 1.5e-6;
    ba.gamma_ab = rate_from_mhz(18.9);
    ba.gamma_ac = rate_from_mhz(0.040);
    ba.gamma_sink = rate_from_mhz(0.028);
    ba.sink_enabled = false;
    return ba;
  }

  /// Dimensionless-time variant: gamma_ab = 1 and gamma_ac = 1/ratio.
  static AtomSpecies unit_lambda(double ratio) {
    AtomSpecies atom;
    atom.name = "unit";
    atom.lambda_ab = 553e-9;
    atom.lambda_ac = 1.5e-6;
    atom.gamma_ab = 1.0;
    atom.gamma_ac = 1.0 / ratio;
    return atom;
  }

  int level_count() const { return sink_enabled ? 4 : 3; }

  /// Decay rate out of |a> through every active channel.
  double total_decay() const {
    return gamma_ab + gamma_ac + (sink_enabled ? gamma_sink : 0.0);
  }

  double gamma(Transition t) const { return t == Transition::ab ? gamma_ab : gamma_ac; }
  double wavelength(Transition t) const {
    return t == Transition::ab ? lambda_ab : lambda_ac;
  }

  AtomSpecies with_sink(bool enabled) const {
    AtomSpecies copy = *this;
    copy.sink_enabled = enabled;
    return copy;
  }

  // Throws std::invalid_argument. Aggregate construction skips this so the
  // two-level limit (gamma_ac = 0) stays reachable from tests.
  void validate() const {
    if (!(lambda_ab > 0.0) || !(lambda_ac > 0.0))
      throw std::invalid_argument("wavelengths must be positive");
    if (!(gamma_ac > 0.0)) throw std::invalid_argument("gamma_ac must be positive");
    if (!(gamma_ab > gamma_ac)) throw std::invalid_argument("gamma_ab must exceed gamma_ac");
    if (!(gamma_sink >= 0.0)) throw std::invalid_argument("gamma_sink must be non-negative");
  }
};

enum class BeamProfile { top_hat, gaussian };

/// One laser crossing the atomic beam. Widths are full extents (the 2.55 mm
/// pump "diameter" is a width); the top-hat footprint is the inscribed ellipse.
struct BeamField {
  double power = 0.0;              // W
  double width_along = 0.0;        // m, along the atomic propagation axis
  double width_transverse = 0.0;   // m
  double detuning = 0.0;           // rad/s
  double stretch_factor = 1.0;     // cylindrical-lens expansion along the atoms
  double interaction_time = 0.0;   // s; > 0 overrides width_along / velocity
  BeamProfile profile = BeamProfile::top_hat;

  double area() const {
    return std::numbers::pi * 0.25 * width_along * stretch_factor * width_transverse;
  }
  double intensity() const { return power / area(); }

  BeamField stretched(double factor) const {
    BeamField copy = *this;
    copy.stretch_factor *= factor;
    return copy;
  }
};

struct AtomicBeam {
  double velocity = 750.0;    // m/s
  double density = 2.82e6;    // atoms / cm^3
};

/// Two-level saturation intensity pi h c Gamma / (3 lambda^3), W/m^2.
inline double saturation_intensity(const AtomSpecies& atom, Transition which) {
  const double lambda = atom.wavelength(which);
  return std::numbers::pi * constants::planck * constants::speed_of_light * atom.gamma(which) /
         (3.0 * lambda * lambda * lambda);
}

/// Omega = Gamma sqrt(I / (2 I_sat)) for the mean top-hat intensity.
inline double rabi_from_power(const BeamField& beam, const AtomSpecies& atom, Transition which) {
  if (!(beam.area() > 0.0)) throw std::invalid_argument("beam area must be positive");
  if (beam.power <= 0.0) return 0.0;
  const double s = beam.intensity() / saturation_intensity(atom, which);
  return atom.gamma(which) * std::sqrt(0.5 * s);
}

/// Power that gives saturation parameter I/I_sat = s over the beam footprint.
inline double power_for_saturation(const BeamField& beam, const AtomSpecies& atom,
                                   Transition which, double s) {
  return s * saturation_intensity(atom, which) * beam.area();
}

inline double transit_time(const BeamField& beam, const AtomicBeam& atoms) {
  if (!(atoms.velocity > 0.0)) throw std::invalid_argument("atomic velocity must be positive");
  if (beam.interaction_time > 0.0) return beam.interaction_time * beam.stretch_factor;
  return beam.width_along * beam.stretch_factor / atoms.velocity;
}

/// Resonant cross-section 3 lambda_ac^2 / (2 pi) of the input transition.
inline double resonant_cross_section(const AtomSpecies& atom) {
  return 3.0 * atom.lambda_ac * atom.lambda_ac / two_pi;
}

inline double scattering_ratio(const AtomSpecies& atom, double effective_area) {
  if (!(effective_area > 0.0)) throw std::invalid_argument("effective area must be positive");
  return resonant_cross_section(atom) / effective_area;
}

/// Unsaturated absorption cross-section of the input transition at a detuning;
/// the half-width is gamma_ac / 2.
inline double absorption_cross_section(const AtomSpecies& atom, double detuning) {
  const double half = 0.5 * atom.gamma_ac;
  return resonant_cross_section(atom) * half * half / (detuning * detuning + half * half);
}

/// Circular beam whose diameter is the distance travelled in tau.
inline BeamField beam_for_interaction_time(double power, double tau, const AtomicBeam& atoms,
                                           double detuning = 0.0) {
  BeamField beam;
  beam.power = power;
  beam.width_along = atoms.velocity * tau;
  beam.width_transverse = atoms.velocity * tau;
  beam.detuning = detuning;
  beam.interaction_time = tau;
  return beam;
}

}  // namespace transduce
