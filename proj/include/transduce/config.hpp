// config.hpp - JSON run configuration: field table (defaults, bounds, units),
// strict validation, JSON Schema export and conversion to model units.
//
// Rates and detunings are entered as linewidths in MHz (value / 2pi), lengths
// in mm or nm, times in us, powers in mW.

#pragma once

#include "transduce/cavity.hpp"
#include "transduce/errors.hpp"
#include "transduce/physcore.hpp"
#include "transduce/pipeline.hpp"
#include "transduce/result_table.hpp"
#include "transduce/spectro.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace transduce {

using json = nlohmann::json;

inline constexpr int config_schema_version = 1;

enum class FieldKind { number, integer, boolean, string, number_list };

enum class FieldBound {
  any,
  positive,      // > 0
  non_negative,  // >= 0
  unit,          // (0, 1]
  open_unit,     // (0, 1)
  odd_41,        // odd integer >= 41
  at_least_1,    // integer >= 1
};

struct FieldSpec {
  std::string section;
  std::string key;
  FieldKind kind;
  FieldBound bound;
  json default_value;
  std::string description;

  std::string path() const { return section + "." + key; }
};

inline const std::vector<FieldSpec>& config_fields() {
  using K = FieldKind;
  using B = FieldBound;
  static const std::vector<FieldSpec> fields = {
      {"atom", "name", K::string, B::any, "Ba-138", "label"},
      {"atom", "gamma_ab_MHz", K::number, B::positive, 18.9, "a->b linewidth"},
      {"atom", "gamma_ac_MHz", K::number, B::positive, 0.040, "a->c linewidth"},
      {"atom", "gamma_sink_MHz", K::number, B::non_negative, 0.028, "a->sink linewidth"},
      {"atom", "lambda_ab_nm", K::number, B::positive, 553.0, "a<->b wavelength"},
      {"atom", "lambda_ac_nm", K::number, B::positive, 1500.0, "a<->c wavelength"},

      {"atomic_beam", "velocity_m_per_s", K::number, B::positive, 750.0, "mean atomic velocity"},
      {"atomic_beam", "density_per_cm3", K::number, B::positive, 2.82e6, "atom density in the probe"},

      {"pump", "power_mW", K::number, B::non_negative, 100.0, "pump power"},
      {"pump", "width_along_mm", K::number, B::positive, 2.55, "full width along the atomic beam"},
      {"pump", "width_transverse_mm", K::number, B::positive, 2.55, "full width across the atomic beam"},
      {"pump", "detuning_MHz", K::number, B::any, 0.0, "pump detuning"},
      {"pump", "stretch_factor", K::number, B::positive, 20.0, "cylindrical-lens expansion along the atoms"},
      {"pump", "interaction_time_us", K::number, B::non_negative, 3.62,
       "unstretched transit time; 0 derives it from the width"},

      {"input", "power_mW", K::number, B::non_negative, 0.1, "input power for single-point runs"},
      {"input", "interaction_time_us", K::number, B::positive, 0.92, "input transit time; sets a circular beam"},
      {"input", "detuning_MHz", K::number, B::any, 0.0, "input detuning"},

      {"probe", "width_along_mm", K::number, B::positive, 2.19, "full width along the atomic beam"},
      {"probe", "width_transverse_mm", K::number, B::positive, 2.34, "full width across the atomic beam"},
      {"probe", "saturation", K::number_list, B::positive, json::array({17.0, 0.17}),
       "probe I/I_sat settings"},
      {"probe", "detuning_MHz", K::number, B::any, 0.0, "probe detuning"},

      {"detection", "solid_angle", K::number, B::unit, 0.067, "collected solid-angle fraction"},
      {"detection", "optical_loss", K::number, B::unit, 0.72, "optical transmission"},
      {"detection", "detector_qe", K::number, B::unit, 0.55, "SPCM quantum efficiency"},
      {"detection", "volume_cm3", K::number, B::positive, 2.75e-5, "probed volume"},
      {"detection", "tau_probe_us", K::number, B::positive, 2.92, "probe interaction time"},

      {"gaps", "pump_input_mm", K::number, B::non_negative, 10.0, "field-free flight pump -> input"},
      {"gaps", "input_probe_mm", K::number, B::non_negative, 10.0, "field-free flight input -> probe"},

      {"sweeps", "pump_power_mW", K::number_list, B::non_negative,
       json::array({0.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 120.0, 150.0,
                    200.0}),
       "pump-sweep powers"},
      {"sweeps", "input_power_mW", K::number_list, B::non_negative,
       json::array({1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0}), "efficiency-curve input powers"},
      {"sweeps", "spectrum_power_mW", K::number_list, B::non_negative, json::array({5e-5, 5e-2}),
       "spectrum input powers"},
      {"sweeps", "bandwidth_power_mW", K::number_list, B::positive,
       json::array({5e-5, 5e-4, 5e-3, 5e-2, 5e-1, 2.0}), "bandwidth input powers"},
      {"sweeps", "tau_input_us", K::number_list, B::positive, json::array({0.92, 2.34}),
       "bandwidth input interaction times"},
      {"sweeps", "detuning_points", K::integer, B::odd_41, 161, "points per detuning grid"},
      {"sweeps", "span_factor", K::number, B::positive, 8.0, "grid span in expected FWHMs"},

      {"cavity", "absorption_g_MHz", K::number, B::non_negative, 1.89, "single-photon Rabi frequency on a<->c"},
      {"cavity", "absorption_kappa_MHz", K::number, B::positive, 0.0189, "cavity energy decay rate"},
      {"cavity", "absorption_detuning_MHz", K::number, B::any, 0.0, "cavity detuning from a<->c"},
      {"cavity", "absorption_duration_us", K::number, B::positive, 4.2105,
       "absorption window (500 / gamma_ab)"},
      {"cavity", "absorption_fock_cutoff", K::integer, B::at_least_1, 2, "starting Fock cutoff"},
      {"cavity", "collection_g_MHz", K::number, B::non_negative, 37.8, "single-photon Rabi frequency on a<->b"},
      {"cavity", "collection_kappa_MHz", K::number, B::positive, 9.45, "cavity energy decay rate"},
      {"cavity", "collection_detuning_MHz", K::number, B::any, 0.0, "cavity detuning from a<->b"},
      {"cavity", "collection_probe_rabi_MHz", K::number, B::non_negative, 94.5, "probe Rabi frequency"},
      {"cavity", "collection_max_duration_us", K::number, B::positive, 100.0, "upper bound on the run"},
      {"cavity", "collection_fock_cutoff", K::integer, B::at_least_1, 8, "starting Fock cutoff"},
      {"cavity", "dark_threshold", K::number, B::open_unit, 0.99, "dark population that ends collection"},
      {"cavity", "baseline_photons", K::number, B::positive, 4.1, "free-space collected photons per atom"},
      {"cavity", "max_fock_cutoff", K::integer, B::at_least_1, 20, "largest Fock cutoff tried"},
      {"cavity", "cutoff_tolerance", K::number, B::positive, 1e-3, "relative change accepted per cutoff step"},

      {"populations", "decay_ratio", K::number, B::positive, 330.0, "gamma_ab / gamma_ac"},
      {"populations", "rabi_over_gamma", K::number, B::positive, 4.0, "unstretched pump Rabi / gamma_ab"},
      {"populations", "duration_gamma", K::number, B::positive, 500.0, "unstretched duration * gamma_ab"},
      {"populations", "stretch_factor", K::number, B::positive, 20.0, "stretch of the second panel"},
      {"populations", "samples", K::integer, B::at_least_1, 201, "samples per panel"},

      {"flags", "sink_in_preparation", K::boolean, B::any, false, "sink channel during pumping"},
      {"flags", "sink_in_transduction", K::boolean, B::any, true, "sink channel during the input stage"},
      {"flags", "sink_in_detection", K::boolean, B::any, true, "sink channel during detection"},
      {"flags", "gaussian_profile", K::boolean, B::any, false, "Gaussian temporal envelope for all beams"},
      {"flags", "normalize_spectra", K::boolean, B::any, true, "divide each spectrum by its maximum"},

      {"tolerance", "rel", K::number, B::positive, 1e-9, "integrator relative tolerance"},
      {"tolerance", "abs", K::number, B::positive, 1e-12, "integrator absolute tolerance"},

      {"output", "directory", K::string, B::any, "out", "directory for CSV files"},
  };
  return fields;
}

inline std::vector<std::string> config_sections() {
  std::vector<std::string> out;
  for (const auto& f : config_fields())
    if (std::find(out.begin(), out.end(), f.section) == out.end()) out.push_back(f.section);
  return out;
}

inline json default_config_json() {
  json doc = json::object();
  doc["schema_version"] = config_schema_version;
  for (const auto& f : config_fields()) doc[f.section][f.key] = f.default_value;
  return doc;
}

/// JSON Schema (draft 2020-12) equivalent of the field table.
inline json config_json_schema() {
  json schema = {
      {"$schema", "https://json-schema.org/draft/2020-12/schema"},
      {"title", "transduce run configuration"},
      {"type", "object"},
      {"additionalProperties", false},
      {"required", json::array({"schema_version"})},
  };
  schema["properties"]["schema_version"] = {{"const", config_schema_version}};
  for (const auto& section : config_sections()) {
    json& s = schema["properties"][section];
    s["type"] = "object";
    s["additionalProperties"] = false;
    s["properties"] = json::object();
  }
  for (const auto& f : config_fields()) {
    json p;
    json* target = &p;
    switch (f.kind) {
      case FieldKind::number: p["type"] = "number"; break;
      case FieldKind::integer: p["type"] = "integer"; break;
      case FieldKind::boolean: p["type"] = "boolean"; break;
      case FieldKind::string: p["type"] = "string"; break;
      case FieldKind::number_list:
        p["type"] = "array";
        p["minItems"] = 1;
        p["items"] = {{"type", "number"}};
        target = &p["items"];
        break;
    }
    switch (f.bound) {
      case FieldBound::any: break;
      case FieldBound::positive: (*target)["exclusiveMinimum"] = 0; break;
      case FieldBound::non_negative: (*target)["minimum"] = 0; break;
      case FieldBound::unit:
        (*target)["exclusiveMinimum"] = 0;
        (*target)["maximum"] = 1;
        break;
      case FieldBound::open_unit:
        (*target)["exclusiveMinimum"] = 0;
        (*target)["exclusiveMaximum"] = 1;
        break;
      case FieldBound::odd_41:
        (*target)["minimum"] = 41;
        (*target)["not"] = {{"multipleOf", 2}};
        break;
      case FieldBound::at_least_1: (*target)["minimum"] = 1; break;
    }
    p["default"] = f.default_value;
    p["description"] = f.description;
    schema["properties"][f.section]["properties"][f.key] = p;
  }
  return schema;
}

namespace detail {

inline void check_number(const std::string& path, double v, FieldBound bound) {
  if (!std::isfinite(v)) throw ConfigInvalid(path, "must be finite");
  switch (bound) {
    case FieldBound::any: break;
    case FieldBound::positive:
      if (!(v > 0.0)) throw ConfigInvalid(path, "must be > 0");
      break;
    case FieldBound::non_negative:
      if (!(v >= 0.0)) throw ConfigInvalid(path, "must be >= 0");
      break;
    case FieldBound::unit:
      if (!(v > 0.0 && v <= 1.0)) throw ConfigInvalid(path, "must lie in (0, 1]");
      break;
    case FieldBound::open_unit:
      if (!(v > 0.0 && v < 1.0)) throw ConfigInvalid(path, "must lie in (0, 1)");
      break;
    case FieldBound::odd_41:
      if (v < 41 || static_cast<long long>(v) % 2 == 0) throw ConfigInvalid(path, "must be an odd integer >= 41");
      break;
    case FieldBound::at_least_1:
      if (v < 1) throw ConfigInvalid(path, "must be >= 1");
      break;
  }
}

inline void check_field(const FieldSpec& f, const json& v) {
  const std::string path = f.path();
  switch (f.kind) {
    case FieldKind::number:
      if (!v.is_number()) throw ConfigInvalid(path, "expected a number");
      check_number(path, v.get<double>(), f.bound);
      break;
    case FieldKind::integer:
      if (!v.is_number_integer()) throw ConfigInvalid(path, "expected an integer");
      check_number(path, v.get<double>(), f.bound);
      break;
    case FieldKind::boolean:
      if (!v.is_boolean()) throw ConfigInvalid(path, "expected true or false");
      break;
    case FieldKind::string:
      if (!v.is_string()) throw ConfigInvalid(path, "expected a string");
      break;
    case FieldKind::number_list:
      if (!v.is_array()) throw ConfigInvalid(path, "expected an array of numbers");
      if (v.empty()) throw ConfigInvalid(path, "must not be empty");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string item = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_number()) throw ConfigInvalid(item, "expected a number");
        check_number(item, v[i].get<double>(), f.bound);
      }
      break;
  }
}

inline const FieldSpec* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : config_fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

}  // namespace detail

/// Validates a user document against the field table and fills in defaults.
/// Unknown keys at any level are rejected.
inline json effective_config(const json& user) {
  if (!user.is_object()) throw ConfigInvalid("<document>", "top level must be an object");
  if (!user.contains("schema_version")) throw ConfigInvalid("schema_version", "required");
  const json& ver = user["schema_version"];
  if (!ver.is_number_integer() || ver.get<int>() != config_schema_version)
    throw ConfigInvalid("schema_version", "unsupported version (expected " +
                                              std::to_string(config_schema_version) + ")");
  const auto sections = config_sections();
  json doc = default_config_json();
  for (const auto& [section, body] : user.items()) {
    if (section == "schema_version") continue;
    if (std::find(sections.begin(), sections.end(), section) == sections.end())
      throw ConfigInvalid(section, "unknown key");
    if (!body.is_object()) throw ConfigInvalid(section, "expected an object");
    for (const auto& [key, value] : body.items()) {
      const FieldSpec* f = detail::find_field(section, key);
      if (!f) throw ConfigInvalid(section + "." + key, "unknown key");
      detail::check_field(*f, value);
      doc[section][key] = value;
    }
  }
  return doc;
}

/// FNV-1a 64 of the canonical (sorted-key) effective config without the
/// output block.
inline std::string config_hash(const json& effective) {
  json copy = effective;
  copy.erase("output");
  return hex64(fnv1a64(copy.dump()));
}

struct PopulationSettings {
  double decay_ratio = 330.0;
  double rabi_over_gamma = 4.0;
  double duration_gamma = 500.0;
  double stretch_factor = 20.0;
  int samples = 201;
};

struct RunConfig {
  json effective;
  std::string hash;

  PipelineConfig pipeline;  // probe power left at 0, see with_probe_saturation
  std::vector<double> probe_saturations;

  std::vector<double> pump_powers;       // W, ascending
  std::vector<double> input_powers;      // W, ascending
  std::vector<double> spectrum_powers;   // W
  std::vector<double> bandwidth_powers;  // W, ascending
  std::vector<double> tau_inputs;        // s
  double input_tau = 0.0;                // s
  GridOptions grid;
  bool normalize_spectra = true;

  CavityConfig absorption_cavity;
  double absorption_duration = 0.0;  // s
  CavityConfig collection_cavity;
  double collection_probe_rabi = 0.0;  // rad/s
  CollectOptions collection;
  CavityOptions cavity_options;

  PopulationSettings populations;
  std::string output_directory;

  /// Pipeline config with the probe power set to give I/I_sat = s.
  PipelineConfig with_probe_saturation(double s) const {
    PipelineConfig cfg = pipeline;
    cfg.probe.power = power_for_saturation(cfg.probe, cfg.atom, Transition::ab, s);
    return cfg;
  }
};

namespace detail {

inline std::vector<double> scaled_list(const json& v, double scale) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>() * scale);
  return out;
}

inline void require_ascending(std::vector<double>& v, const std::string& path, bool sort_allowed) {
  if (sort_allowed) std::sort(v.begin(), v.end());
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw ConfigInvalid(path, "values must be distinct");
}

}  // namespace detail

inline RunConfig run_config_from(const json& user) {
  RunConfig rc;
  rc.effective = effective_config(user);
  rc.hash = config_hash(rc.effective);
  const json& e = rc.effective;
  auto num = [&](const char* s, const char* k) { return e[s][k].get<double>(); };
  auto flag = [&](const char* k) { return e["flags"][k].get<bool>(); };
  constexpr double mm = 1e-3, us = 1e-6, mW = 1e-3;

  AtomSpecies atom;
  atom.name = e["atom"]["name"].get<std::string>();
  atom.gamma_ab = rate_from_mhz(num("atom", "gamma_ab_MHz"));
  atom.gamma_ac = rate_from_mhz(num("atom", "gamma_ac_MHz"));
  atom.gamma_sink = rate_from_mhz(num("atom", "gamma_sink_MHz"));
  atom.lambda_ab = num("atom", "lambda_ab_nm") * 1e-9;
  atom.lambda_ac = num("atom", "lambda_ac_nm") * 1e-9;
  try {
    atom.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigInvalid("atom", err.what());
  }

  PipelineConfig& p = rc.pipeline;
  p.atom = atom;
  p.atomic_beam.velocity = num("atomic_beam", "velocity_m_per_s");
  p.atomic_beam.density = num("atomic_beam", "density_per_cm3");
  const BeamProfile profile = flag("gaussian_profile") ? BeamProfile::gaussian : BeamProfile::top_hat;

  p.pump.power = num("pump", "power_mW") * mW;
  p.pump.width_along = num("pump", "width_along_mm") * mm;
  p.pump.width_transverse = num("pump", "width_transverse_mm") * mm;
  p.pump.detuning = rate_from_mhz(num("pump", "detuning_MHz"));
  p.pump.stretch_factor = num("pump", "stretch_factor");
  p.pump.interaction_time = num("pump", "interaction_time_us") * us;
  p.pump.profile = profile;

  rc.input_tau = num("input", "interaction_time_us") * us;
  p.input = beam_for_interaction_time(num("input", "power_mW") * mW, rc.input_tau, p.atomic_beam,
                                      rate_from_mhz(num("input", "detuning_MHz")));
  p.input.profile = profile;

  p.probe.width_along = num("probe", "width_along_mm") * mm;
  p.probe.width_transverse = num("probe", "width_transverse_mm") * mm;
  p.probe.detuning = rate_from_mhz(num("probe", "detuning_MHz"));
  p.probe.profile = profile;
  rc.probe_saturations = detail::scaled_list(e["probe"]["saturation"], 1.0);

  p.chain.solid_angle = num("detection", "solid_angle");
  p.chain.optical_loss = num("detection", "optical_loss");
  p.chain.detector_qe = num("detection", "detector_qe");
  p.chain.volume = num("detection", "volume_cm3");
  p.chain.tau_probe = num("detection", "tau_probe_us") * us;
  p.chain.density = p.atomic_beam.density;

  p.gap_pump_input = num("gaps", "pump_input_mm") * mm;
  p.gap_input_probe = num("gaps", "input_probe_mm") * mm;
  p.sink_in_preparation = flag("sink_in_preparation");
  p.sink_in_transduction = flag("sink_in_transduction");
  p.sink_in_detection = flag("sink_in_detection");
  p.tol = Tolerance{num("tolerance", "rel"), num("tolerance", "abs")};

  const json& sw = e["sweeps"];
  rc.pump_powers = detail::scaled_list(sw["pump_power_mW"], mW);
  detail::require_ascending(rc.pump_powers, "sweeps.pump_power_mW", true);
  rc.input_powers = detail::scaled_list(sw["input_power_mW"], mW);
  detail::require_ascending(rc.input_powers, "sweeps.input_power_mW", true);
  rc.spectrum_powers = detail::scaled_list(sw["spectrum_power_mW"], mW);
  rc.bandwidth_powers = detail::scaled_list(sw["bandwidth_power_mW"], mW);
  detail::require_ascending(rc.bandwidth_powers, "sweeps.bandwidth_power_mW", true);
  rc.tau_inputs = detail::scaled_list(sw["tau_input_us"], us);
  rc.grid.points = sw["detuning_points"].get<int>();
  rc.grid.span_factor = sw["span_factor"].get<double>();
  rc.normalize_spectra = flag("normalize_spectra");

  const json& cv = e["cavity"];
  rc.absorption_cavity = CavityConfig{rate_from_mhz(num("cavity", "absorption_g_MHz")),
                                      rate_from_mhz(num("cavity", "absorption_kappa_MHz")),
                                      rate_from_mhz(num("cavity", "absorption_detuning_MHz")),
                                      cv["absorption_fock_cutoff"].get<int>()};
  rc.absorption_duration = num("cavity", "absorption_duration_us") * us;
  rc.collection_cavity = CavityConfig{rate_from_mhz(num("cavity", "collection_g_MHz")),
                                      rate_from_mhz(num("cavity", "collection_kappa_MHz")),
                                      rate_from_mhz(num("cavity", "collection_detuning_MHz")),
                                      cv["collection_fock_cutoff"].get<int>()};
  rc.collection_probe_rabi = rate_from_mhz(num("cavity", "collection_probe_rabi_MHz"));
  rc.cavity_options.max_cutoff = cv["max_fock_cutoff"].get<int>();
  rc.cavity_options.convergence = num("cavity", "cutoff_tolerance");
  rc.collection.max_duration = num("cavity", "collection_max_duration_us") * us;
  rc.collection.dark_threshold = num("cavity", "dark_threshold");
  rc.collection.baseline_photons = num("cavity", "baseline_photons");
  rc.collection.cavity.max_cutoff = rc.cavity_options.max_cutoff;
  rc.collection.cavity.convergence = rc.cavity_options.convergence;

  const json& pop = e["populations"];
  rc.populations.decay_ratio = pop["decay_ratio"].get<double>();
  rc.populations.rabi_over_gamma = pop["rabi_over_gamma"].get<double>();
  rc.populations.duration_gamma = pop["duration_gamma"].get<double>();
  rc.populations.stretch_factor = pop["stretch_factor"].get<double>();
  rc.populations.samples = pop["samples"].get<int>();
  if (rc.populations.samples < 2) throw ConfigInvalid("populations.samples", "must be >= 2");
  if (!(rc.populations.decay_ratio > 1.0)) throw ConfigInvalid("populations.decay_ratio", "must exceed 1");

  rc.output_directory = e["output"]["directory"].get<std::string>();
  return rc;
}

inline RunConfig default_run_config() { return run_config_from(json{{"schema_version", config_schema_version}}); }

inline RunConfig parse_run_config(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigInvalid("<document>", std::string("malformed JSON: ") + err.what());
  }
  return run_config_from(user);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigInvalid("--config", "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace transduce
