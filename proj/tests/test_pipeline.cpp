#include "transduce/config.hpp"
#include "transduce/pipeline.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace transduce;

namespace {

BeamField reference_pump(double power) {
  BeamField b;
  b.power = power;
  b.width_along = 2.55e-3;
  b.width_transverse = 2.55e-3;
  b.interaction_time = 3.62e-6;
  return b;
}

PipelineConfig probe_config(double saturation) { return default_run_config().with_probe_saturation(saturation); }

}  // namespace

TEST(Preparation, ZeroPumpLeavesGroundState) {
  const StageResult r = run_preparation(reference_pump(0.0), AtomSpecies::barium138(), AtomicBeam{});
  EXPECT_NEAR(r.pumping_efficiency, 0.0, 1e-15);
  EXPECT_NEAR(r.rho_out.population(level_b), 1.0, 1e-15);
}

TEST(Preparation, StretchedBeatsUnstretchedAtEqualPower) {
  const AtomSpecies ba = AtomSpecies::barium138();
  for (double p : {0.005, 0.02, 0.1}) {
    const double plain = run_preparation(reference_pump(p), ba, AtomicBeam{}).pumping_efficiency;
    const double wide = run_preparation(reference_pump(p).stretched(20), ba, AtomicBeam{}).pumping_efficiency;
    EXPECT_GT(wide, plain) << p;
  }
}

TEST(Preparation, HundredMilliwattStretchedEfficiency) {
  const StageResult r = run_preparation(reference_pump(0.1).stretched(20), AtomSpecies::barium138(), AtomicBeam{});
  EXPECT_NEAR(r.duration, 72.4e-6, 1e-15);
  EXPECT_GE(r.pumping_efficiency, 0.99);
  EXPECT_NEAR(r.pumping_efficiency, 0.997, 0.005);
}

TEST(Preparation, MonotoneInPowerAndTime) {
  const AtomSpecies ba = AtomSpecies::barium138();
  double prev = -1.0;
  for (double p : {0.001, 0.003, 0.01, 0.03, 0.1}) {
    const double e = run_preparation(reference_pump(p), ba, AtomicBeam{}).pumping_efficiency;
    EXPECT_GE(e, prev);
    prev = e;
  }
  // fixed intensity, longer beam
  prev = -1.0;
  for (double tau : {1e-6, 3e-6, 1e-5}) {
    BeamField b = reference_pump(0.01);
    b.interaction_time = tau;
    const double e = run_preparation(b, ba, AtomicBeam{}).pumping_efficiency;
    EXPECT_GE(e, prev);
    prev = e;
  }
}

TEST(Preparation, SinkCapsPumping) {
  const AtomSpecies ba = AtomSpecies::barium138();
  const double with_sink =
      run_preparation(reference_pump(0.1).stretched(20), ba.with_sink(true), AtomicBeam{}).pumping_efficiency;
  EXPECT_LT(with_sink, ba.gamma_ac / (ba.gamma_ac + ba.gamma_sink) + 1e-3);
}

TEST(Transduction, ZeroInputChangesNothing) {
  const AtomSpecies atom = AtomSpecies::barium138().with_sink(true);
  const DensityMatrix c = DensityMatrix::pure(level_c, 4);
  const StageResult r = run_transduction(beam_for_interaction_time(0.0, 0.92e-6, AtomicBeam{}), c, atom, AtomicBeam{});
  EXPECT_NEAR(r.absorbed_photons, 0.0, 1e-15);
  EXPECT_LT((r.rho_out.matrix() - c.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Transduction, StrongLongInputSaturates) {
  const AtomSpecies atom = AtomSpecies::barium138().with_sink(true);
  const StageResult r = run_transduction(beam_for_interaction_time(1e-3, 2.34e-6, AtomicBeam{}),
                                         DensityMatrix::pure(level_c, 4), atom, AtomicBeam{});
  EXPECT_GT(r.absorbed_photons, 0.99);
  EXPECT_LE(r.absorbed_photons, 1.0);
}

TEST(Transduction, WeakDetunedInputFollowsLorentzian) {
  const AtomSpecies atom = AtomSpecies::barium138().with_sink(true);
  const double half = 0.5 * atom.total_decay();
  const AtomicBeam atoms;
  auto absorbed = [&](double detuning) {
    const BeamField b = beam_for_interaction_time(1e-7, 2.34e-6, atoms, detuning);
    return run_transduction(b, DensityMatrix::pure(level_c, 4), atom, atoms).absorbed_photons;
  };
  const double on = absorbed(0.0);
  for (double d : {half, 2 * half}) {
    const double expect = half * half / (d * d + half * half);
    EXPECT_NEAR(absorbed(d) / on / expect, 1.0, 0.05) << d / half;
  }
}

TEST(Detection, MetastableAtomIsDark) {
  const PipelineConfig cfg = probe_config(17);
  const StageResult r = run_detection(cfg.probe, DensityMatrix::pure(level_c, 4), cfg.stage_atom(true), 2.92e-6);
  EXPECT_EQ(r.emitted_photons, 0.0);
  EXPECT_NEAR(r.rho_cc_after_probe, 1.0, 1e-15);
}

TEST(Detection, SaturatedProbeEmissionWithinBand) {
  const PipelineConfig cfg = probe_config(17);
  const StageResult r = run_detection(cfg.probe, DensityMatrix::pure(level_b, 4), cfg.stage_atom(true), 2.92e-6);
  EXPECT_GE(r.emitted_photons, 31.0);
  EXPECT_LE(r.emitted_photons, 124.0);
}

TEST(Detection, WeakProbeEmissionLinearInPower) {
  PipelineConfig cfg = probe_config(17);
  auto emitted = [&](double scale) {
    BeamField probe = cfg.probe;
    probe.power *= scale;
    return run_detection(probe, DensityMatrix::pure(level_b, 4), cfg.stage_atom(true), 2.92e-6).emitted_photons;
  };
  double prev = 1e300;
  for (double scale : {1.0, 1e-2, 1e-4}) {
    const double e = emitted(scale);
    EXPECT_LT(e, prev);
    prev = e;
  }
  EXPECT_NEAR(emitted(1e-6) / emitted(1e-5), 0.1, 1e-3);
}

TEST(DetectionChain, ExactArithmetic) {
  const DetectionChain chain;
  EXPECT_NEAR(apply_detection_chain(62.0, chain), 1.644984, 1e-12);
  EXPECT_EQ(apply_detection_chain(0.0, chain), 0.0);
  for (double x : {0.3, 7.0, 123.4}) EXPECT_NEAR(apply_detection_chain(2 * x, chain), 2 * apply_detection_chain(x, chain), 1e-14);
  EXPECT_THROW(apply_detection_chain(-1.0, chain), std::invalid_argument);
}

TEST(DetectionChain, CountRateProduct) {
  DetectionChain chain;
  const AtomSpecies ba = AtomSpecies::barium138();
  EXPECT_EQ(count_rate(chain, ba, 1.0, 0.0), 0.0);
  const double full = count_rate(chain, ba, 1.0, 1.0);
  EXPECT_NEAR(full / 332943662.15753424, 1.0, 1e-12);
  chain.density *= 0.5;
  EXPECT_NEAR(count_rate(chain, ba, 1.0, 1.0), 0.5 * full, 1e-6);
  EXPECT_NEAR(efficiency_ceiling(ba), 472.5, 1e-12);
}

TEST(DetectionChain, Validation) {
  DetectionChain chain;
  EXPECT_NO_THROW(chain.validate());
  chain.detector_qe = 1.2;
  EXPECT_THROW(chain.validate(), std::invalid_argument);
}

TEST(Pipeline, NoInputMeansNoAbsorption) {
  PipelineConfig cfg = probe_config(17);
  cfg.input.power = 0.0;
  const PipelineResult r = run_pipeline(cfg);
  EXPECT_NEAR(r.transduction.absorbed_photons, 0.0, 1e-10);
  EXPECT_NEAR(r.signal_photons(), 0.0, 1e-10);
  PipelineResult none = r;
  none.transduction.absorbed_photons = 0.0;
  EXPECT_THROW(internal_efficiency(none), DivisionByZeroAbsorption);
}

TEST(Pipeline, EfficiencyBelowCeiling) {
  for (double s : {17.0, 0.17}) {
    PipelineConfig cfg = probe_config(s);
    for (double p : {1e-7, 1e-5, 1e-3}) {
      cfg.input = beam_for_interaction_time(p, 0.92e-6, cfg.atomic_beam);
      const PipelineResult r = run_pipeline(cfg);
      const double ceiling = efficiency_ceiling(cfg.atom) * cfg.chain.solid_angle * cfg.chain.loss_efficiency();
      EXPECT_GT(internal_efficiency(r), 0.0);
      EXPECT_LT(internal_efficiency(r), ceiling);
      EXPECT_TRUE(r.detection.rho_out.satisfies_invariants());
    }
  }
}

TEST(Pipeline, OutputSaturatesWithAbsorption) {
  PipelineConfig cfg = probe_config(17);
  const StageResult prep = prepare(cfg);
  const double bg = background_photons(cfg, prep);
  std::vector<double> absorbed, detected;
  for (double p : {1e-6, 3e-6, 1e-5, 3e-5, 1e-4, 3e-4, 1e-3}) {
    cfg.input = beam_for_interaction_time(p, 0.92e-6, cfg.atomic_beam);
    const PipelineResult r = run_pipeline(cfg, prep, bg);
    absorbed.push_back(r.transduction.absorbed_photons);
    detected.push_back(r.detected_photons);
  }
  for (std::size_t i = 1; i < absorbed.size(); ++i) {
    EXPECT_GT(absorbed[i], absorbed[i - 1]);
    EXPECT_GT(detected[i], detected[i - 1]);
  }
  // slope dD/dA never increases
  for (std::size_t i = 2; i < absorbed.size(); ++i) {
    const double s1 = (detected[i - 1] - detected[i - 2]) / (absorbed[i - 1] - absorbed[i - 2]);
    const double s2 = (detected[i] - detected[i - 1]) / (absorbed[i] - absorbed[i - 1]);
    EXPECT_LE(s2, s1 * (1 + 1e-9));
  }
  EXPECT_GT(absorbed.back(), 0.99);
}

TEST(Pipeline, StateDimensionFollowsSinkFlags) {
  PipelineConfig cfg;
  EXPECT_EQ(cfg.state_dim(), 4);
  cfg.sink_in_transduction = cfg.sink_in_detection = false;
  EXPECT_EQ(cfg.state_dim(), 3);
  EXPECT_FALSE(cfg.stage_atom(true).sink_enabled);
}

TEST(Pipeline, FreeFlightOnlyRelaxesExcitedState) {
  const AtomSpecies atom = AtomSpecies::barium138().with_sink(true);
  const DensityMatrix b = DensityMatrix::pure(level_b, 4);
  EXPECT_LT((free_flight(b, atom, 1e-5).matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  const DensityMatrix a = free_flight(DensityMatrix::pure(level_a, 4), atom, 1e-6);
  EXPECT_LT(a.population(level_a), 1e-12);
}
