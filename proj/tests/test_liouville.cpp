#include "transduce/liouville.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace transduce;

namespace {

Eigen::MatrixXcd random_density(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

Eigen::MatrixXcd random_hermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a + a.adjoint();
}

// Dense reference: -i[H, rho] + sum C rho C^+ - {C^+C, rho}/2
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& h, const std::vector<Eigen::MatrixXcd>& cs,
                              const Eigen::MatrixXcd& rho) {
  const cplx I(0, 1);
  Eigen::MatrixXcd out = -I * (h * rho - rho * h);
  for (const auto& c : cs) {
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
  }
  return out;
}

double max_entry_diff(const DensityMatrix& a, const DensityMatrix& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Vectorization, RoundTrip) {
  std::mt19937_64 rng(7);
  for (int n : {3, 4, 6}) {
    const Eigen::MatrixXcd h = random_hermitian(rng, n);
    EXPECT_LT((density_from_real(real_from_density(h), n) - h).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Vectorization, ExpectationWeights) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXcd op = random_hermitian(rng, 4);
    const Eigen::MatrixXcd rho = random_density(rng, 4);
    EXPECT_NEAR(expectation_weights(op).dot(real_from_density(rho)), (op * rho).trace().real(), 1e-12);
  }
}

TEST(Generator, MatchesDenseLindbladForm) {
  std::mt19937_64 rng(3);
  const int n = 4;
  const Eigen::MatrixXcd h = random_hermitian(rng, n);
  std::vector<Eigen::MatrixXcd> cs = {random_hermitian(rng, n) * cplx(0.3, 0.1), random_hermitian(rng, n)};
  std::vector<SparseC> sparse;
  for (const auto& c : cs) sparse.push_back(c.sparseView());
  const Eigen::MatrixXd gen = Eigen::MatrixXd(lindblad_generator(h.sparseView(), sparse));
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXcd rho = random_density(rng, n);
    const Eigen::MatrixXcd expect = lindblad_rhs(h, cs, rho);
    const Eigen::MatrixXcd got = density_from_real(gen * real_from_density(rho), n);
    EXPECT_LT((got - expect).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(Liouvillian, ConservesProbability) {
  const AtomSpecies ba = AtomSpecies::barium138();
  const DriveConfig drive{1e7, -3e6, 2e8, 5e7};
  for (const AtomSpecies& atom : {ba, ba.with_sink(true)}) {
    const Liouvillian l = build_liouvillian(atom, drive);
    const Eigen::RowVectorXd colsum = trace_weights(l.dim()).transpose() * l.matrix();
    EXPECT_LT(colsum.cwiseAbs().maxCoeff(), 1e-6 * l.matrix().cwiseAbs().maxCoeff());
  }
}

TEST(Liouvillian, ZeroDriveOnlyDecays) {
  const AtomSpecies ba = AtomSpecies::barium138();
  const Liouvillian l = build_liouvillian(ba, DriveConfig{});
  EXPECT_EQ(l.drive_part().cwiseAbs().maxCoeff(), 0.0);
  // ground and metastable states, and their coherence, are untouched
  for (Level lv : {level_b, level_c})
    EXPECT_EQ(l.apply(DensityMatrix::pure(lv, 3).to_real()).cwiseAbs().maxCoeff(), 0.0);

  const DensityMatrix mixed(Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(3, 3) / 3.0));
  const DensityMatrix rate = DensityMatrix::from_real(l.apply(mixed.to_real()), 3);
  EXPECT_NEAR(rate.population(level_b), ba.gamma_ab / 3, 1e-9 * ba.gamma_ab);
  EXPECT_NEAR(rate.population(level_c), ba.gamma_ac / 3, 1e-9 * ba.gamma_ab);
  EXPECT_NEAR(rate.population(level_a), -(ba.gamma_ab + ba.gamma_ac) / 3, 1e-9 * ba.gamma_ab);
}

TEST(Liouvillian, SinkDrainsThreeLevelSubspace) {
  const AtomSpecies atom = AtomSpecies::barium138().with_sink(true);
  const DriveConfig drive = DriveConfig::ab_only(atom.gamma_ab);
  const Trajectory tr = evolve(DensityMatrix::pure(level_b, 4), atom, drive, 2e-5);
  const DensityMatrix& end = tr.final_state();
  EXPECT_NEAR(end.trace(), 1.0, 1e-9);
  EXPECT_GT(end.population(level_sink), 0.1);
  const double sub = end.population(level_a) + end.population(level_b) + end.population(level_c);
  EXPECT_LT(sub, 0.9);
}

TEST(Liouvillian, RejectsSinkInThreeLevelSpace) {
  EXPECT_THROW(build_liouvillian(AtomSpecies::barium138().with_sink(true), DriveConfig{}, 3),
               std::invalid_argument);
  EXPECT_THROW(build_liouvillian(AtomSpecies::barium138(), DriveConfig{}, 5), std::invalid_argument);
}

TEST(Evolve, GroundStateIsStationary) {
  const Trajectory tr = evolve(DensityMatrix::pure(level_b, 3), AtomSpecies::barium138(), DriveConfig{}, 1e-3);
  EXPECT_LT(max_entry_diff(tr.final_state(), DensityMatrix::pure(level_b, 3)), 1e-15);
}

TEST(Evolve, ZeroDurationReturnsInput) {
  std::mt19937_64 rng(5);
  const DensityMatrix rho(random_density(rng, 3));
  const Trajectory tr = evolve(rho, AtomSpecies::barium138(), DriveConfig::ab_only(1e8), 0.0);
  EXPECT_EQ(max_entry_diff(tr.final_state(), rho), 0.0);
}

TEST(Evolve, BranchingRatio) {
  const AtomSpecies ba = AtomSpecies::barium138();
  const Trajectory tr = evolve(DensityMatrix::pure(level_a, 3), ba, DriveConfig{}, 100.0 / ba.gamma_ab);
  EXPECT_NEAR(tr.final_state().population(level_b), 0.9978880675818373, 1e-9);
  EXPECT_NEAR(tr.final_state().population(level_c), 1 - 0.9978880675818373, 1e-9);
}

TEST(Evolve, MetastableDriveMatchesOracle) {
  const AtomSpecies ba = AtomSpecies::barium138();
  const DriveConfig drive = DriveConfig::ac_only(ba.gamma_ac);
  const double t = 10.0 / ba.gamma_ac;
  const DensityMatrix rho0 = DensityMatrix::pure(level_c, 3);
  EXPECT_LT(max_entry_diff(evolve(rho0, ba, drive, t).final_state(), expm_oracle(rho0, ba, drive, t)), 1e-8);
}

TEST(Evolve, RandomCasesMatchOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const AtomSpecies ba = AtomSpecies::barium138();
  for (int trial = 0; trial < 25; ++trial) {
    const bool sink = trial % 2;
    const AtomSpecies atom = ba.with_sink(sink);
    const DensityMatrix rho0(random_density(rng, atom.level_count()));
    const double g = ba.gamma_ab;
    const DriveConfig drive{(u(rng) - 0.5) * 4 * g, (u(rng) - 0.5) * 4 * g, u(rng) * 5 * g, u(rng) * 5 * g};
    const double t = 5.0 / g;
    EXPECT_LT(max_entry_diff(evolve(rho0, atom, drive, t).final_state(), expm_oracle(rho0, atom, drive, t)), 1e-8);
  }
}

TEST(Evolve, TrajectoryInvariants) {
  std::mt19937_64 rng(99);
  const AtomSpecies atom = AtomSpecies::barium138().with_sink(true);
  const DensityMatrix rho0(random_density(rng, 4));
  const double g = atom.gamma_ab;
  EvolveOptions eo;
  eo.samples = 301;
  const Trajectory tr = evolve(rho0, atom, DriveConfig{0.3 * g, -0.2 * g, 3 * g, 1.5 * g}, 200 / g, eo);
  ASSERT_EQ(tr.times.size(), 301u);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    EXPECT_TRUE(tr.states[i].satisfies_invariants()) << "sample " << i;
    if (i) {
      EXPECT_GT(tr.times[i], tr.times[i - 1]);
    }
  }
}

TEST(Oracle, IdentityAtZeroTime) {
  std::mt19937_64 rng(1);
  const DensityMatrix rho(random_density(rng, 3));
  EXPECT_EQ(max_entry_diff(expm_oracle(rho, AtomSpecies::barium138(), DriveConfig::ab_only(1e8), 0.0), rho), 0.0);
}

TEST(Oracle, ScalarDecay) {
  const AtomSpecies ba = AtomSpecies::barium138();
  for (double gt : {0.1, 1.0, 3.0}) {
    const double t = gt / ba.gamma_ab;
    const DensityMatrix r = expm_oracle(DensityMatrix::pure(level_a, 3), ba, DriveConfig{}, t);
    EXPECT_NEAR(r.population(level_a), std::exp(-(ba.gamma_ab + ba.gamma_ac) * t), 1e-13);
  }
}

TEST(SteadyState, PumpingEndsInMetastableState) {
  const AtomSpecies ba = AtomSpecies::barium138();
  const SteadyState ss = steady_state_of(build_liouvillian(ba, DriveConfig::ab_only(ba.gamma_ab)));
  EXPECT_NEAR(ss.rho.population(level_c), 1.0, 1e-10);
  EXPECT_LT(ss.residual, 1e-10);
}

TEST(SteadyState, InputDriveEndsInGroundState) {
  const AtomSpecies ba = AtomSpecies::barium138();
  const DensityMatrix rho = steady_state(ba, DriveConfig::ac_only(ba.gamma_ac));
  EXPECT_NEAR(rho.population(level_b), 1.0, 1e-10);
}

TEST(SteadyState, UndrivenKernelIsDegenerate) {
  EXPECT_THROW(steady_state(AtomSpecies::barium138(), DriveConfig{}), DegenerateKernel);
}

TEST(Evolve, TwoLevelSaturationLimit) {
  AtomSpecies two;
  two.lambda_ab = 553e-9;
  two.lambda_ac = 1.5e-6;
  two.gamma_ab = 1.0;
  two.gamma_ac = 0.0;
  for (double w : {0.3, 1.0, 4.0}) {
    const DensityMatrix r = evolve(DensityMatrix::pure(level_b, 3), two, DriveConfig::ab_only(w), 60.0).final_state();
    const double expect = (w * w / 4) / (0.25 + w * w / 2);
    EXPECT_NEAR(r.population(level_a), expect, 1e-6) << "rabi " << w;
  }
}

TEST(Evolve, DarkStatePumpingRate) {
  const AtomSpecies atom = AtomSpecies::unit_lambda(330.0);
  const double w = 4.0;
  const double rho_aa = (w * w / 4) / (0.25 + w * w / 2);
  EvolveOptions eo;
  eo.samples = 6;
  const Trajectory tr = evolve(DensityMatrix::pure(level_b, 3), atom, DriveConfig::ab_only(w), 500.0, eo);
  for (std::size_t i = 1; i < tr.times.size(); ++i) {
    const double t = tr.times[i];
    const double expect = 1 - std::exp(-rho_aa * atom.gamma_ac * t);
    EXPECT_NEAR(tr.states[i].population(level_c) / expect, 1.0, 0.02) << "t " << t;
  }
}

TEST(Evolve, GaussianEnvelopeKeepsFluence) {
  const DriveEnvelope env = DriveEnvelope::over(1.0);
  const double k = DriveEnvelope::peak_scale();
  double fluence = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = k * env((i + 0.5) / n);
    fluence += v * v / n;
  }
  // equal to the top-hat fluence up to the tails cut at +-2 sigma
  EXPECT_NEAR(fluence, std::erf(2.0), 1e-6);
}

TEST(Integrator, ExponentialDecayAndHermiteQuadrature) {
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  double area = 0.0;
  auto rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = -y; };
  const Eigen::VectorXd y = integrate(rhs, y0, 0.0, 5.0, Tolerance{1e-10, 1e-14},
                                      [&](const StepRecord& r) { area += r.integral()(0); });
  EXPECT_NEAR(y(0), std::exp(-5.0), 1e-9);
  EXPECT_NEAR(area, 1 - std::exp(-5.0), 1e-8);
}

TEST(Integrator, ObserverCanStopEarly) {
  Eigen::VectorXd y0(1);
  y0 << 0.0;
  double t_stop = 0.0;
  auto rhs = [](double, const Eigen::VectorXd&, Eigen::VectorXd& dy) { dy = Eigen::VectorXd::Ones(1); };
  integrate(rhs, y0, 0.0, 10.0, Tolerance{}, [](const StepRecord& r) { return r.y1(0) < 1.0; }, nullptr, &t_stop);
  EXPECT_GE(t_stop, 1.0);
  EXPECT_LT(t_stop, 10.0);
}

TEST(Integrator, BlowUpThrowsStepSizeUnderflow) {
  Eigen::VectorXd y0(1);
  y0 << 1.0;
  auto rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = y.cwiseProduct(y); };
  EXPECT_THROW(integrate(rhs, y0, 0.0, 2.0, Tolerance{}), StepSizeUnderflow);
}

TEST(DensityMatrix, EmbeddingAndInvariants) {
  const DensityMatrix b = DensityMatrix::pure(level_b, 3);
  const DensityMatrix b4 = b.with_dim(4);
  EXPECT_EQ(b4.dim(), 4);
  EXPECT_EQ(b4.population(level_b), 1.0);
  EXPECT_EQ(b.population(level_sink), 0.0);
  EXPECT_TRUE(b4.satisfies_invariants());
  EXPECT_THROW(b4.with_dim(3), std::invalid_argument);
  EXPECT_THROW(DensityMatrix::pure(level_sink, 3), std::invalid_argument);
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(3, 3);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_FALSE(DensityMatrix(bad).satisfies_invariants());
}
