#include "bloch2q/purity_analysis.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

namespace {

using namespace bloch2q;

std::vector<Mat4c> lifted(const std::vector<Mat2c>& jumps) {
  std::vector<Mat4c> out;
  for (const auto& l : jumps) out.push_back(oracle::kron(l, oracle::id2()));
  return out;
}

WVector oracle_w(const TwoQubitModel& m, const FactorizedState& s, const Vec3& u) {
  return oracle::w_vector(m.hamiltonian(u), lifted(m.jumps_on_A), s.vA(), s.vB());
}

TEST(FactorizedStateTest, EnforcesConstraints) {
  EXPECT_THROW(FactorizedState(Vec3(0.6, 0, 0), Vec3(0, 0, 0.5)), std::invalid_argument);
  EXPECT_THROW(FactorizedState(Vec3::Zero(), Vec3(0, 0, 0.4)), std::invalid_argument);
  const FactorizedState s(Vec3(0.1, 0, 0), Vec3(0, 0.5, 0));
  EXPECT_NEAR(factorization_residual(s.embed()), 0.0, 1e-16);
  EXPECT_NEAR(reduced_purity_B(s.embed()), 1.0, 1e-15);
}

TEST(ComputeW, MatchesLiouvillianOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uu(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    TwoQubitModel m;
    m.omega_a = uu(rng);
    m.omega_b = uu(rng);
    for (int i = 0; i < 9; ++i) m.lambda(i / 3, i % 3) = uu(rng);
    for (int j = 0; j < k % 3; ++j) m.jumps_on_A.push_back(oracle::ginibre(rng, 2, 2));
    const FactorizedState s = random_factorized_state(rng);
    const Vec3 u(uu(rng), uu(rng), uu(rng));
    EXPECT_LT((compute_w(m, s, u) - oracle_w(m, s, u)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ComputeW, VanishesWithoutInteraction) {
  std::mt19937_64 rng(2);
  TwoQubitModel m;
  m.omega_a = 0.3;
  m.omega_b = -1.1;
  m.jumps_on_A = {sigma_minus(), oracle::ginibre(rng, 2, 2)};
  for (int k = 0; k < 20; ++k)
    EXPECT_LT(compute_w(m, random_factorized_state(rng), Vec3(1, -2, 0.5)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ComputeW, DispersiveExamples) {
  const double g = 1.7;
  const TwoQubitModel m = make_model({Coupling::dispersive, g}, 0.4, 0.2, {sigma_minus()});
  EXPECT_LT(compute_w(m, FactorizedState({0, 0, 0.5}, {0, 0, 0.5}), Vec3(1, 2, 3)).cwiseAbs().maxCoeff(), 1e-14);
  // |w3| = g * vA2 * (1 - 4 vB3^2) = g / 4; the sign from the Liouvillian is negative.
  const WVector w = compute_w(m, FactorizedState({0, 0.25, 0}, {0.5, 0, 0}), Vec3::Zero());
  EXPECT_NEAR(w[2], -g / 4.0, 1e-14);
  EXPECT_NEAR(oracle_w(m, FactorizedState({0, 0.25, 0}, {0.5, 0, 0}), Vec3::Zero())[2], -g / 4.0, 1e-14);
}

TEST(ClosedFormW, MatchesComputeW) {
  std::mt19937_64 rng(3);
  for (Coupling c : {Coupling::dispersive, Coupling::resonant}) {
    const CouplingCase cc{c, 0.8};
    const TwoQubitModel m = make_model(cc, 1.0, 0.5, {0.3 * sigma_minus()});
    for (int k = 0; k < 200; ++k) {
      const FactorizedState s = random_factorized_state(rng);
      EXPECT_LT((closed_form_w(cc, s) - compute_w(m, s, Vec3::Zero())).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
  EXPECT_THROW(closed_form_w({Coupling::sigma3_sigma1, 1.0}, FactorizedState({0, 0, 0}, {0, 0, 0.5})),
               std::invalid_argument);
}

TEST(ClosedFormW, SpecialConfigurations) {
  const CouplingCase res{Coupling::resonant, 1.0};
  EXPECT_LT(closed_form_w(res, FactorizedState({0, 0, 0.5}, {0, 0, 0.5})).cwiseAbs().maxCoeff(), 1e-15);
  const CouplingCase disp{Coupling::dispersive, 1.0};
  for (double a3 : {-0.5, 0.5})
    for (double b3 : {-0.5, 0.5}) {
      const WVector w = closed_form_w(disp, FactorizedState({0, 0, a3}, {0, 0, b3}));
      EXPECT_EQ(w[2], 0.0);
      EXPECT_EQ(w[7], 0.0);
    }
}

TEST(ComputeW, IndependentOfLocalTermsAndDissipation) {
  std::mt19937_64 rng(4);
  Mat3 lambda;
  for (int i = 0; i < 9; ++i) lambda(i / 3, i % 3) = std::uniform_real_distribution<double>(-1, 1)(rng);
  TwoQubitModel a;
  a.lambda = lambda;
  for (int k = 0; k < 20; ++k) {
    TwoQubitModel b = a;
    b.omega_a = 1.5;
    b.omega_b = -0.7;
    b.jumps_on_A = {oracle::ginibre(rng, 2, 2), oracle::ginibre(rng, 2, 2)};
    const FactorizedState s = random_factorized_state(rng);
    EXPECT_LT((compute_w(a, s, Vec3::Zero()) - compute_w(b, s, Vec3(0.4, -1, 2))).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Dispersive, StructuralZeros) {
  const TwoQubitModel m = make_model({Coupling::dispersive, 1.0}, 0.7, 0.3, {sigma_minus(), 0.2 * sigma_plus()});
  const StructuralCheck sc = dispersive_structure(m);
  EXPECT_TRUE(sc.ok);
  EXPECT_EQ(sc.max_leak, 0.0);
  // A resonant term couples z2 to the rest.
  TwoQubitModel leaky = m;
  leaky.lambda(0, 0) = 0.1;
  EXPECT_FALSE(dispersive_structure(leaky).ok);
  const auto& z2 = dispersive_z2_indices();
  EXPECT_EQ(std::vector<int>(z2.begin(), z2.end()), (std::vector<int>{4, 5, 7, 8, 10, 11, 13, 14}));
}

TEST(Dispersive, InvariantOverShortRuns) {
  std::mt19937_64 rng(5);
  const TwoQubitModel m = make_model({Coupling::dispersive, 1.0}, 1.0, 0.5, {0.5 * sigma_minus()});
  std::vector<BlochVector> starts;
  for (int k = 0; k < 4; ++k)
    starts.push_back(BlochVector::product(oracle::random_in_ball(rng, 0.5), Vec3(0, 0, k % 2 ? 0.5 : -0.5)));
  const std::vector<ControlLaw> laws = {random_piecewise_constant(1, 5.0, 5, 1.0), random_piecewise_constant(2, 5.0, 5, 1.0)};
  const InvariantCheckReport r = dispersive_invariant_check(m, starts, laws, 5.0, 1e-3);
  EXPECT_TRUE(r.ok) << to_json(r).dump();
  EXPECT_EQ(r.runs, 8u);
  EXPECT_LE(r.max_z2, 1e-8);
  EXPECT_LE(r.max_vB3_deviation, 1e-8);
}

TEST(Dispersive, InvariantCheckRejectsBadInput) {
  const TwoQubitModel m = make_model({Coupling::dispersive, 1.0}, 1.0, 0.5);
  const std::vector<ControlLaw> laws = {ControlLaw::constant(Vec3::Zero())};
  const std::vector<BlochVector> off_pole = {BlochVector::product(Vec3::Zero(), Vec3(0.5, 0, 0))};
  EXPECT_THROW(dispersive_invariant_check(m, off_pole, laws, 1.0, 1e-3), std::invalid_argument);
  const std::vector<BlochVector> ok = {BlochVector::product(Vec3::Zero(), Vec3(0, 0, 0.5))};
  EXPECT_THROW(dispersive_invariant_check(make_model({Coupling::resonant, 1.0}, 1, 1), ok, laws, 1.0, 1e-3),
               std::invalid_argument);
}

TEST(Compatibility, KnownDissipations) {
  const TwoQubitModel damp = make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5, {sigma_minus()});
  EXPECT_TRUE(compatibility_condition(damp, -0.5).compatible);
  EXPECT_LE(compatibility_condition(damp, -0.5).residual, 1e-12);
  EXPECT_FALSE(compatibility_condition(damp, 0.5).compatible);
  const TwoQubitModel closed = make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5);
  EXPECT_TRUE(compatibility_condition(closed, 0.5).compatible);
  EXPECT_TRUE(compatibility_condition(closed, -0.5).compatible);
  const TwoQubitModel dephase =
      make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5, {pauli(Pauli::sigma3) / std::sqrt(2.0)});
  EXPECT_TRUE(compatibility_condition(dephase, 0.5).compatible);
  EXPECT_TRUE(compatibility_condition(dephase, -0.5).compatible);
}

TEST(ProtectingControl, ZeroWithoutDissipation) {
  const TwoQubitModel m = make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5);
  const Vec2 u = protecting_control_sigma31(m, FactorizedState({0, 0, 0.5}, {0.3, 0.4, 0}));
  EXPECT_LT(u.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProtectingControl, ClosedFormWithDefaultControls) {
  std::mt19937_64 rng(6);
  // c (sigma_minus + kappa sigma3) is compatible with vA3 = -1/2 and needs a nonzero control.
  const Mat2c l = 0.3 * (sigma_minus() + 0.5 * pauli(Pauli::sigma3));
  const TwoQubitModel m = make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5, {l});
  const LocalDissipator d = local_dissipator(m.jumps_on_A);
  const double a = -0.5;
  ASSERT_TRUE(compatibility_condition(m, a).compatible);
  const Vec2 u = protecting_control_sigma31(m, FactorizedState({0, 0, a}, oracle::random_on_sphere(rng, 0.5)));
  EXPECT_NEAR(u[0], (d.v0[1] + 2 * a * d.d_hat(1, 2)) / (4 * a), 1e-14);
  EXPECT_NEAR(u[1], -(d.v0[0] + 2 * a * d.d_hat(0, 2)) / (4 * a), 1e-14);
  EXPECT_GT(u.norm(), 1e-3);
  // The A block of the velocity vanishes with this control.
  const FactorizedState s({0, 0, a}, {0, 0.5, 0});
  EXPECT_LT(velocity(m, s.embed(), Vec3(u[0], u[1], 0)).segment<3>(kIndexA).norm(), 1e-14);
}

TEST(ProtectingControl, RejectsIncompatibleOrMalformed) {
  const TwoQubitModel m = make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5, {sigma_minus()});
  EXPECT_THROW(protecting_control_sigma31(m, FactorizedState({0, 0, 0.5}, {0, 0, 0.5})), IncompatibleDissipation);
  EXPECT_THROW(protecting_control_sigma31(m, FactorizedState({0.1, 0, 0.4}, {0, 0, 0.5})), std::invalid_argument);
  EXPECT_THROW(protecting_control_sigma31(make_model({Coupling::dispersive, 1.0}, 1, 1),
                                          FactorizedState({0, 0, 0.5}, {0, 0, 0.5})),
               std::invalid_argument);
  const ControlLaw law = protecting_feedback_law(m);
  EXPECT_THROW(law.evaluate(0.0, BlochVector::product({0, 0, 0.5}, {0, 0, 0.5})), IncompatibleDissipation);
}

TEST(ReducedB, GeneratorForms) {
  const auto& t = t_matrices();
  EXPECT_TRUE(reduced_B_generator({Coupling::dispersive, 0.0}, 0.8, 0.5).isApprox(1.6 * t[2]));
  const Mat3 r = reduced_B_generator({Coupling::dispersive, 1.0}, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(r(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(r(0, 1), -3.0);
  const Mat3 s = reduced_B_generator({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(s(2, 1), 1.0);
  EXPECT_DOUBLE_EQ(s(1, 0), 2.0);
  EXPECT_TRUE((s + s.transpose()).isZero());
  EXPECT_THROW(reduced_B_generator({Coupling::resonant, 1.0}, 1.0, 0.5), std::invalid_argument);
}

TEST(ReducedB, MatchesRestrictedGenerator) {
  for (Coupling c : {Coupling::dispersive, Coupling::sigma3_sigma1})
    for (double a3 : {-0.5, 0.5}) {
      const CouplingCase cc{c, 1.3};
      const TwoQubitModel m = make_model(cc, 0.9, 0.6, {sigma_minus()});
      EXPECT_LT((reduced_B_generator(cc, m.omega_b, a3) - restricted_B_generator(m, {0, 0, a3})).cwiseAbs().maxCoeff(),
                1e-12);
    }
}

TEST(Sigma31, FirstBranchIsRejectedOnlyWithFreeRotation) {
  std::vector<Vec3> controls, states;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      for (int k = -2; k <= 2; ++k) {
        controls.emplace_back(i, j, k);
        if (i * i + j * j + k * k <= 4) states.emplace_back(Vec3(i, j, k) / 4.0);
      }
  const TwoQubitModel m = make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.5, {sigma_minus()});
  for (double sign : {-1.0, 1.0}) EXPECT_NEAR(sigma31_branch_rejection(m, sign, controls, states).min_rate, 0.5, 1e-12);
  const TwoQubitModel still = make_model({Coupling::sigma3_sigma1, 1.0}, 1.0, 0.0, {sigma_minus()});
  EXPECT_LT(sigma31_branch_rejection(still, 1.0, controls, states).min_rate, 1e-12);
}

TEST(Stationary, SolutionSets) {
  const TwoQubitModel damp = make_model({Coupling::resonant, 1.0}, 1.0, 0.5, {sigma_minus()});
  const StationarySolutions s = stationary_A_solutions(damp);
  EXPECT_EQ(s.kind, SolutionSet::point);
  EXPECT_TRUE(s.particular.isApprox(Vec3(0, 0, -0.5)));
  EXPECT_TRUE(s.reaches_pure);
  const StationarySolutions closed = stationary_A_solutions(make_model({Coupling::resonant, 1.0}, 1.0, 0.5));
  EXPECT_EQ(closed.kind, SolutionSet::space);
  EXPECT_TRUE(closed.reaches_pure);
  const StationarySolutions deph =
      stationary_A_solutions(make_model({Coupling::resonant, 1.0}, 1.0, 0.5, {pauli(Pauli::sigma3)}));
  EXPECT_EQ(deph.kind, SolutionSet::line);
  EXPECT_EQ(deph.directions.size(), 1u);
  EXPECT_EQ(to_string(SolutionSet::plane), "plane");
}

TEST(Resonant, CoarseSweepFindsOnlyPureA) {
  SweepOptions opt;
  opt.grid_step = 0.125;
  opt.random_samples = 500;
  opt.branch_samples = 20;
  const ResonantObstructionReport r =
      resonant_obstruction_check(make_model({Coupling::resonant, 1.0}, 1.0, 0.5, {0.1 * sigma_minus()}), opt);
  EXPECT_TRUE(r.sweep.ok);
  EXPECT_GT(r.sweep.zero_points, 20u);
  EXPECT_LE(r.sweep.worst_vA_deficit, 1e-6);
  ASSERT_TRUE(r.sweep.min_w_mixed.has_value());
  EXPECT_GT(r.sweep.min_w_mixed->w_norm, 1e-9);
  const auto j = to_json(r);
  EXPECT_TRUE(j["sweep"]["ok"].get<bool>());
  EXPECT_THROW(resonant_obstruction_check(make_model({Coupling::dispersive, 1.0}, 1, 1)), std::invalid_argument);
}

}  // namespace
