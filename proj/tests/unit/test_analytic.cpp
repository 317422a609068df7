// Copyright 2026 The pnpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pnpe/analytic.hpp"
#include "pnpe/fock.hpp"
#include "pnpe/nelder_mead.hpp"
#include "pnpe/reference_optima.hpp"

using namespace pnpe;
using namespace pnpe::analytic;
using pnpe::opt::Rng;

namespace {

SourceParams random_source(Rng& rng) {
  SourceParams s = SourceParams::from_gain(rng.uniform(0.01, 0.5), rng.uniform(0.01, 0.99));
  s.phi_a = rng.uniform(0, 2 * std::numbers::pi);
  s.phi_b = rng.uniform(0, 2 * std::numbers::pi);
  return s;
}

cplx random_amp(Rng& rng, double r = 1.0) { return std::polar(rng.uniform(0, r), rng.uniform(0, 2 * std::numbers::pi)); }

}  // namespace

TEST(Sources, GainAndLambda) {
  EXPECT_NEAR(SourceParams::from_gain(0.3, 0.5).lambda(), 0.291312612451590906, 1e-16);
  EXPECT_NEAR(SourceParams::from_gain(0.33, 0.5).lambda(), 0.318520776902770842, 1e-16);
  EXPECT_NEAR(SourceParams::from_lambda(0.25, 0.5).lambda(), 0.25, 1e-15);
  EXPECT_THROW(SourceParams::from_gain(-0.1, 0.5), std::invalid_argument);
  EXPECT_THROW(SourceParams::from_gain(0.1, 1.5), std::invalid_argument);
  EXPECT_THROW(SourceParams::from_lambda(1.0, 0.5), std::invalid_argument);
}

TEST(Sources, BobPreparationProbability) {
  EXPECT_NEAR(bob_prep_probability(std::tanh(0.33), 0.9), 0.0828993436447833529, 1e-15);
  EXPECT_EQ(bob_prep_probability(0.0, 1.0), 0.0);
  EXPECT_THROW(bob_prep_probability(0.3, 1.1), std::invalid_argument);
}

TEST(Sources, FixedRatioRetune) {
  auto s = SourceParams::from_gain(0.3, 0.28);
  auto r = with_lambda_at_fixed_ratio(s, s.lambda() / 20);
  EXPECT_NEAR(r.lambda(), s.lambda() / 20, 1e-15);
  const double q0 = s.lambda() * std::sqrt((1 - s.t_b) / s.t_b);
  const double q1 = r.lambda() * std::sqrt((1 - r.t_b) / r.t_b);
  EXPECT_NEAR(q0, q1, 1e-13);
  // Same ideal state, so same CHSH value at unit heralding efficiency.
  const auto set = reference::kTableRows[9].settings();
  EXPECT_NEAR(chsh(s, 0.9, set).S, chsh(r, 0.9, set).S, 1e-12);
}

TEST(LossModel, ChannelParametrisation) {
  auto p = LossParams::from_channel(0.2, 50.0, 0.9, 0.95);
  EXPECT_NEAR(p.eta_C, 0.1, 1e-15);
  EXPECT_NEAR(p.eta_H, 0.9 * std::sqrt(0.1), 1e-15);
  EXPECT_EQ(p.eta_a2, p.eta_H);
  EXPECT_EQ(p.eta_b2, p.eta_H);
  auto t = LossParams::from_transmittance(0.01, 1.0, 1.0);
  EXPECT_NEAR(t.eta_H, 0.1, 1e-15);
  EXPECT_THROW(LossParams::symmetric(1.2, 0.9), std::invalid_argument);
  EXPECT_THROW(LossParams::from_channel(-0.2, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(HeraldedState, IdealBranchesAtBalancedSplit) {
  const double a0 = 0.8, a1 = 0.6, b0 = std::sqrt(0.3), b1 = std::sqrt(0.7);
  auto plus = ideal_heralded_state(a0, a1, b0, b1, 0.5, HeraldSign::Plus);
  auto minus = ideal_heralded_state(a0, a1, b0, b1, 0.5, HeraldSign::Minus);
  EXPECT_NEAR(plus.matrix(0, 0).real(), a0 * a0 * b0 * b0 / 2, 1e-15);
  EXPECT_NEAR(plus.matrix(3, 3).real(), a1 * a1 * b1 * b1 / 2, 1e-15);
  EXPECT_NEAR(plus.matrix(3, 0).real(), a0 * a1 * b0 * b1 / 2, 1e-15);
  EXPECT_NEAR(minus.matrix(3, 0).real(), -a0 * a1 * b0 * b1 / 2, 1e-15);
  EXPECT_NEAR(plus.trace() + minus.trace(), a0 * a0 * b0 * b0 + a1 * a1 * b1 * b1, 1e-15);
  EXPECT_THROW(ideal_heralded_state(1.0, 0.1, 1.0, 0.0, 0.5, HeraldSign::Plus), std::invalid_argument);
}

TEST(HeraldedState, GeneralMatchesIdealWithoutLoss) {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_source(rng);
    s.phi_a = s.phi_b = 0.0;
    s.t_c = rng.uniform(0.05, 0.95);
    const double l = s.lambda();
    const double a0 = 1 / std::sqrt(1 + l * l), a1 = l / std::sqrt(1 + l * l);
    for (auto sign : {HeraldSign::Plus, HeraldSign::Minus}) {
      auto ideal = ideal_heralded_state(a0, a1, std::sqrt(s.t_b), std::sqrt(1 - s.t_b), s.t_c, sign).normalize();
      auto gen = heralded_state_general(s, 1.0, 1.0, sign);
      EXPECT_LE((ideal.matrix - gen.matrix).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(HeraldedState, PhaseEntersCoherence) {
  auto s = SourceParams::from_gain(0.3, 0.4);
  s.phi_a = 0.7;
  s.phi_b = 0.4;
  auto r = heralded_state_general(s, 0.8, 0.8, HeraldSign::Plus);
  EXPECT_NEAR(std::arg(r.matrix(3, 0)), 1.1, 1e-14);
  auto m = heralded_state_general(s, 0.8, 0.8, HeraldSign::Minus);
  EXPECT_NEAR(std::abs(std::arg(m.matrix(3, 0)) - 1.1), std::numbers::pi, 1e-14);
}

TEST(HeraldedState, IsPhysical) {
  Rng rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = random_source(rng);
    s.t_c = rng.uniform(0.05, 0.95);
    auto r = heralded_state_general(s, rng.uniform(0.01, 1), rng.uniform(0.01, 1),
                                    trial % 2 ? HeraldSign::Plus : HeraldSign::Minus);
    EXPECT_NEAR(r.trace(), 1.0, 1e-12);
    EXPECT_LE(r.hermiticity_error(), 1e-14);
    EXPECT_GE(r.min_eigenvalue(), -1e-12);
  }
}

TEST(HeraldedState, NoiseCoefficient) {
  Rng rng(107);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_source(rng);
    const double eta = rng.uniform(0.05, 1.0);
    auto r = heralded_state_general(s, eta, eta, HeraldSign::Plus);
    const double ratio = r.matrix(2, 2).real() / r.matrix(0, 0).real() * s.t_b;
    EXPECT_NEAR(ratio, epsilon_noise(s.lambda(), s.t_b, eta), 1e-13);
  }
  EXPECT_EQ(epsilon_noise(0.3, 0.5, 1.0), 0.0);
}

TEST(Povm, MatchesDisplacedLossyVacuumProjector) {
  // D(-a)^dag (1-eta)^N D(-a) at a large cutoff, restricted to {|0>,|1>}.
  Rng rng(109);
  for (int trial = 0; trial < 10; ++trial) {
    const cplx a = random_amp(rng, 0.8);
    const double eta = rng.uniform(0.3, 1.0);
    const std::size_t c = 40;
    fock::Matrix D = fock::displacement_matrix(-a, c);
    fock::Matrix N = fock::Matrix::Zero(c + 1, c + 1);
    for (std::size_t n = 0; n <= c; ++n) N(n, n) = std::pow(1 - eta, static_cast<double>(n));
    fock::Matrix full = D.adjoint() * N * D;
    const Matrix2 p = noclick_povm(a, eta);
    EXPECT_LE((full.topLeftCorner(2, 2) - p).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(QFunctions, ClosedFormMatchesPovmTrace) {
  Rng rng(113);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_source(rng);
    const double eta = rng.uniform(0.3, 1.0);
    const cplx a = random_amp(rng), b = random_amp(rng);
    const auto sign = trial % 2 ? HeraldSign::Plus : HeraldSign::Minus;
    auto rho = heralded_state_general(s, 1.0, 1.0, sign);
    const auto q = q_functions(rho, eta, a, b);
    EXPECT_NEAR(q_joint(s, eta, a, b, sign), q.ab, 1e-12);
    EXPECT_NEAR(q_marginal_a(s, eta, a, sign), q.a, 1e-12);
    EXPECT_NEAR(q_marginal_b(s, eta, b, sign), q.b, 1e-12);
  }
}

TEST(QFunctions, ProbabilityConsistency) {
  Rng rng(127);
  for (int trial = 0; trial < 1000; ++trial) {
    auto s = random_source(rng);
    const double eta = rng.uniform(0.0, 1.0);
    const cplx a = random_amp(rng, 2.0), b = random_amp(rng, 2.0);
    const double qab = q_joint(s, eta, a, b), qa = q_marginal_a(s, eta, a), qb = q_marginal_b(s, eta, b);
    EXPECT_GE(qab, -1e-12);
    EXPECT_LE(qab, std::min(qa, qb) + 1e-12);
    EXPECT_GE(qab, qa + qb - 1 - 1e-12);
    EXPECT_LE(std::max(qa, qb), 1 + 1e-12);
  }
}

TEST(Chsh, CorrelationCoefficient) {
  EXPECT_EQ(correlation_coefficient(1.0, 1.0, 1.0), 1.0);
  EXPECT_EQ(correlation_coefficient(0.0, 0.0, 0.0), 1.0);
  EXPECT_EQ(correlation_coefficient(0.0, 1.0, 0.0), -1.0);
  EXPECT_NEAR(correlation_coefficient(0.25, 0.5, 0.5), 0.0, 1e-15);
  EXPECT_THROW(correlation_coefficient(0.6, 0.5, 0.9), std::invalid_argument);
  EXPECT_THROW(correlation_coefficient(0.1, 0.6, 0.6), std::invalid_argument);
  EXPECT_THROW(correlation_coefficient(-0.1, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(correlation_coefficient(0.2, 1.2, 0.3), std::invalid_argument);
}

TEST(Chsh, ChFromChsh) {
  EXPECT_NEAR(ch_from_chsh(2.685871), 0.17146775, 1e-12);
  EXPECT_EQ(ch_from_chsh(2.0), 0.0);
}

TEST(Chsh, ReferenceRowsWithinTolerance) {
  for (const auto& row : reference::kTableRows) {
    const double S = chsh(row.source(), row.eta_D, row.settings()).S;
    EXPECT_NEAR(S, row.S, 1e-3) << "eta_D=" << row.eta_D;
  }
}

TEST(Chsh, StateAndClosedFormAgree) {
  for (const auto& row : reference::kTableRows) {
    auto rho = heralded_state_general(row.source(), 1.0, 1.0, HeraldSign::Plus);
    EXPECT_NEAR(chsh(rho, row.eta_D, row.settings()).S, chsh(row.source(), row.eta_D, row.settings()).S, 1e-12);
  }
}

TEST(Chsh, SymmetriesOfTheSettings) {
  Rng rng(131);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_source(rng);
    const double eta = rng.uniform(0.5, 1.0);
    MeasurementSettings set{random_amp(rng), random_amp(rng), random_amp(rng), random_amp(rng)};
    const double S = chsh(s, eta, set).S;
    EXPECT_NEAR(chsh(s, eta, set.negated()).S, S, 1e-12);
    // The '-' branch is the '+' branch with the phase advanced by pi.
    auto shifted = s;
    shifted.phi_a += std::numbers::pi;
    EXPECT_NEAR(chsh(shifted, eta, set, HeraldSign::Minus).S, S, 1e-12);
  }
}

TEST(Chsh, TsirelsonBound) {
  Rng rng(137);
  for (int trial = 0; trial < 20000; ++trial) {
    auto s = random_source(rng);
    const double eta = rng.uniform(0.0, 1.0);
    MeasurementSettings set{random_amp(rng, 2), random_amp(rng, 2), random_amp(rng, 2), random_amp(rng, 2)};
    const auto r = chsh(s, eta, set);
    ASSERT_LE(std::abs(r.S), kTsirelson + 1e-9);
    for (double e : r.E) ASSERT_LE(std::abs(e), 1 + 1e-9);
  }
}

TEST(Chsh, RejectsOversizedSettings) {
  EXPECT_THROW(MeasurementSettings::from_signed(2.5, 0, 0, 0), std::invalid_argument);
  EXPECT_THROW(MeasurementSettings::from_signed(NAN, 0, 0, 0), std::invalid_argument);
}

TEST(Entanglement, ClosedFormLogNegativity) {
  EXPECT_NEAR(log_negativity(std::tanh(0.3), 0.28), 0.821238159985814443, 1e-14);
  EXPECT_EQ(log_negativity(0.0, 0.5), 0.0);
  EXPECT_EQ(log_negativity(0.3, 1.0), 0.0);
  EXPECT_EQ(log_negativity(0.3, 0.0), 0.0);
  EXPECT_THROW(log_negativity(0.0, 0.0), std::domain_error);
}

TEST(Entanglement, ClosedFormMatchesPartialTranspose) {
  Rng rng(139);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_source(rng);
    auto rho = heralded_state_general(s, 1.0, 1.0, HeraldSign::Plus);
    EXPECT_NEAR(log_negativity(rho), log_negativity(s.lambda(), s.t_b), 1e-12);
    EXPECT_GE(log_negativity(s.lambda(), s.t_b), 0.0);
    EXPECT_LE(log_negativity(s.lambda(), s.t_b), 1.0 + 1e-12);
  }
}

TEST(Entanglement, MaximalAtBalancedWeights) {
  // Equal |00> and |11> weights: t_b = lambda^2 (1 - t_b).
  const double l = 0.3;
  const double tb = l * l / (1 + l * l);
  EXPECT_NEAR(log_negativity(l, tb), 1.0, 1e-14);
}

TEST(Families, CorrelatedMatchesPovmTrace) {
  Rng rng(149);
  for (int trial = 0; trial < 50; ++trial) {
    auto st = GenericQubitPathState::from_angle(rng.uniform(0, std::numbers::pi / 2), rng.uniform(0, 6.28),
                                                FamilyKind::Correlated);
    const double eta = rng.uniform(0.3, 1.0);
    const cplx a = random_amp(rng), b = random_amp(rng);
    const auto q = generic_state_q_functions(st, eta, a, b);
    const auto ref = q_functions(st.density(), eta, a, b);
    EXPECT_NEAR(q.ab, ref.ab, 1e-12);
    EXPECT_NEAR(q.a, ref.a, 1e-12);
    EXPECT_NEAR(q.b, ref.b, 1e-12);
  }
}

TEST(Families, AntiCorrelatedMatchesPovmTraceForRealSettings) {
  // The interference term is taken as Re(a b* e^{i phi}); for real amplitudes
  // it coincides with the trace against the state for every phase.
  Rng rng(151);
  for (int trial = 0; trial < 50; ++trial) {
    auto st = GenericQubitPathState::from_angle(rng.uniform(0, std::numbers::pi / 2), rng.uniform(0, 6.28),
                                                FamilyKind::AntiCorrelated);
    const double eta = rng.uniform(0.3, 1.0);
    const cplx a(rng.uniform(-1, 1)), b(rng.uniform(-1, 1));
    const auto q = generic_state_q_functions(st, eta, a, b);
    const auto ref = q_functions(st.density(), eta, a, b);
    EXPECT_NEAR(q.ab, ref.ab, 1e-12);
    EXPECT_NEAR(q.a, ref.a, 1e-12);
    EXPECT_NEAR(q.b, ref.b, 1e-12);
  }
}

TEST(Families, HeraldedStateIsCorrelatedFamily) {
  auto s = SourceParams::from_gain(0.3, 0.4);
  const double l = s.lambda();
  const double n = std::sqrt(s.t_b + l * l * (1 - s.t_b));
  auto st = GenericQubitPathState{std::sqrt(s.t_b) / n, l * std::sqrt(1 - s.t_b) / n, 0.0, FamilyKind::Correlated};
  const auto set = MeasurementSettings::from_signed(0.2, -0.5, -0.2, 0.5);
  EXPECT_NEAR(generic_state_chsh(st, 0.9, set).S, chsh(s, 0.9, set).S, 1e-12);
}

TEST(Families, RejectUnnormalized) {
  GenericQubitPathState st{0.9, 0.9, 0.0, FamilyKind::Correlated};
  EXPECT_THROW(generic_state_q_functions(st, 0.9, 0.1, 0.1), std::invalid_argument);
}
