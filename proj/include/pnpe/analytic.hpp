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

// analytic.hpp: closed forms for the heralded two-qubit state, lossy
// displacement measurements, Q-functions, CHSH, log-negativity and the
// correlated/anticorrelated state families.
//
// Qubit-pair basis order is {|0,0>, |0,1>, |1,0>, |1,1>} (Alice first).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "pnpe/chsh.hpp"

namespace pnpe::analytic {

using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;

enum class HeraldSign { Plus, Minus };

inline double sign_value(HeraldSign s) { return s == HeraldSign::Plus ? 1.0 : -1.0; }
inline const char* to_string(HeraldSign s) { return s == HeraldSign::Plus ? "+" : "-"; }

struct QubitPairState {
  Matrix4 matrix = Matrix4::Zero();
  bool normalized = false;

  double trace() const { return matrix.trace().real(); }

  QubitPairState normalize() const {
    const double t = trace();
    if (!(t > 0.0)) throw std::domain_error("QubitPairState: zero-trace state cannot be normalized");
    return {matrix / t, true};
  }

  double hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (matrix + matrix.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  static QubitPairState pure(const Eigen::Vector4cd& psi) { return {psi * psi.adjoint(), false}; }
};

// Source knobs. g is stored; lambda = tanh(g) is derived so the two never
// disagree. t_b and t_c are power transmittances.
struct SourceParams {
  double g = 0.3;
  double t_b = 0.5;
  double t_c = 0.5;
  double phi_a = 0.0;
  double phi_b = 0.0;
  double eta_s = 1.0;

  double lambda() const { return std::tanh(g); }
  double phi() const { return phi_a + phi_b; }

  static SourceParams from_gain(double g, double t_b) {
    SourceParams s;
    s.g = g;
    s.t_b = t_b;
    s.validate();
    return s;
  }

  static SourceParams from_lambda(double lambda, double t_b) {
    if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("SourceParams: lambda must lie in [0, 1)");
    return from_gain(std::atanh(lambda), t_b);
  }

  void validate() const {
    if (!(g >= 0.0 && std::isfinite(g))) throw std::invalid_argument("SourceParams: g must be finite and >= 0");
    for (double v : {t_b, t_c, eta_s})
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("SourceParams: t_b, t_c, eta_s must lie in [0, 1]");
    if (!std::isfinite(phi_a) || !std::isfinite(phi_b)) throw std::invalid_argument("SourceParams: non-finite phase");
  }
};

struct LossParams {
  double eta_a2 = 1.0;
  double eta_b2 = 1.0;
  double eta_H = 1.0;
  double eta_D = 1.0;
  double eta_C = 1.0;
  double eta_Dc = 1.0;  // Charlie's detector efficiency
  double gamma = 0.2;   // dB/km
  double L = 0.0;       // km

  static LossParams symmetric(double eta_H, double eta_D) {
    LossParams p;
    p.eta_H = p.eta_a2 = p.eta_b2 = eta_H;
    p.eta_D = eta_D;
    p.validate();
    return p;
  }

  static LossParams from_channel(double gamma_db_per_km, double length_km, double eta_Dc, double eta_D) {
    if (!(gamma_db_per_km >= 0.0) || !(length_km >= 0.0))
      throw std::invalid_argument("LossParams: gamma and L must be non-negative");
    LossParams p;
    p.gamma = gamma_db_per_km;
    p.L = length_km;
    p.eta_C = std::pow(10.0, -gamma_db_per_km * length_km / 10.0);
    p.eta_Dc = eta_Dc;
    p.eta_H = eta_Dc * std::sqrt(p.eta_C);
    p.eta_a2 = p.eta_b2 = p.eta_H;
    p.eta_D = eta_D;
    p.validate();
    return p;
  }

  // Symmetric heralding from a given end-to-end channel transmittance.
  static LossParams from_transmittance(double eta_C, double eta_Dc, double eta_D) {
    LossParams p;
    p.eta_C = eta_C;
    p.eta_Dc = eta_Dc;
    p.eta_H = eta_Dc * std::sqrt(eta_C);
    p.eta_a2 = p.eta_b2 = p.eta_H;
    p.eta_D = eta_D;
    p.validate();
    return p;
  }

  void validate() const {
    for (double v : {eta_a2, eta_b2, eta_H, eta_D, eta_C, eta_Dc})
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("LossParams: efficiencies must lie in [0, 1]");
  }
};

// -------------------------------------------------------- heralded states --

// Unnormalized pure state after Charlie's detector fires, for Alice a0|00>+a1|11>
// and Bob b0|0,1>+b1|1,0>.
inline QubitPairState ideal_heralded_state(double a0, double a1, double b0, double b1, double t_c, HeraldSign sign) {
  if (std::abs(a0 * a0 + a1 * a1 - 1.0) > 1e-12 || std::abs(b0 * b0 + b1 * b1 - 1.0) > 1e-12)
    throw std::invalid_argument("ideal_heralded_state: amplitudes must be normalized");
  if (!(t_c >= 0.0 && t_c <= 1.0)) throw std::invalid_argument("ideal_heralded_state: t_c must lie in [0, 1]");
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  if (sign == HeraldSign::Plus) {
    psi(0) = a0 * b0 * std::sqrt(1.0 - t_c);
    psi(3) = a1 * b1 * std::sqrt(t_c);
  } else {
    psi(0) = a0 * b0 * std::sqrt(t_c);
    psi(3) = -a1 * b1 * std::sqrt(1.0 - t_c);
  }
  return QubitPairState::pure(psi);
}

// Normalized heralded state with independent losses on the transmitted modes.
// At t_c = 1/2 the entries reduce to
//   diag {t_b eta_b2, 0, lambda^2 t_b (eta_a2 + eta_b2 - 2 eta_a2 eta_b2), lambda^2 (1-t_b) eta_a2}
//   <11|rho|00> = +-lambda sqrt(eta_a2 eta_b2 t_b (1-t_b)) e^{i(phi_a+phi_b)}
// divided by the trace. Other t_c reweight each path by its detector branch.
inline QubitPairState heralded_state_general(const SourceParams& src, double eta_a2, double eta_b2, HeraldSign sign) {
  src.validate();
  if (!(eta_a2 >= 0.0 && eta_a2 <= 1.0 && eta_b2 >= 0.0 && eta_b2 <= 1.0))
    throw std::invalid_argument("heralded_state_general: efficiencies must lie in [0, 1]");
  const double l = src.lambda();
  const double tb = src.t_b;
  // Detector-branch weights for a photon arriving from a2 or from b2.
  const double wa = 2.0 * (sign == HeraldSign::Plus ? src.t_c : 1.0 - src.t_c);
  const double wb = 2.0 * (sign == HeraldSign::Plus ? 1.0 - src.t_c : src.t_c);
  Matrix4 m = Matrix4::Zero();
  m(0, 0) = tb * eta_b2 * wb;
  m(2, 2) = l * l * tb * (wa * eta_a2 * (1.0 - eta_b2) + wb * eta_b2 * (1.0 - eta_a2));
  m(3, 3) = l * l * (1.0 - tb) * eta_a2 * wa;
  const cplx coh = sign_value(sign) * l * std::sqrt(eta_a2 * eta_b2 * tb * (1.0 - tb) * wa * wb) *
                   std::polar(1.0, src.phi());
  m(3, 0) = coh;
  m(0, 3) = std::conj(coh);
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw std::domain_error("heralded_state_general: zero-trace heralded state");
  return {m / tr, true};
}

// Noise weight relative to the pure part under symmetric heralding loss.
inline double epsilon_noise(double lambda, double t_b, double eta_H) { return 2.0 * lambda * lambda * t_b * (1.0 - eta_H); }

// ----------------------------------------------------------- measurements --

// No-click POVM D(-a)^dag (1-eta)^N D(-a) of a displaced, lossy on/off
// detector, restricted to span{|0>, |1>}.
inline Matrix2 noclick_povm(cplx alpha, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("noclick_povm: eta must lie in [0, 1]");
  const double a2 = std::norm(alpha);
  const double env = std::exp(-eta * a2);
  Matrix2 m;
  m(0, 0) = env;
  m(0, 1) = eta * std::conj(alpha) * env;
  m(1, 0) = eta * alpha * env;
  m(1, 1) = (1.0 - eta + eta * eta * a2) * env;
  return m;
}

namespace detail {

inline double loss_factor(double eta, double abs2) { return 1.0 - eta + eta * eta * abs2; }

struct PureWeights {
  double p0, p1;  // unnormalized |00> and |11> weights
  double coh;     // signed coherence magnitude
};

inline PureWeights heralded_weights(const SourceParams& src, HeraldSign sign) {
  const double l = src.lambda();
  const double wa = 2.0 * (sign == HeraldSign::Plus ? src.t_c : 1.0 - src.t_c);
  const double wb = 2.0 * (sign == HeraldSign::Plus ? 1.0 - src.t_c : src.t_c);
  return {src.t_b * wb, l * l * (1.0 - src.t_b) * wa,
          sign_value(sign) * l * std::sqrt(src.t_b * (1.0 - src.t_b) * wa * wb)};
}

}  // namespace detail

// Joint no-click probability on the noiseless heralded state:
//   e^{-eta(|a|^2+|b|^2)} [t_b + l^2(1-t_b)(1-eta+eta^2|a|^2)(1-eta+eta^2|b|^2)
//                          + 2 l sqrt(t_b(1-t_b)) eta^2 Re(a* b* e^{i(phi_a+phi_b)})] / (t_b + l^2(1-t_b))
// The noise term of lossy heralding is not included.
inline double q_joint(const SourceParams& src, double eta_D, cplx alpha, cplx beta, HeraldSign sign = HeraldSign::Plus) {
  const auto w = detail::heralded_weights(src, sign);
  const double norm = w.p0 + w.p1;
  if (!(norm > 0.0)) throw std::domain_error("q_joint: zero-weight heralded state");
  const double A = std::norm(alpha), B = std::norm(beta);
  const double cross = std::real(std::conj(alpha) * std::conj(beta) * std::polar(1.0, src.phi()));
  const double num = w.p0 + w.p1 * detail::loss_factor(eta_D, A) * detail::loss_factor(eta_D, B) +
                     2.0 * w.coh * eta_D * eta_D * cross;
  return std::exp(-eta_D * (A + B)) * num / norm;
}

inline double q_marginal_a(const SourceParams& src, double eta_D, cplx alpha, HeraldSign sign = HeraldSign::Plus) {
  const auto w = detail::heralded_weights(src, sign);
  const double norm = w.p0 + w.p1;
  if (!(norm > 0.0)) throw std::domain_error("q_marginal_a: zero-weight heralded state");
  const double A = std::norm(alpha);
  return std::exp(-eta_D * A) * (w.p0 + w.p1 * detail::loss_factor(eta_D, A)) / norm;
}

inline double q_marginal_b(const SourceParams& src, double eta_D, cplx beta, HeraldSign sign = HeraldSign::Plus) {
  return q_marginal_a(src, eta_D, beta, sign);
}

inline ChshReport chsh(const SourceParams& src, double eta_D, const MeasurementSettings& settings,
                       HeraldSign sign = HeraldSign::Plus) {
  if (!(eta_D >= 0.0 && eta_D <= 1.0)) throw std::invalid_argument("chsh: eta_D must lie in [0, 1]");
  std::array<QTriple, 4> q;
  const auto pairs = settings.pairs();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& [a, b] = pairs[k];
    q[k] = {q_joint(src, eta_D, a, b, sign), q_marginal_a(src, eta_D, a, sign), q_marginal_b(src, eta_D, b, sign)};
  }
  return assemble_chsh(q, settings, eta_D, Provenance::Analytic);
}

// Q-functions of an arbitrary two-qubit state through the POVM matrices.
inline QTriple q_functions(const QubitPairState& rho, double eta, cplx alpha, cplx beta) {
  const Matrix2 pa = noclick_povm(alpha, eta);
  const Matrix2 pb = noclick_povm(beta, eta);
  const Matrix2 id = Matrix2::Identity();
  Matrix4 kab, ka, kb;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          kab(2 * i + k, 2 * j + l) = pa(i, j) * pb(k, l);
          ka(2 * i + k, 2 * j + l) = pa(i, j) * id(k, l);
          kb(2 * i + k, 2 * j + l) = id(i, j) * pb(k, l);
        }
  const double t = rho.trace();
  return {(rho.matrix * kab).trace().real() / t, (rho.matrix * ka).trace().real() / t,
          (rho.matrix * kb).trace().real() / t};
}

inline ChshReport chsh(const QubitPairState& rho, double eta_D, const MeasurementSettings& settings) {
  std::array<QTriple, 4> q;
  const auto pairs = settings.pairs();
  for (std::size_t k = 0; k < 4; ++k) q[k] = q_functions(rho, eta_D, pairs[k].first, pairs[k].second);
  return assemble_chsh(q, settings, eta_D, Provenance::Analytic);
}

// ---------------------------------------------------------- entanglement --

inline double log_negativity(double lambda, double t_b) {
  if (!(lambda >= 0.0 && lambda < 1.0) || !(t_b >= 0.0 && t_b <= 1.0))
    throw std::invalid_argument("log_negativity: lambda in [0, 1), t_b in [0, 1] required");
  const double den = lambda * lambda * (1.0 - t_b) + t_b;
  if (!(den > 0.0)) throw std::domain_error("log_negativity: lambda = 0 and t_b = 0 leave no state");
  return std::log2(1.0 + 2.0 * lambda * std::sqrt(t_b * (1.0 - t_b)) / den);
}

// log2 of the trace norm of the partial transpose over Bob.
inline double log_negativity(const QubitPairState& rho) {
  Matrix4 pt;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) pt(2 * i + k, 2 * j + l) = rho.matrix(2 * i + l, 2 * j + k);
  pt /= rho.trace();
  Eigen::SelfAdjointEigenSolver<Matrix4> es(0.5 * (pt + pt.adjoint()), Eigen::EigenvaluesOnly);
  return std::log2(es.eigenvalues().cwiseAbs().sum());
}

// --------------------------------------------------------- state families --

enum class FamilyKind { Correlated, AntiCorrelated };

inline const char* to_string(FamilyKind k) { return k == FamilyKind::Correlated ? "phi" : "psi"; }

// Correlated: c0|0,0> + c1 e^{i phi}|1,1>.  AntiCorrelated: c0|0,1> + c1 e^{i phi}|1,0>.
struct GenericQubitPathState {
  double c0 = 1.0 / std::sqrt(2.0);
  double c1 = 1.0 / std::sqrt(2.0);
  double phi = 0.0;
  FamilyKind kind = FamilyKind::Correlated;

  static GenericQubitPathState from_angle(double theta, double phi, FamilyKind kind) {
    return {std::cos(theta), std::sin(theta), phi, kind};
  }

  void validate() const {
    if (std::abs(c0 * c0 + c1 * c1 - 1.0) > 1e-12) throw std::invalid_argument("GenericQubitPathState: c0^2 + c1^2 != 1");
  }

  QubitPairState density() const {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    if (kind == FamilyKind::Correlated) {
      v(0) = c0;
      v(3) = c1 * std::polar(1.0, phi);
    } else {
      v(1) = c0;
      v(2) = c1 * std::polar(1.0, phi);
    }
    return {v * v.adjoint(), true};
  }
};

// Lossy Q-functions of the two families. Interference terms follow the
// printed closed forms: Re(a b* e^{i phi}) for AntiCorrelated and
// Re(a* b* e^{i phi}) for Correlated.
inline QTriple generic_state_q_functions(const GenericQubitPathState& st, double eta, cplx alpha, cplx beta) {
  st.validate();
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("generic_state_q_functions: eta must lie in [0, 1]");
  const double A = std::norm(alpha), B = std::norm(beta);
  const double La = detail::loss_factor(eta, A), Lb = detail::loss_factor(eta, B);
  const double c02 = st.c0 * st.c0, c12 = st.c1 * st.c1;
  const double env_a = std::exp(-eta * A), env_b = std::exp(-eta * B);
  const cplx ph = std::polar(1.0, st.phi);
  QTriple q;
  if (st.kind == FamilyKind::AntiCorrelated) {
    q.a = (c12 * La + c02) * env_a;
    q.b = (c02 * Lb + c12) * env_b;
    q.ab = (c02 * Lb + c12 * La + 2.0 * st.c0 * st.c1 * eta * eta * std::real(alpha * std::conj(beta) * ph)) * env_a * env_b;
  } else {
    q.a = (c02 + c12 * La) * env_a;
    q.b = (c02 + c12 * Lb) * env_b;
    q.ab = (c02 + c12 * La * Lb + 2.0 * st.c0 * st.c1 * eta * eta * std::real(std::conj(alpha) * std::conj(beta) * ph)) *
           env_a * env_b;
  }
  return q;
}

inline ChshReport generic_state_chsh(const GenericQubitPathState& st, double eta, const MeasurementSettings& settings) {
  std::array<QTriple, 4> q;
  const auto pairs = settings.pairs();
  for (std::size_t k = 0; k < 4; ++k) q[k] = generic_state_q_functions(st, eta, pairs[k].first, pairs[k].second);
  return assemble_chsh(q, settings, eta, Provenance::Analytic);
}

// ------------------------------------------------------------- sources ----

// Same source at a new lambda, with t_b adjusted so the |1,1>/|0,0> amplitude
// ratio lambda sqrt((1-t_b)/t_b) of the heralded state is unchanged.
inline SourceParams with_lambda_at_fixed_ratio(const SourceParams& src, double lambda_new) {
  if (!(lambda_new > 0.0 && lambda_new < 1.0))
    throw std::invalid_argument("with_lambda_at_fixed_ratio: lambda must lie in (0, 1)");
  SourceParams out = src;
  out.g = std::atanh(lambda_new);
  if (src.t_b > 0.0) {
    const double l = src.lambda();
    const double q2 = l * l * (1.0 - src.t_b) / src.t_b;
    out.t_b = lambda_new * lambda_new / (lambda_new * lambda_new + q2);
  }
  return out;
}

// Probability that Bob's heralded single photon is prepared.
inline double bob_prep_probability(double lambda, double eta_s) {
  if (!(lambda >= 0.0 && lambda < 1.0) || !(eta_s >= 0.0 && eta_s <= 1.0))
    throw std::invalid_argument("bob_prep_probability: lambda in [0, 1), eta_s in [0, 1] required");
  return eta_s * lambda * lambda / (1.0 + lambda * lambda);
}

}  // namespace pnpe::analytic
