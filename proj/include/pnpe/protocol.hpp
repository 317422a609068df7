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

// protocol.hpp: circuit-level simulation of the heralded entanglement link on
// the truncated Fock space.
//
// Mode layout of the four-mode source state: a1 = 0, a2 = 1, b1 = 2, b2 = 3.
// Alice keeps a1 and sends a2 to Charlie; Bob keeps b1 and sends b2. Charlie
// interferes a2 and b2 on a t_c beamsplitter and heralds on exactly one photon
// in total: one photon in output a2 is the '+' outcome, one in output b2 the '-'.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pnpe/analytic.hpp"
#include "pnpe/chsh.hpp"
#include "pnpe/fock.hpp"

namespace pnpe::protocol {

using analytic::HeraldSign;
using analytic::LossParams;
using analytic::SourceParams;

inline constexpr std::size_t kA1 = 0, kA2 = 1, kB1 = 2, kB2 = 3;

enum class DetectorModel { PnrExactlyOne };

class DegenerateHerald : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProtocolParams {
  SourceParams src{};
  LossParams loss{};
  std::size_t cutoff = fock::kDefaultCutoff;
  HeraldSign charlie_sign = HeraldSign::Plus;
  DetectorModel detector_model = DetectorModel::PnrExactlyOne;

  void validate() const {
    src.validate();
    loss.validate();
    if (cutoff == 0 || cutoff > fock::kMaxCutoff) throw std::invalid_argument("ProtocolParams: cutoff must lie in [1, 12]");
    if (src.g > 0.0 && cutoff < 2) throw std::invalid_argument("ProtocolParams: cutoff must be at least 2 when g > 0");
  }
};

struct HeraldOutcome {
  fock::FockDensityOperator state;  // modes (a1, b1), normalized
  double success_probability = 0.0;
  HeraldSign detector = HeraldSign::Plus;
};

struct ClickStatistics {
  double p00 = 1.0;  // neither clicks
  double p0n = 0.0;  // only Bob clicks
  double pn0 = 0.0;  // only Alice clicks
  double pnn = 0.0;  // both click

  double sum() const { return p00 + p0n + pn0 + pnn; }
  QTriple q() const { return {p00, p00 + p0n, p00 + pn0}; }
};

// ----------------------------------------------------------------- sources --

// Alice's two-mode squeezed vacuum times Bob's heralded path-split photon, the
// latter scaled by the square root of its preparation probability so that the
// squared norm is the probability of this branch.
inline fock::FockStateVector prepare_source_vector(const ProtocolParams& params) {
  params.validate();
  const double lambda = params.src.lambda();
  const double ps = analytic::bob_prep_probability(lambda, params.src.eta_s);
  if (!(ps > 0.0)) throw DegenerateHerald("prepare_sources: Bob's herald has zero probability");
  const auto alice = fock::make_tmsv(lambda, params.cutoff, params.src.phi_a);
  const auto bob = fock::make_sppe(params.src.t_b, params.src.phi_b, params.cutoff);
  const auto bob_scaled = fock::FockStateVector(bob.space(), bob.amplitudes() * std::sqrt(ps));
  return fock::tensor(alice, bob_scaled);
}

inline fock::FockDensityOperator prepare_sources(const ProtocolParams& params) {
  return fock::to_density(prepare_source_vector(params));
}

// Alice's squeezed vacuum with Bob's modes empty, weighted by the probability
// that Bob's herald did not fire.
inline fock::FockStateVector prepare_vacuum_bob_vector(const ProtocolParams& params) {
  params.validate();
  const double lambda = params.src.lambda();
  const double ps = analytic::bob_prep_probability(lambda, params.src.eta_s);
  const auto alice = fock::make_tmsv(lambda, params.cutoff, params.src.phi_a);
  auto bob = fock::FockStateVector::vacuum(fock::FockSpace(2, params.cutoff));
  bob = fock::FockStateVector(bob.space(), bob.amplitudes() * std::sqrt(1.0 - ps));
  return fock::tensor(alice, bob);
}

// ------------------------------------------------------------------ herald --

// Unnormalized (a1, b1) density after channel loss, Charlie's beamsplitter and
// the exactly-one-photon projection for `sign`. The trace is the probability.
inline fock::FockDensityOperator herald_branch(const fock::FockStateVector& source, const ProtocolParams& params,
                                               HeraldSign sign) {
  const std::size_t cutoff = source.space().cutoff();
  const fock::FockSpace out_space(2, cutoff);
  const auto d = static_cast<Eigen::Index>(out_space.dim());
  fock::Matrix rho = fock::Matrix::Zero(d, d);

  const std::size_t keep[2] = {kA1, kB1};
  const std::size_t fixed[2] = {kA2, kB2};
  const std::size_t click[2] = {sign == HeraldSign::Plus ? 1u : 0u, sign == HeraldSign::Plus ? 0u : 1u};
  const fock::Matrix bs = fock::beamsplitter_matrix(params.src.t_c, cutoff);
  const std::size_t bs_modes[2] = {kA2, kB2};

  for (const auto& after_a : fock::loss_branches(source, {params.loss.eta_a2, kA2})) {
    for (const auto& after_b : fock::loss_branches(after_a, {params.loss.eta_b2, kB2})) {
      const auto mixed = fock::apply_operator(after_b, bs, bs_modes);
      const auto v = fock::slice(mixed, keep, fixed, click);
      rho.noalias() += v.amplitudes() * v.amplitudes().adjoint();
    }
  }
  return {out_space, std::move(rho)};
}

inline HeraldOutcome herald(const ProtocolParams& params) {
  if (params.detector_model != DetectorModel::PnrExactlyOne)
    throw std::invalid_argument("herald: only the exactly-one-photon Charlie detector is implemented");
  const auto branch = herald_branch(prepare_source_vector(params), params, params.charlie_sign);
  const double p = branch.weight();
  if (!(p > 0.0)) throw DegenerateHerald("herald: Charlie's outcome has zero probability");
  return {branch.normalized(), p, params.charlie_sign};
}

// Probability per pulse that Charlie registers exactly one photon, summed over
// both detectors and over Bob's herald firing or not.
inline double success_probability_sim(const ProtocolParams& params) {
  params.validate();
  double total = 0.0;
  const auto with_bob = prepare_vacuum_bob_vector(params);
  std::vector<fock::FockStateVector> sources{with_bob};
  if (analytic::bob_prep_probability(params.src.lambda(), params.src.eta_s) > 0.0)
    sources.push_back(prepare_source_vector(params));
  for (const auto& s : sources)
    for (HeraldSign sign : {HeraldSign::Plus, HeraldSign::Minus}) total += herald_branch(s, params, sign).weight();
  return total;
}

// ------------------------------------------------------------- measurement --

// No-click element of a displaced lossy on/off detector, D(-a)^dag (1-eta)^N D(-a),
// restricted to the first cutoff+1 levels. Built in an enlarged space so the
// truncated block is exact to double precision.
inline fock::Matrix noclick_element(cplx alpha, double eta, std::size_t cutoff) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("noclick_element: eta must lie in [0, 1]");
  const std::size_t big = cutoff + 30;
  const fock::Matrix D = fock::displacement_matrix(-alpha, big);
  Eigen::VectorXd damp(static_cast<Eigen::Index>(big + 1));
  for (Eigen::Index k = 0; k < damp.size(); ++k) damp(k) = std::pow(1.0 - eta, static_cast<double>(k));
  const fock::Matrix full = D.adjoint() * damp.asDiagonal() * D;
  const auto d = static_cast<Eigen::Index>(cutoff + 1);
  fock::Matrix e = full.topLeftCorner(d, d);
  return 0.5 * (e + e.adjoint());
}

inline ClickStatistics click_statistics(const fock::FockDensityOperator& rho_ab, cplx alpha, cplx beta, double eta_D) {
  if (rho_ab.space().modes() != 2) throw std::invalid_argument("click_statistics: expected a two-mode state");
  const std::size_t cutoff = rho_ab.space().cutoff();
  const fock::Matrix ea = noclick_element(alpha, eta_D, cutoff);
  const fock::Matrix eb = noclick_element(beta, eta_D, cutoff);
  const auto d = ea.rows();
  const fock::Matrix id = fock::Matrix::Identity(d, d);
  auto kron = [](const fock::Matrix& x, const fock::Matrix& y) {
    fock::Matrix k(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) k.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return k;
  };
  const std::array<fock::Matrix, 4> elements = {kron(ea, eb), kron(ea, id - eb), kron(id - ea, eb),
                                                kron(id - ea, id - eb)};
  const std::size_t modes[2] = {0, 1};
  const auto p = fock::measure_povm(rho_ab.normalized(), elements, modes);
  return {p[0], p[1], p[2], p[3]};
}

inline ChshReport chsh_from_state(const fock::FockDensityOperator& rho_ab, const MeasurementSettings& settings,
                                  double eta_D) {
  settings.validate();
  std::array<QTriple, 4> q;
  const auto pairs = settings.pairs();
  for (std::size_t k = 0; k < 4; ++k) q[k] = click_statistics(rho_ab, pairs[k].first, pairs[k].second, eta_D).q();
  return assemble_chsh(q, settings, eta_D, Provenance::Simulated);
}

inline ChshReport measure_chsh_sim(const ProtocolParams& params, const MeasurementSettings& settings, double eta_D) {
  if (!(eta_D >= 0.0 && eta_D <= 1.0)) throw std::invalid_argument("measure_chsh_sim: eta_D must lie in [0, 1]");
  return chsh_from_state(herald(params).state, settings, eta_D);
}

}  // namespace pnpe::protocol
