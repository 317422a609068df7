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

// chsh.hpp: displacement settings and CHSH assembly from no-click probabilities.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace pnpe {

using cplx = std::complex<double>;

inline constexpr double kTsirelson = 2.8284271247461900976;  // 2*sqrt(2)

// Displacement amplitudes for the two settings of each party. Each amplitude is
// complex; the common case of signed real amplitudes with shared phases goes
// through from_signed.
struct MeasurementSettings {
  cplx alpha1{0.0}, alpha2{0.0}, beta1{0.0}, beta2{0.0};

  static MeasurementSettings from_signed(double a1, double a2, double b1, double b2, double phi_alpha = 0.0,
                                         double phi_beta = 0.0) {
    const cplx pa = std::polar(1.0, phi_alpha);
    const cplx pb = std::polar(1.0, phi_beta);
    MeasurementSettings s{a1 * pa, a2 * pa, b1 * pb, b2 * pb};
    s.validate();
    return s;
  }

  void validate() const {
    for (const cplx& v : {alpha1, alpha2, beta1, beta2}) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::invalid_argument("MeasurementSettings: non-finite amplitude");
      if (std::abs(v) > 2.0) throw std::invalid_argument("MeasurementSettings: amplitude magnitude above 2");
    }
  }

  // Setting pairs in CHSH order: (a1,b1), (a1,b2), (a2,b1), (a2,b2).
  std::array<std::pair<cplx, cplx>, 4> pairs() const {
    return {{{alpha1, beta1}, {alpha1, beta2}, {alpha2, beta1}, {alpha2, beta2}}};
  }

  // Joint sign flip of every amplitude.
  MeasurementSettings negated() const { return {-alpha1, -alpha2, -beta1, -beta2}; }
};

// No-click probabilities for one setting pair.
struct QTriple {
  double ab = 1.0;  // neither party clicks
  double a = 1.0;   // Alice does not click
  double b = 1.0;   // Bob does not click
};

enum class Provenance { Analytic, Simulated };

inline const char* to_string(Provenance p) { return p == Provenance::Analytic ? "analytic" : "simulated"; }

struct ChshReport {
  double S = 2.0;
  std::array<double, 4> E{};
  std::array<QTriple, 4> q{};
  Provenance provenance = Provenance::Analytic;
  MeasurementSettings settings{};
  double eta_D = 1.0;
};

inline constexpr double kProbabilityTolerance = 1e-9;

// E = P(same) - P(different) for click/no-click outcomes.
inline double correlation_coefficient(double q_ab, double q_a, double q_b) {
  const double tol = kProbabilityTolerance;
  auto fail = [&](const char* why) {
    std::ostringstream os;
    os.precision(17);
    os << "correlation_coefficient: " << why << " (Q_ab=" << q_ab << ", Q_a=" << q_a << ", Q_b=" << q_b << ")";
    throw std::invalid_argument(os.str());
  };
  for (double v : {q_ab, q_a, q_b})
    if (!(v >= -tol && v <= 1.0 + tol)) fail("probability outside [0, 1]");
  if (q_ab > std::min(q_a, q_b) + tol) fail("joint probability exceeds a marginal");
  if (q_ab < q_a + q_b - 1.0 - tol) fail("click-click probability is negative");
  return 1.0 - 2.0 * q_a - 2.0 * q_b + 4.0 * q_ab;
}

inline ChshReport assemble_chsh(const std::array<QTriple, 4>& q, const MeasurementSettings& settings, double eta_D,
                                Provenance provenance) {
  ChshReport r;
  r.q = q;
  r.settings = settings;
  r.eta_D = eta_D;
  r.provenance = provenance;
  for (std::size_t k = 0; k < 4; ++k) r.E[k] = correlation_coefficient(q[k].ab, q[k].a, q[k].b);
  r.S = r.E[0] + r.E[1] + r.E[2] - r.E[3];
  return r;
}

inline double ch_from_chsh(double S) { return (S - 2.0) / 4.0; }

}  // namespace pnpe
