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

// reference_optima.hpp: published optimal settings per detection efficiency.
//
// The t_b column is an amplitude transmittance; the power transmittance used by
// SourceParams is its square.

#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "pnpe/analytic.hpp"
#include "pnpe/chsh.hpp"

namespace pnpe::reference {

struct OptimumRow {
  double eta_D;
  double t_b;  // amplitude transmittance as published
  double g;
  double alpha1, alpha2, beta1, beta2;
  double S;

  double t_b_power() const { return t_b * t_b; }

  analytic::SourceParams source() const { return analytic::SourceParams::from_gain(g, t_b_power()); }

  MeasurementSettings settings() const { return MeasurementSettings::from_signed(alpha1, alpha2, beta1, beta2); }
};

inline constexpr std::array<OptimumRow, 10> kTableRows = {{
    {0.65, 0.999, 0.090, 0.000, -0.013, 0.000, 0.013, 2.000000},
    {0.67, 0.945, 0.048, 0.001, -0.128, -0.001, 0.128, 2.000002},
    {0.68, 0.905, 0.132, 0.010, -0.241, -0.010, 0.241, 2.000133},
    {0.70, 0.823, 0.226, 0.035, -0.364, -0.035, 0.364, 2.002067},
    {0.75, 0.614, 0.279, 0.097, -0.501, -0.097, 0.501, 2.027202},
    {0.80, 0.181, 0.094, 0.139, -0.554, -0.139, 0.554, 2.088839},
    {0.85, 0.435, 0.320, 0.162, -0.574, -0.162, 0.574, 2.186472},
    {0.90, 0.414, 0.364, 0.172, -0.579, -0.172, 0.579, 2.318223},
    {0.95, 0.296, 0.284, 0.172, -0.573, -0.172, 0.573, 2.483976},
    {1.00, 0.280, 0.300, 0.165, -0.560, -0.165, 0.560, 2.685871},
}};

inline std::optional<OptimumRow> find_row(double eta_D, double tol = 1e-9) {
  for (const auto& r : kTableRows)
    if (std::abs(r.eta_D - eta_D) <= tol) return r;
  return std::nullopt;
}

// Reference markers for the comparison outputs.
inline constexpr double kEberhardLimit = 2.0 / 3.0;
inline constexpr double kAntiCorrelatedThreshold = 0.826;
inline constexpr double kPolarisationThreshold = 0.6667;

}  // namespace pnpe::reference
