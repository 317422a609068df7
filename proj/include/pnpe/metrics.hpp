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

// metrics.hpp: heralding success rates for the three source pairings and
// device-independent figures of merit derived from S.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "pnpe/chsh.hpp"

namespace pnpe::metrics {

enum class VariantKind { TwoTmsv, TwoSppe, Hybrid };

inline const char* to_string(VariantKind k) {
  switch (k) {
    case VariantKind::TwoTmsv: return "two_tmsv";
    case VariantKind::TwoSppe: return "two_sppe";
    case VariantKind::Hybrid: return "hybrid";
  }
  return "?";
}

struct ProtocolVariant {
  VariantKind kind = VariantKind::Hybrid;
  double lambda = 0.0;
  double t = 1.0;  // splitter transmittance; unused for TwoTmsv

  // The single-photon sources are meant for t << 1.
  bool outside_low_t_regime() const { return kind == VariantKind::TwoSppe && t > 0.2; }
};

// Single-pair probability of one TMSV source.
inline double pair_probability(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("pair_probability: lambda must lie in [0, 1)");
  return lambda * lambda / (1.0 + lambda * lambda);
}

// (P_A(1), P_B(1)) for the variant.
inline std::pair<double, double> variant_p1(const ProtocolVariant& v) {
  if (!(v.t >= 0.0 && v.t <= 1.0)) throw std::invalid_argument("variant_p1: t must lie in [0, 1]");
  const double p = pair_probability(v.lambda);
  switch (v.kind) {
    case VariantKind::TwoTmsv: return {p, p};
    case VariantKind::TwoSppe: return {p * v.t, p * v.t};
    case VariantKind::Hybrid: return {p, p * v.t};
  }
  throw std::invalid_argument("variant_p1: unknown variant");
}

inline double success_probability(double p_a1, double p_b1, double eta_C) {
  for (double v : {p_a1, p_b1, eta_C})
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("success_probability: inputs must lie in [0, 1]");
  const double p = std::sqrt(eta_C) * (p_a1 + p_b1) - 2.0 * eta_C * p_a1 * p_b1;
  if (p < 0.0) throw std::domain_error("success_probability: negative result for these inputs");
  return p;
}

inline double success_probability(const ProtocolVariant& v, double eta_C) {
  const auto [pa, pb] = variant_p1(v);
  return success_probability(pa, pb, eta_C);
}

// ------------------------------------------------------ device independence --

struct ClampResult {
  double value;
  bool clamped;
};

inline ClampResult clamp_chsh(double S) {
  if (!std::isfinite(S)) throw std::invalid_argument("clamp_chsh: non-finite S");
  if (S > kTsirelson + 1e-9) throw std::domain_error("clamp_chsh: S above the Tsirelson bound");
  if (S < 2.0) return {2.0, true};
  if (S > kTsirelson) return {kTsirelson, true};
  return {S, false};
}

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double min_entropy(double S, bool* clamped = nullptr) {
  const auto c = clamp_chsh(S);
  if (clamped) *clamped = c.clamped;
  const double inner = std::max(0.0, 2.0 - c.value * c.value / 4.0);
  return 1.0 - std::log2(1.0 + std::sqrt(inner));
}

inline double holevo_bound(double S, bool* clamped = nullptr) {
  const auto c = clamp_chsh(S);
  if (clamped) *clamped = c.clamped;
  const double inner = std::clamp(c.value * c.value / 4.0 - 1.0, 0.0, 1.0);
  const double x = std::min(1.0, (1.0 + std::sqrt(inner)) / 2.0);
  return binary_entropy(x);
}

struct DiMetrics {
  double S = 2.0;
  double h_min = 0.0;
  double chi_max = 1.0;
  double rate_lower_bound = 0.0;  // bits/s
  bool clamped = false;
};

inline DiMetrics di_metrics(double S, double repetition_rate) {
  if (!(repetition_rate >= 0.0)) throw std::invalid_argument("di_metrics: repetition rate must be non-negative");
  DiMetrics m;
  m.S = S;
  bool c1 = false, c2 = false;
  m.h_min = min_entropy(S, &c1);
  m.chi_max = holevo_bound(S, &c2);
  m.clamped = c1 || c2;
  m.rate_lower_bound = repetition_rate * m.h_min;
  return m;
}

// Polarisation-encoded reference protocol, carried as constants only.
struct PolarisationReference {
  static constexpr double threshold = 0.6667;
  static constexpr const char* scaling = "O(eta_C)";
};

}  // namespace pnpe::metrics
