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

// nelder_mead.hpp: box-constrained downhill simplex with deterministic seeding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace pnpe::opt {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

// Folds x back into [lo, hi] by mirror reflection at the edges.
inline double reflect_into(double x, const Interval& iv) {
  const double w = iv.width();
  if (w <= 0.0) return iv.lo;
  if (x >= iv.lo && x <= iv.hi) return x;
  double y = std::fmod(x - iv.lo, 2.0 * w);
  if (y < 0.0) y += 2.0 * w;
  if (y > w) y = 2.0 * w - y;
  return iv.lo + y;
}

inline std::vector<double> reflect_into(std::vector<double> x, const std::vector<Interval>& box) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = reflect_into(x[i], box[i]);
  return x;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform doubles from mt19937_64 with a fixed 53-bit mapping, so the stream is
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double uniform(const Interval& iv) { return uniform(iv.lo, iv.hi); }

 private:
  std::mt19937_64 engine_;
};

struct NelderMeadOptions {
  double diameter_tol = 1e-9;
  std::size_t max_evaluations = 20000;
  double initial_step = 0.1;  // fraction of each interval width
  std::size_t max_rebuilds = 6;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Minimizes f over the box. After the simplex collapses, it is rebuilt around
// the best vertex and the search continues until a rebuild stops improving.
template <class F>
NelderMeadResult nelder_mead_minimize(F&& f, std::vector<double> x0, const std::vector<Interval>& box,
                                      const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  if (n == 0 || box.size() != n) throw std::invalid_argument("nelder_mead: dimension mismatch");
  for (const auto& iv : box)
    if (!(iv.hi >= iv.lo)) throw std::invalid_argument("nelder_mead: empty interval");

  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  std::vector<std::vector<double>> simplex(n + 1);
  std::vector<double> fv(n + 1);
  auto build = [&](const std::vector<double>& centre) {
    simplex[0] = reflect_into(centre, box);
    fv[0] = eval(simplex[0]);
    for (std::size_t i = 0; i < n; ++i) {
      auto v = simplex[0];
      const double step = opt.initial_step * box[i].width();
      v[i] = (v[i] + step <= box[i].hi) ? v[i] + step : v[i] - step;
      v = reflect_into(v, box);
      simplex[i + 1] = v;
      fv[i + 1] = eval(v);
    }
  };

  auto diameter = [&]() {
    double d = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t k = 0; k < n; ++k) d = std::max(d, std::abs(simplex[i][k] - simplex[0][k]));
    return d;
  };

  build(x0);
  std::vector<std::size_t> order(n + 1);
  bool converged = false;
  double last_best = HUGE_VAL;
  std::size_t rebuilds = 0;

  while (evals < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> s2(n + 1);
      std::vector<double> f2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        s2[i] = simplex[order[i]];
        f2[i] = fv[order[i]];
      }
      simplex.swap(s2);
      fv.swap(f2);
    }

    if (diameter() < opt.diameter_tol) {
      if (rebuilds < opt.max_rebuilds && fv[0] < last_best - 1e-15) {
        last_best = fv[0];
        ++rebuilds;
        build(simplex[0]);
        continue;
      }
      converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);

    auto along = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coeff * (simplex[n][k] - centroid[k]);
      return reflect_into(std::move(p), box);
    };

    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
      continue;
    }
    const bool outside = fr < fv[n];
    const auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[n])) {
      simplex[n] = xc;
      fv[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
      fv[i] = eval(simplex[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {simplex[best], fv[best], evals, converged};
}

}  // namespace pnpe::opt
