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

// fock.hpp: truncated multimode Fock-space states, channels and measurements.
//
// Basis ordering contract: a multimode basis ket |n_0, n_1, ..., n_{M-1}> with
// every n_k <= cutoff has flat index
//
//     idx = sum_k n_k * (cutoff + 1)^(M - 1 - k)
//
// i.e. mode 0 is the most significant digit. All index arithmetic goes through
// FockSpace::encode / FockSpace::decode / FockSpace::occupation.
//
// Beamsplitter convention (the only place relative signs are fixed): for
// transmittance t acting on modes (i, j), creation operators map as
//
//     a_i^dag -> sqrt(t) a_i^dag + sqrt(1-t) a_j^dag
//     a_j^dag -> sqrt(1-t) a_i^dag - sqrt(t) a_j^dag
//
// The map is real symmetric and squares to the identity, so applying the same
// beamsplitter twice is the identity on photon sums that fit below the cutoff.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnpe::fock {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr std::size_t kDefaultCutoff = 6;
inline constexpr std::size_t kMaxCutoff = 12;

// ------------------------------------------------------------------ space --

class FockSpace {
 public:
  FockSpace(std::size_t mode_count, std::size_t cutoff)
      : modes_(mode_count), cutoff_(cutoff) {
    if (mode_count == 0) throw std::invalid_argument("FockSpace: mode_count must be positive");
    if (cutoff == 0) throw std::invalid_argument("FockSpace: cutoff must be positive");
    if (cutoff > kMaxCutoff) throw std::invalid_argument("FockSpace: cutoff above 12 is not supported");
    dim_ = 1;
    for (std::size_t k = 0; k < modes_; ++k) dim_ *= levels();
  }

  std::size_t modes() const { return modes_; }
  std::size_t cutoff() const { return cutoff_; }
  std::size_t levels() const { return cutoff_ + 1; }
  std::size_t dim() const { return dim_; }

  std::size_t stride(std::size_t mode) const {
    check_mode(mode);
    std::size_t s = 1;
    for (std::size_t k = mode + 1; k < modes_; ++k) s *= levels();
    return s;
  }

  std::size_t encode(std::span<const std::size_t> occupations) const {
    if (occupations.size() != modes_) throw std::invalid_argument("FockSpace::encode: wrong number of modes");
    std::size_t idx = 0;
    for (std::size_t n : occupations) {
      if (n > cutoff_) throw std::out_of_range("FockSpace::encode: occupation above cutoff");
      idx = idx * levels() + n;
    }
    return idx;
  }

  std::size_t encode(std::initializer_list<std::size_t> occupations) const {
    return encode(std::span<const std::size_t>(occupations.begin(), occupations.size()));
  }

  std::vector<std::size_t> decode(std::size_t idx) const {
    if (idx >= dim_) throw std::out_of_range("FockSpace::decode: index out of range");
    std::vector<std::size_t> occ(modes_);
    for (std::size_t k = modes_; k-- > 0;) {
      occ[k] = idx % levels();
      idx /= levels();
    }
    return occ;
  }

  std::size_t occupation(std::size_t idx, std::size_t mode) const {
    return (idx / stride(mode)) % levels();
  }

  void check_mode(std::size_t mode) const {
    if (mode >= modes_) throw std::out_of_range("FockSpace: mode index " + std::to_string(mode) + " out of range");
  }

  friend bool operator==(const FockSpace&, const FockSpace&) = default;

 private:
  std::size_t modes_;
  std::size_t cutoff_;
  std::size_t dim_ = 1;
};

// ----------------------------------------------------------------- values --

class FockStateVector {
 public:
  FockStateVector(FockSpace space, Vector amplitudes)
      : space_(space), amplitudes_(std::move(amplitudes)) {
    if (static_cast<std::size_t>(amplitudes_.size()) != space_.dim())
      throw std::invalid_argument("FockStateVector: amplitude length does not match (cutoff+1)^modes");
    if (squared_norm() > 1.0 + 1e-12)
      throw std::invalid_argument("FockStateVector: squared norm exceeds 1");
  }

  static FockStateVector vacuum(FockSpace space) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    v(0) = 1.0;
    return {space, std::move(v)};
  }

  static FockStateVector basis(FockSpace space, std::initializer_list<std::size_t> occupations) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    v(static_cast<Eigen::Index>(space.encode(occupations))) = 1.0;
    return {space, std::move(v)};
  }

  const FockSpace& space() const { return space_; }
  const Vector& amplitudes() const { return amplitudes_; }
  cplx amplitude(std::initializer_list<std::size_t> occupations) const {
    return amplitudes_(static_cast<Eigen::Index>(space_.encode(occupations)));
  }
  double squared_norm() const { return amplitudes_.squaredNorm(); }

 private:
  FockSpace space_;
  Vector amplitudes_;
};

class FockDensityOperator {
 public:
  FockDensityOperator(FockSpace space, Matrix matrix) : space_(space), matrix_(std::move(matrix)) {
    const auto d = static_cast<Eigen::Index>(space_.dim());
    if (matrix_.rows() != d || matrix_.cols() != d)
      throw std::invalid_argument("FockDensityOperator: matrix dimension does not match (cutoff+1)^modes");
  }

  explicit FockDensityOperator(const FockStateVector& psi)
      : FockDensityOperator(psi.space(), psi.amplitudes() * psi.amplitudes().adjoint()) {}

  const FockSpace& space() const { return space_; }
  const Matrix& matrix() const { return matrix_; }
  cplx element(std::initializer_list<std::size_t> row, std::initializer_list<std::size_t> col) const {
    return matrix_(static_cast<Eigen::Index>(space_.encode(row)), static_cast<Eigen::Index>(space_.encode(col)));
  }

  // Trace, read as the probability of the branch that produced this state.
  double weight() const { return matrix_.trace().real(); }

  FockDensityOperator normalized() const {
    const double w = weight();
    if (!(w > 0.0)) throw std::domain_error("FockDensityOperator::normalized: zero-weight state");
    return {space_, matrix_ / w};
  }

  double hermiticity_error() const { return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (matrix_ + matrix_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  FockSpace space_;
  Matrix matrix_;
};

struct LossChannel {
  double eta = 1.0;  // transmittance
  std::size_t mode = 0;
};

// Filled in by operations that can push amplitude above the cutoff.
struct TruncationReport {
  double norm_deficit = 0.0;
};

// ---------------------------------------------------------------- helpers --

namespace detail {

inline double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// Flat-index offsets of every local configuration of `modes`, local index in
// the same most-significant-first order as the full space.
inline std::vector<std::size_t> local_offsets(const FockSpace& space, std::span<const std::size_t> modes) {
  const std::size_t d = space.levels();
  std::size_t local_dim = 1;
  for (std::size_t m : modes) {
    space.check_mode(m);
    local_dim *= d;
  }
  std::vector<std::size_t> off(local_dim, 0);
  for (std::size_t l = 0; l < local_dim; ++l) {
    std::size_t rem = l;
    std::size_t o = 0;
    for (std::size_t k = modes.size(); k-- > 0;) {
      o += (rem % d) * space.stride(modes[k]);
      rem /= d;
    }
    off[l] = o;
  }
  return off;
}

// Flat indices whose occupation on every mode in `modes` is zero.
inline std::vector<std::size_t> base_indices(const FockSpace& space, std::span<const std::size_t> modes) {
  std::vector<std::size_t> bases;
  for (std::size_t idx = 0; idx < space.dim(); ++idx) {
    bool zero = true;
    for (std::size_t m : modes) {
      if (space.occupation(idx, m) != 0) {
        zero = false;
        break;
      }
    }
    if (zero) bases.push_back(idx);
  }
  return bases;
}

inline void check_distinct(std::span<const std::size_t> modes) {
  for (std::size_t a = 0; a < modes.size(); ++a)
    for (std::size_t b = a + 1; b < modes.size(); ++b)
      if (modes[a] == modes[b]) throw std::invalid_argument("fock: repeated mode index");
}

// Columns of `m` are treated as kets; applies `op` (acting on `modes`) to each.
inline void apply_left(Matrix& m, const Matrix& op, const FockSpace& space, std::span<const std::size_t> modes) {
  check_distinct(modes);
  const auto off = local_offsets(space, modes);
  const auto bases = base_indices(space, modes);
  const auto L = static_cast<Eigen::Index>(off.size());
  if (op.rows() != L || op.cols() != L) throw std::invalid_argument("fock: operator size does not match local dimension");
  Vector x(L);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (std::size_t b : bases) {
      for (Eigen::Index l = 0; l < L; ++l) x(l) = m(static_cast<Eigen::Index>(b + off[l]), c);
      Vector y = op * x;
      for (Eigen::Index l = 0; l < L; ++l) m(static_cast<Eigen::Index>(b + off[l]), c) = y(l);
    }
  }
}

inline Matrix sandwich(const Matrix& rho, const Matrix& op, const FockSpace& space, std::span<const std::size_t> modes) {
  Matrix m = rho;
  apply_left(m, op, space, modes);
  Matrix t = m.adjoint();
  apply_left(t, op, space, modes);
  return t.adjoint();
}

}  // namespace detail

// ------------------------------------------------------------- operators --

inline Matrix annihilation(std::size_t cutoff) {
  const auto d = static_cast<Eigen::Index>(cutoff + 1);
  Matrix a = Matrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Exact matrix elements <m|D(alpha)|n> from the associated Laguerre form,
// truncated to the cutoff (no generator exponentiation involved).
inline Matrix displacement_matrix(cplx alpha, std::size_t cutoff) {
  const auto d = static_cast<Eigen::Index>(cutoff + 1);
  const double x = std::norm(alpha);
  const double env = std::exp(-0.5 * x);
  Matrix D(d, d);
  for (Eigen::Index m = 0; m < d; ++m) {
    for (Eigen::Index n = 0; n < d; ++n) {
      const auto um = static_cast<unsigned>(m);
      const auto un = static_cast<unsigned>(n);
      if (m >= n) {
        const double pre = std::sqrt(detail::factorial(un) / detail::factorial(um));
        D(m, n) = pre * std::pow(alpha, static_cast<int>(m - n)) * env * std::assoc_laguerre(un, um - un, x);
      } else {
        const double pre = std::sqrt(detail::factorial(um) / detail::factorial(un));
        D(m, n) = pre * std::pow(-std::conj(alpha), static_cast<int>(n - m)) * env * std::assoc_laguerre(um, un - um, x);
      }
    }
  }
  return D;
}

// Photon-loss Kraus family: K_k = sum_n sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k><n|.
inline std::vector<Matrix> loss_kraus(double eta, std::size_t cutoff) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("loss_kraus: eta must lie in [0, 1]");
  const std::size_t d = cutoff + 1;
  std::vector<Matrix> ks;
  ks.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    Matrix K = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t n = k; n < d; ++n) {
      const double amp = std::sqrt(detail::binomial(n, k) * std::pow(eta, static_cast<double>(n - k)) *
                                   std::pow(1.0 - eta, static_cast<double>(k)));
      K(static_cast<Eigen::Index>(n - k), static_cast<Eigen::Index>(n)) = amp;
    }
    ks.push_back(std::move(K));
  }
  return ks;
}

// Two-mode beamsplitter in the convention documented at the top of this file.
// Output amplitude with a mode above the cutoff is dropped.
inline Matrix beamsplitter_matrix(double t, std::size_t cutoff) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("beamsplitter: transmittance must lie in [0, 1]");
  const std::size_t d = cutoff + 1;
  const double st = std::sqrt(t);
  const double sr = std::sqrt(1.0 - t);
  const auto D = static_cast<Eigen::Index>(d * d);
  Matrix U = Matrix::Zero(D, D);
  for (std::size_t n = 0; n < d; ++n) {
    for (std::size_t m = 0; m < d; ++m) {
      const double norm_in = std::sqrt(detail::factorial(n) * detail::factorial(m));
      for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; j <= m; ++j) {
          const std::size_t p = i + j;
          const std::size_t q = n + m - p;
          if (p >= d || q >= d) continue;
          double c = detail::binomial(n, i) * detail::binomial(m, j);
          c *= std::pow(st, static_cast<double>(i)) * std::pow(sr, static_cast<double>(n - i));
          c *= std::pow(sr, static_cast<double>(j)) * std::pow(-st, static_cast<double>(m - j));
          c *= std::sqrt(detail::factorial(p) * detail::factorial(q)) / norm_in;
          U(static_cast<Eigen::Index>(p * d + q), static_cast<Eigen::Index>(n * d + m)) += c;
        }
      }
    }
  }
  return U;
}

// -------------------------------------------------------------- products --

inline FockStateVector tensor(const FockStateVector& a, const FockStateVector& b) {
  if (a.space().cutoff() != b.space().cutoff()) throw std::invalid_argument("tensor: mixed cutoffs are not supported");
  FockSpace s(a.space().modes() + b.space().modes(), a.space().cutoff());
  Vector v(static_cast<Eigen::Index>(s.dim()));
  const auto nb = b.amplitudes().size();
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i)
    v.segment(i * nb, nb) = a.amplitudes()(i) * b.amplitudes();
  return {s, std::move(v)};
}

inline FockDensityOperator to_density(const FockStateVector& psi) { return FockDensityOperator(psi); }

// Incoherent sum of unnormalized pure branches.
inline FockDensityOperator to_density(std::span<const FockStateVector> branches) {
  if (branches.empty()) throw std::invalid_argument("to_density: no branches");
  const FockSpace& s = branches.front().space();
  const auto d = static_cast<Eigen::Index>(s.dim());
  Matrix m = Matrix::Zero(d, d);
  for (const auto& b : branches) {
    if (!(b.space() == s)) throw std::invalid_argument("to_density: branches live in different spaces");
    m.noalias() += b.amplitudes() * b.amplitudes().adjoint();
  }
  return {s, std::move(m)};
}

// ---------------------------------------------------------------- states --

// Two-mode squeezed vacuum sqrt(1-l^2) sum_{n<=cutoff} (l e^{i phase})^n |n,n>.
inline FockStateVector make_tmsv(double lambda, std::size_t cutoff = kDefaultCutoff, double phase = 0.0) {
  if (cutoff == 0) throw std::invalid_argument("make_tmsv: cutoff 0 cannot hold the single-pair term");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw std::invalid_argument("make_tmsv: lambda must lie in [0, 1)");
  FockSpace s(2, cutoff);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(s.dim()));
  const double pre = std::sqrt(1.0 - lambda * lambda);
  const cplx step = lambda * std::polar(1.0, phase);
  cplx amp = pre;
  for (std::size_t n = 0; n <= cutoff; ++n) {
    v(static_cast<Eigen::Index>(s.encode({n, n}))) = amp;
    amp *= step;
  }
  return {s, std::move(v)};
}

// Single photon split across two paths: sqrt(t_b)|0,1> + sqrt(1-t_b) e^{i phi_b} |1,0>.
inline FockStateVector make_sppe(double t_b, double phi_b, std::size_t cutoff = kDefaultCutoff) {
  if (!(t_b >= 0.0 && t_b <= 1.0)) throw std::invalid_argument("make_sppe: t_b must lie in [0, 1]");
  FockSpace s(2, cutoff);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(s.dim()));
  v(static_cast<Eigen::Index>(s.encode({0, 1}))) = std::sqrt(t_b);
  v(static_cast<Eigen::Index>(s.encode({1, 0}))) = std::sqrt(1.0 - t_b) * std::polar(1.0, phi_b);
  return {s, std::move(v)};
}

// ------------------------------------------------------------ operations --

inline FockStateVector apply_operator(const FockStateVector& psi, const Matrix& op, std::span<const std::size_t> modes) {
  Matrix m = psi.amplitudes();
  detail::apply_left(m, op, psi.space(), modes);
  return {psi.space(), m.col(0)};
}

inline FockDensityOperator apply_operator(const FockDensityOperator& rho, const Matrix& op, std::span<const std::size_t> modes) {
  return {rho.space(), detail::sandwich(rho.matrix(), op, rho.space(), modes)};
}

template <class State>
State apply_beamsplitter(const State& state, std::size_t mode_i, std::size_t mode_j, double t_c,
                         TruncationReport* report = nullptr) {
  if (mode_i == mode_j) throw std::invalid_argument("apply_beamsplitter: modes must differ");
  const std::size_t modes[2] = {mode_i, mode_j};
  State out = apply_operator(state, beamsplitter_matrix(t_c, state.space().cutoff()), modes);
  if (report) {
    if constexpr (std::is_same_v<State, FockStateVector>)
      report->norm_deficit = state.squared_norm() - out.squared_norm();
    else
      report->norm_deficit = state.weight() - out.weight();
  }
  return out;
}

template <class State>
State apply_displacement(const State& state, std::size_t mode, cplx alpha) {
  if (std::abs(alpha) > 2.0) throw std::invalid_argument("apply_displacement: |alpha| above 2");
  const std::size_t modes[1] = {mode};
  return apply_operator(state, displacement_matrix(alpha, state.space().cutoff()), modes);
}

inline FockDensityOperator apply_kraus(const FockDensityOperator& rho, std::span<const Matrix> kraus, std::size_t mode) {
  const std::size_t modes[1] = {mode};
  const auto d = static_cast<Eigen::Index>(rho.space().dim());
  Matrix acc = Matrix::Zero(d, d);
  for (const auto& K : kraus) acc += detail::sandwich(rho.matrix(), K, rho.space(), modes);
  return {rho.space(), std::move(acc)};
}

inline FockDensityOperator apply_loss(const FockDensityOperator& rho, const LossChannel& channel) {
  if (!(channel.eta >= 0.0 && channel.eta <= 1.0)) throw std::invalid_argument("apply_loss: eta must lie in [0, 1]");
  rho.space().check_mode(channel.mode);
  const auto ks = loss_kraus(channel.eta, rho.space().cutoff());
  return apply_kraus(rho, ks, channel.mode);
}

// Pure-state form of apply_loss: one unnormalized branch per lost-photon count.
// Summing the branch projectors reproduces apply_loss on the density operator.
inline std::vector<FockStateVector> loss_branches(const FockStateVector& psi, const LossChannel& channel) {
  psi.space().check_mode(channel.mode);
  const std::size_t modes[1] = {channel.mode};
  std::vector<FockStateVector> out;
  for (const auto& K : loss_kraus(channel.eta, psi.space().cutoff())) {
    auto b = apply_operator(psi, K, modes);
    if (b.squared_norm() > 0.0) out.push_back(std::move(b));
  }
  return out;
}

inline FockDensityOperator partial_trace(const FockDensityOperator& rho, std::span<const std::size_t> keep_modes) {
  if (keep_modes.empty()) throw std::invalid_argument("partial_trace: keep list is empty");
  const FockSpace& s = rho.space();
  detail::check_distinct(keep_modes);
  std::vector<std::size_t> traced;
  for (std::size_t m = 0; m < s.modes(); ++m)
    if (std::find(keep_modes.begin(), keep_modes.end(), m) == keep_modes.end()) traced.push_back(m);
  for (std::size_t m : keep_modes) s.check_mode(m);

  FockSpace out(keep_modes.size(), s.cutoff());
  const auto keep_off = detail::local_offsets(s, keep_modes);
  const auto trace_off = traced.empty() ? std::vector<std::size_t>{0} : detail::local_offsets(s, traced);
  const auto d = static_cast<Eigen::Index>(out.dim());
  Matrix m = Matrix::Zero(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) {
      cplx acc = 0.0;
      for (std::size_t t : trace_off)
        acc += rho.matrix()(static_cast<Eigen::Index>(keep_off[r] + t), static_cast<Eigen::Index>(keep_off[c] + t));
      m(r, c) = acc;
    }
  return {out, std::move(m)};
}

inline FockDensityOperator partial_trace(const FockDensityOperator& rho, std::initializer_list<std::size_t> keep_modes) {
  return partial_trace(rho, std::span<const std::size_t>(keep_modes.begin(), keep_modes.size()));
}

// Unnormalized projection of one mode onto |n>; the result's weight is the
// probability of that outcome.
inline FockDensityOperator project_fock(const FockDensityOperator& rho, std::size_t mode, std::size_t n) {
  rho.space().check_mode(mode);
  if (n > rho.space().cutoff()) throw std::out_of_range("project_fock: n above cutoff");
  const auto d = static_cast<Eigen::Index>(rho.space().levels());
  Matrix P = Matrix::Zero(d, d);
  P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = 1.0;
  const std::size_t modes[1] = {mode};
  return apply_operator(rho, P, modes);
}

inline FockStateVector project_fock(const FockStateVector& psi, std::size_t mode, std::size_t n) {
  psi.space().check_mode(mode);
  if (n > psi.space().cutoff()) throw std::out_of_range("project_fock: n above cutoff");
  Vector v = psi.amplitudes();
  for (std::size_t idx = 0; idx < psi.space().dim(); ++idx)
    if (psi.space().occupation(idx, mode) != n) v(static_cast<Eigen::Index>(idx)) = 0.0;
  return {psi.space(), std::move(v)};
}

// Restricts a state to the modes in `keep` after the other modes have been
// projected onto the given occupations.
inline FockStateVector slice(const FockStateVector& psi, std::span<const std::size_t> keep,
                             std::span<const std::size_t> fixed_modes, std::span<const std::size_t> fixed_occupations) {
  if (fixed_modes.size() != fixed_occupations.size()) throw std::invalid_argument("slice: size mismatch");
  const FockSpace& s = psi.space();
  std::size_t base = 0;
  for (std::size_t k = 0; k < fixed_modes.size(); ++k) {
    if (fixed_occupations[k] > s.cutoff()) throw std::out_of_range("slice: occupation above cutoff");
    base += fixed_occupations[k] * s.stride(fixed_modes[k]);
  }
  if (keep.size() + fixed_modes.size() != s.modes()) throw std::invalid_argument("slice: every mode must be kept or fixed");
  const auto off = detail::local_offsets(s, keep);
  FockSpace out(keep.size(), s.cutoff());
  Vector v(static_cast<Eigen::Index>(out.dim()));
  for (std::size_t l = 0; l < off.size(); ++l) v(static_cast<Eigen::Index>(l)) = psi.amplitudes()(static_cast<Eigen::Index>(base + off[l]));
  return {out, std::move(v)};
}

// Probabilities Tr[(E_k (x) I) rho] for POVM elements acting on `modes`.
inline std::vector<double> measure_povm(const FockDensityOperator& rho, std::span<const Matrix> elements,
                                        std::span<const std::size_t> modes) {
  if (elements.empty()) throw std::invalid_argument("measure_povm: no elements");
  detail::check_distinct(modes);
  const auto off = detail::local_offsets(rho.space(), modes);
  const auto L = static_cast<Eigen::Index>(off.size());
  Matrix sum = Matrix::Zero(L, L);
  for (const auto& E : elements) {
    if (E.rows() != L || E.cols() != L) throw std::invalid_argument("measure_povm: element size does not match local dimension");
    if ((E - E.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("measure_povm: element is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(E, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("measure_povm: element is not positive semidefinite");
    sum += E;
  }
  if ((sum - Matrix::Identity(L, L)).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("measure_povm: elements do not sum to the identity");

  const auto bases = detail::base_indices(rho.space(), modes);
  std::vector<double> probs;
  probs.reserve(elements.size());
  for (const auto& E : elements) {
    cplx acc = 0.0;
    for (std::size_t b : bases)
      for (Eigen::Index l = 0; l < L; ++l)
        for (Eigen::Index lp = 0; lp < L; ++lp)
          acc += E(l, lp) * rho.matrix()(static_cast<Eigen::Index>(b + off[lp]), static_cast<Eigen::Index>(b + off[l]));
    probs.push_back(acc.real());
  }
  return probs;
}

}  // namespace pnpe::fock
