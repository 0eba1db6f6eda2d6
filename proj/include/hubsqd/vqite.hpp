#pragma once

// Variational imaginary-time evolution of the analog pulse ansatz.
//
// McLachlan's principle gives A theta_dot = C with
//   A_ij = Re <d_i psi | d_j psi>,   C_i = -Re <d_i psi | H | psi>.
// The analog ansatz has no parameter-shift rule, so tangents come from
// central finite differences and are projected orthogonal to |psi> to remove
// the global-phase direction.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hubsqd/exact.hpp"
#include "hubsqd/models.hpp"
#include "hubsqd/rydberg.hpp"
#include "hubsqd/sparse.hpp"

namespace hubsqd {

/// (Omega_max [MHz], Delta_start [MHz], Delta_end [MHz], phi [rad], t_max [us])
inline constexpr std::size_t kThetaSize = 5;
using Theta = std::array<double, kThetaSize>;

inline constexpr Theta kInitialTheta{10.0, -12.0, 12.0, 0.0, 0.5};
inline constexpr Theta kDefaultFdEpsilon{0.01, 0.01, 0.01, 0.01, 0.005};

inline PulseSchedule schedule_from(std::span<const double> theta) {
  if (theta.size() != kThetaSize) throw std::domain_error("schedule_from: theta must have 5 components");
  PulseSchedule s{theta[0], theta[1], theta[2], theta[3], theta[4]};
  if (!(s.t_max > 0.0)) throw std::domain_error("schedule_from: t_max must be positive");
  return s;
}

/// theta -> evolved state from |g...g> on a fixed geometry.
class AnalogAnsatz {
 public:
  explicit AnalogAnsatz(AtomGeometry geometry) : geometry_(std::move(geometry)) {
    if (geometry_.size() < 1 || geometry_.size() > static_cast<std::size_t>(kMaxAtoms))
      throw std::domain_error("AnalogAnsatz: atom count must lie in [1, 24]");
  }

  StateVector operator()(std::span<const double> theta) const {
    const PulseSchedule s = schedule_from(theta);
    return evolve(s, geometry_, ground_product_state(qubits()));
  }

  int qubits() const noexcept { return static_cast<int>(geometry_.size()); }
  const AtomGeometry& geometry() const noexcept { return geometry_; }

 private:
  AtomGeometry geometry_;
};

inline double expectation(const CsrMatrix& h, std::span<const cd> psi) {
  std::vector<cd> hpsi(psi.size());
  h.apply(psi, std::span<cd>(hpsi));
  cd acc{};
  for (std::size_t k = 0; k < psi.size(); ++k) acc += std::conj(psi[k]) * hpsi[k];
  return acc.real();
}

struct McLachlanSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd C;
  double energy = 0.0;
};

/// `state_of(theta)` must return a normalized state for any theta near the
/// input. Symmetrized A; tangents are gauge-projected.
template <class StateFn>
McLachlanSystem mclachlan_system(const StateFn& state_of, std::span<const double> theta, const CsrMatrix& h,
                                 std::span<const double> fd_epsilon) {
  const std::size_t p = theta.size();
  if (fd_epsilon.size() != p) throw std::domain_error("mclachlan_system: one finite-difference step per parameter");
  for (double e : fd_epsilon)
    if (!(e > 0.0)) throw std::domain_error("mclachlan_system: finite-difference steps must be positive");

  const StateVector psi = state_of(theta);
  if (psi.size() != h.dim()) throw std::domain_error("mclachlan_system: Hamiltonian and state dimensions differ");
  const std::size_t dim = psi.size();
  std::vector<cd> hpsi(dim);
  h.apply(std::span<const cd>(psi), std::span<cd>(hpsi));

  std::vector<StateVector> tangents(p);
  std::vector<double> shifted(theta.begin(), theta.end());
  for (std::size_t i = 0; i < p; ++i) {
    shifted[i] = theta[i] + fd_epsilon[i];
    const StateVector plus = state_of(std::span<const double>(shifted));
    shifted[i] = theta[i] - fd_epsilon[i];
    const StateVector minus = state_of(std::span<const double>(shifted));
    shifted[i] = theta[i];
    StateVector t(dim);
    cd overlap{};
    for (std::size_t k = 0; k < dim; ++k) {
      t[k] = (plus[k] - minus[k]) / (2.0 * fd_epsilon[i]);
      if (!std::isfinite(t[k].real()) || !std::isfinite(t[k].imag()))
        throw std::domain_error("mclachlan_system: non-finite derivative");
      overlap += std::conj(psi[k]) * t[k];
    }
    for (std::size_t k = 0; k < dim; ++k) t[k] -= overlap * psi[k];
    tangents[i] = std::move(t);
  }

  McLachlanSystem sys;
  const auto pi = static_cast<Eigen::Index>(p);
  sys.A.resize(pi, pi);
  sys.C.resize(pi);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      cd acc{};
      for (std::size_t k = 0; k < dim; ++k) acc += std::conj(tangents[i][k]) * tangents[j][k];
      sys.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc.real();
      sys.A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = acc.real();
    }
    cd c{};
    for (std::size_t k = 0; k < dim; ++k) c += std::conj(tangents[i][k]) * hpsi[k];
    sys.C(static_cast<Eigen::Index>(i)) = -c.real();
  }
  cd e{};
  for (std::size_t k = 0; k < dim; ++k) e += std::conj(psi[k]) * hpsi[k];
  sys.energy = e.real();
  return sys;
}

struct VqiteConfig {
  double d_tau = 0.1;
  int max_steps = 40;
  Theta fd_epsilon = kDefaultFdEpsilon;
  std::optional<double> regularization;  // default: 1e-6 * trace(A) / dim(A)
  double stop_tolerance = 1e-6;          // on ||theta_dot|| * d_tau
  SpinHamiltonianSpec target;

  void validate() const {
    if (!(d_tau > 0.0)) throw std::domain_error("VqiteConfig: d_tau must be positive");
    if (max_steps < 0) throw std::domain_error("VqiteConfig: max_steps must be non-negative");
    if (regularization && !(*regularization >= 0.0)) throw std::domain_error("VqiteConfig: regularization must be >= 0");
    for (double e : fd_epsilon)
      if (!(e > 0.0)) throw std::domain_error("VqiteConfig: fd_epsilon must be positive");
  }
};

struct StepResult {
  Theta theta;
  Theta theta_dot;
  double energy = 0.0;     // E at the updated theta
  double condition = 0.0;  // of A before regularization
  bool flagged = false;    // least-squares fallback was used
};

/// theta_dot solved from (A + lambda I) theta_dot = C. With lambda = 0 and a
/// singular A the minimum-norm least-squares solution is used and flagged.
inline Theta solve_mclachlan(const McLachlanSystem& sys, std::optional<double> regularization, double* condition,
                             bool* flagged) {
  const auto p = sys.A.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.A, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double emin = es.eigenvalues().cwiseAbs().minCoeff();
  if (condition) *condition = emin > 0.0 ? emax / emin : INFINITY;
  const double lambda = regularization.value_or(1e-6 * sys.A.trace() / static_cast<double>(p));
  Eigen::VectorXd x;
  bool fallback = false;
  if (lambda > 0.0) {
    const Eigen::MatrixXd reg = sys.A + lambda * Eigen::MatrixXd::Identity(p, p);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    x = ldlt.solve(sys.C);
    fallback = ldlt.info() != Eigen::Success || !x.allFinite();
  } else {
    fallback = !(emin > 1e-12 * std::max(emax, 1e-300));
    if (!fallback) x = sys.A.ldlt().solve(sys.C);
  }
  if (fallback) x = sys.A.completeOrthogonalDecomposition().solve(sys.C);
  if (flagged) *flagged = fallback;
  Theta out{};
  for (Eigen::Index i = 0; i < p; ++i) out[static_cast<std::size_t>(i)] = x(i);
  return out;
}

template <class StateFn>
StepResult vqite_step(const StateFn& state_of, const Theta& theta, const VqiteConfig& cfg, const CsrMatrix& h) {
  const McLachlanSystem sys = mclachlan_system(state_of, theta, h, cfg.fd_epsilon);
  StepResult r;
  r.theta_dot = solve_mclachlan(sys, cfg.regularization, &r.condition, &r.flagged);
  for (std::size_t i = 0; i < kThetaSize; ++i) r.theta[i] = theta[i] + cfg.d_tau * r.theta_dot[i];
  const StateVector next = state_of(r.theta);
  r.energy = expectation(h, next);
  return r;
}

struct VqiteRecord {
  int step = 0;
  Theta theta{};
  double energy = 0.0;
  std::optional<double> fidelity;
  double condition = 0.0;
  bool flagged = false;
};

struct VqiteTrace {
  std::vector<VqiteRecord> records;  // records[0] is the starting point
  std::optional<double> exact_energy;
};

struct VqiteResult {
  Theta best_theta{};
  double best_energy = 0.0;
  VqiteTrace trace;
  bool reached_tolerance = false;
  // Stopped on the step tolerance, or settled: the last step changed E by at
  // most 1e-3 |E| and no step needed the least-squares fallback.
  bool converged = false;
};

/// Ground state of the target used for fidelity tracking; empty above the cap.
inline std::optional<Eigenpair> target_ground_state(const SpinHamiltonianSpec& target, int max_qubits = 14) {
  if (target.sites > max_qubits) return std::nullopt;
  return exact_ground_state(build_spin_matrix(target));
}

template <class StateFn>
VqiteResult run_vqite(const StateFn& state_of, const VqiteConfig& cfg, const Theta& theta0,
                      const std::optional<Eigenpair>& exact = std::nullopt) {
  cfg.validate();
  const CsrMatrix h = build_spin_matrix(cfg.target);
  auto record_for = [&](int step, const Theta& th, const StateVector& psi) {
    VqiteRecord rec;
    rec.step = step;
    rec.theta = th;
    rec.energy = expectation(h, psi);
    if (exact) rec.fidelity = fidelity(std::span<const double>(exact->vector), std::span<const cd>(psi));
    return rec;
  };

  VqiteResult out;
  if (exact) out.trace.exact_energy = exact->energy;
  out.trace.records.push_back(record_for(0, theta0, state_of(theta0)));
  out.best_theta = theta0;
  out.best_energy = out.trace.records.back().energy;

  Theta theta = theta0;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    const StepResult r = vqite_step(state_of, theta, cfg, h);
    theta = r.theta;
    VqiteRecord rec = record_for(step, theta, state_of(theta));
    rec.condition = r.condition;
    rec.flagged = r.flagged;
    out.trace.records.push_back(rec);
    if (rec.energy < out.best_energy) {
      out.best_energy = rec.energy;
      out.best_theta = theta;
    }
    double norm = 0.0;
    for (double v : r.theta_dot) norm += v * v;
    if (std::sqrt(norm) * cfg.d_tau < cfg.stop_tolerance) {
      out.reached_tolerance = true;
      break;
    }
  }
  const auto& recs = out.trace.records;
  bool any_flagged = false;
  for (const auto& r : recs) any_flagged = any_flagged || r.flagged;
  const bool settled = recs.size() >= 2 && !any_flagged &&
                       std::abs(recs.back().energy - recs[recs.size() - 2].energy) <= 1e-3 * std::abs(recs.back().energy);
  out.converged = out.reached_tolerance || settled;
  return out;
}

/// theta_i(L) = a_i + b_i exp(-c_i L) per component.
struct SaturatingFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double operator()(double L) const { return a + b * std::exp(-c * L); }
};

struct HyperparameterModel {
  std::array<SaturatingFit, kThetaSize> components{};
  bool degenerate = false;
  Theta fallback{};
  std::string warning;
  double largest_fitted_L = 0.0;

  Theta operator()(int L) const {
    if (degenerate) return fallback;
    Theta out{};
    for (std::size_t i = 0; i < kThetaSize; ++i) out[i] = components[i](L);
    return out;
  }
  Theta asymptote() const {
    if (degenerate) return fallback;
    Theta out{};
    for (std::size_t i = 0; i < kThetaSize; ++i) out[i] = components[i].a;
    return out;
  }
};

namespace detail {

// Linear least squares for (a, b) at fixed c; returns the residual sum.
inline double fit_ab(std::span<const double> L, std::span<const double> y, double c, double& a, double& b) {
  const std::size_t n = L.size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    X(static_cast<Eigen::Index>(k), 0) = 1.0;
    X(static_cast<Eigen::Index>(k), 1) = std::exp(-c * L[k]);
    Y(static_cast<Eigen::Index>(k)) = y[k];
  }
  const Eigen::VectorXd coef = X.completeOrthogonalDecomposition().solve(Y);
  a = coef(0);
  b = coef(1);
  return (X * coef - Y).squaredNorm();
}

inline SaturatingFit fit_saturating(std::span<const double> L, std::span<const double> y) {
  // Golden-section refinement around the best point of a log-spaced scan.
  constexpr double c_lo = 1e-3, c_hi = 5.0;
  double best_c = c_lo, best_r = INFINITY, a = 0, b = 0;
  constexpr int grid = 200;
  for (int k = 0; k <= grid; ++k) {
    const double c = c_lo * std::pow(c_hi / c_lo, static_cast<double>(k) / grid);
    const double r = fit_ab(L, y, c, a, b);
    if (r < best_r) {
      best_r = r;
      best_c = c;
    }
  }
  const double step = std::pow(c_hi / c_lo, 1.0 / grid);
  double lo = std::max(c_lo, best_c / step), hi = std::min(c_hi, best_c * step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
    if (fit_ab(L, y, m1, a, b) < fit_ab(L, y, m2, a, b))
      hi = m2;
    else
      lo = m1;
  }
  SaturatingFit f;
  f.c = 0.5 * (lo + hi);
  if (fit_ab(L, y, f.c, f.a, f.b) > best_r) {
    f.c = best_c;
    fit_ab(L, y, f.c, f.a, f.b);
  }
  return f;
}

}  // namespace detail

/// Fits each hyperparameter against system size. Needs at least three
/// distinct sizes; otherwise returns the last (largest-L) theta with a warning.
inline HyperparameterModel extrapolate_hyperparameters(std::vector<std::pair<int, Theta>> fits) {
  HyperparameterModel m;
  if (fits.empty()) throw std::domain_error("extrapolate_hyperparameters: no fits given");
  std::sort(fits.begin(), fits.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<int> distinct;
  for (const auto& f : fits)
    if (distinct.empty() || distinct.back() != f.first) distinct.push_back(f.first);
  m.largest_fitted_L = fits.back().first;
  if (distinct.size() < 3) {
    m.degenerate = true;
    m.fallback = fits.back().second;
    m.warning = "fewer than 3 distinct system sizes; using the largest-L hyperparameters";
    return m;
  }
  std::vector<double> L;
  for (const auto& f : fits) L.push_back(f.first);
  for (std::size_t i = 0; i < kThetaSize; ++i) {
    std::vector<double> y;
    for (const auto& f : fits) y.push_back(f.second[i]);
    m.components[i] = detail::fit_saturating(L, y);
  }
  return m;
}

}  // namespace hubsqd
