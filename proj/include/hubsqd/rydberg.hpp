#pragma once

// Statevector simulation of a globally driven Rydberg atom array.
//
//   H(t) = sum_j Omega(t) (e^{i phi} |g_j><r_j| + e^{-i phi} |r_j><g_j|)
//        - Delta(t) sum_j n_j + sum_{j<k} V_jk n_j n_k
//
// Units: time in microseconds. Schedule rates are given in MHz and converted
// to angular frequency (rad/us) by a factor 2 pi before entering H. The van
// der Waals matrix is returned directly in rad/us (C6 already carries 2 pi).
// Basis: qubit j is bit j of the amplitude index, |g> = 0 and |r> = 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hubsqd/common.hpp"
#include "hubsqd/models.hpp"

namespace hubsqd {

using cd = std::complex<double>;
using StateVector = std::vector<cd>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kC6 = 862690.0 * kTwoPi;  // rad/us * um^6
inline constexpr int kMaxAtoms = 24;

struct AtomGeometry {
  std::vector<std::array<double, 2>> positions;  // um

  std::size_t size() const noexcept { return positions.size(); }

  static AtomGeometry chain(int n, double spacing) {
    AtomGeometry g;
    for (int k = 0; k < n; ++k) g.positions.push_back({k * spacing, 0.0});
    return g;
  }
};

/// V_jk = C6 / |r_j - r_k|^6 in rad/us, zero diagonal.
inline Eigen::MatrixXd vdw_matrix(const AtomGeometry& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double dx = g.positions[static_cast<std::size_t>(j)][0] - g.positions[static_cast<std::size_t>(k)][0];
      const double dy = g.positions[static_cast<std::size_t>(j)][1] - g.positions[static_cast<std::size_t>(k)][1];
      const double r2 = dx * dx + dy * dy;
      if (r2 < 1e-24) throw std::domain_error("vdw_matrix: coincident atoms");
      v(j, k) = v(k, j) = kC6 / (r2 * r2 * r2);
    }
  return v;
}

/// Instantaneous global drive in angular units.
struct DriveValue {
  double omega;  // rad/us
  double delta;  // rad/us
  double phi;    // rad
};

/// The analog ansatz: Omega(s) = Omega_max sin^2(pi s), Delta(s) linear from
/// Delta_start to Delta_end, constant phi, with s = t / t_max.
struct PulseSchedule {
  double omega_max = 10.0;    // MHz
  double delta_start = -12.0; // MHz
  double delta_end = 12.0;    // MHz
  double phi = 0.0;           // rad
  double t_max = 0.5;         // us

  void validate() const {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::domain_error("PulseSchedule: t_max must be positive");
    if (!(omega_max >= 0.0)) throw std::domain_error("PulseSchedule: omega_max must be non-negative");
  }

  double duration() const noexcept { return t_max; }

  DriveValue operator()(double t) const noexcept {
    const double s = t / t_max;
    const double sn = std::sin(std::numbers::pi * s);
    return {kTwoPi * omega_max * sn * sn, kTwoPi * (delta_start + (delta_end - delta_start) * s), phi};
  }
};

/// Hardware-envelope checks. Returned as messages so deliberate
/// out-of-envelope studies stay possible.
inline std::vector<std::string> hardware_warnings(const PulseSchedule& s, const AtomGeometry& g) {
  std::vector<std::string> out;
  if (kTwoPi * s.omega_max > 15.8) out.push_back("Rabi amplitude " + format_double(kTwoPi * s.omega_max) + " rad/us exceeds 15.8 rad/us");
  const double dmax = kTwoPi * std::max(std::abs(s.delta_start), std::abs(s.delta_end));
  if (dmax > 125.0) out.push_back("detuning " + format_double(dmax) + " rad/us exceeds 125 rad/us");
  if (s.t_max > 4.0) out.push_back("duration " + format_double(s.t_max) + " us exceeds 4 us");
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t k = j + 1; k < g.size(); ++k) {
      const double r = std::hypot(g.positions[j][0] - g.positions[k][0], g.positions[j][1] - g.positions[k][1]);
      if (r < 4.0) {
        out.push_back("atom spacing " + format_double(r) + " um below 4 um");
        return out;
      }
    }
  return out;
}

/// dt = min(0.001 us, t_max / 500), rounded so the steps tile [0, t_max].
inline int default_steps(double t_max) {
  const double dt = std::min(0.001, t_max / 500.0);
  return std::max(1, static_cast<int>(std::ceil(t_max / dt - 1e-9)));
}

inline StateVector ground_product_state(int n) {
  if (n < 1 || n > kMaxAtoms) throw std::domain_error("atom count must lie in [1, 24]");
  StateVector psi(std::size_t{1} << n, cd{0.0, 0.0});
  psi[0] = 1.0;
  return psi;
}

inline double norm_squared(std::span<const cd> psi) {
  double s = 0.0;
  for (const auto& a : psi) s += std::norm(a);
  return s;
}

/// Second-order split step: half diagonal (detuning + interaction, exact),
/// full Rabi layer (exact per-qubit 2x2 rotations), half diagonal, all at the
/// step midpoint. `drive(t)` returns the DriveValue at time t.
template <class Drive>
StateVector evolve_drive(const Drive& drive, double duration, const AtomGeometry& g, StateVector psi, int steps,
                         double* norm_drift = nullptr) {
  const int n = static_cast<int>(g.size());
  if (n < 1 || n > kMaxAtoms) throw std::domain_error("evolve: atom count must lie in [1, 24]");
  if (psi.size() != (std::size_t{1} << n)) throw std::domain_error("evolve: state dimension does not match geometry");
  if (steps < 1) throw std::domain_error("evolve: steps must be >= 1");
  if (!(duration > 0.0)) throw std::domain_error("evolve: duration must be positive");

  const std::size_t dim = psi.size();
  const double n2_initial = norm_squared(psi);
  const Eigen::MatrixXd v = vdw_matrix(g);
  std::vector<double> interaction(dim, 0.0);
  std::vector<int> excitations(dim, 0);
  for (std::size_t s = 0; s < dim; ++s) {
    excitations[s] = popcount(s);
    double e = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!((s >> j) & 1U)) continue;
      for (int k = j + 1; k < n; ++k)
        if ((s >> k) & 1U) e += v(j, k);
    }
    interaction[s] = e;
  }

  const double dt = duration / steps;
  std::vector<cd> v_half(dim);
  for (std::size_t s = 0; s < dim; ++s) v_half[s] = std::polar(1.0, -interaction[s] * dt / 2);
  std::vector<cd> det_pow(static_cast<std::size_t>(n) + 1);

  auto half_diagonal = [&](double delta) {
    const cd w = std::polar(1.0, delta * dt / 2);  // e^{+i Delta dt/2} per excitation
    det_pow[0] = 1.0;
    for (int k = 1; k <= n; ++k) det_pow[static_cast<std::size_t>(k)] = det_pow[static_cast<std::size_t>(k - 1)] * w;
    for (std::size_t s = 0; s < dim; ++s) psi[s] *= v_half[s] * det_pow[static_cast<std::size_t>(excitations[s])];
  };

  for (int step = 0; step < steps; ++step) {
    const DriveValue d = drive((step + 0.5) * dt);
    half_diagonal(d.delta);
    if (d.omega != 0.0) {
      const double c = std::cos(d.omega * dt);
      const double sn = std::sin(d.omega * dt);
      const cd u_gr = cd{0.0, -sn} * std::polar(1.0, d.phi);
      const cd u_rg = cd{0.0, -sn} * std::polar(1.0, -d.phi);
      for (int j = 0; j < n; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t s = 0; s < dim; ++s) {
          if (s & bit) continue;
          const cd a0 = psi[s];
          const cd a1 = psi[s | bit];
          psi[s] = c * a0 + u_gr * a1;
          psi[s | bit] = u_rg * a0 + c * a1;
        }
      }
    }
    half_diagonal(d.delta);
  }

  const double n2 = norm_squared(psi);
  if (norm_drift) *norm_drift = std::abs(std::sqrt(n2) - std::sqrt(n2_initial));
  const double norm = std::sqrt(n2);
  for (auto& a : psi) a /= norm;
  return psi;
}

inline StateVector evolve(const PulseSchedule& schedule, const AtomGeometry& g, StateVector initial, int steps) {
  schedule.validate();
  return evolve_drive(schedule, schedule.t_max, g, std::move(initial), steps);
}

inline StateVector evolve(const PulseSchedule& schedule, const AtomGeometry& g, StateVector initial) {
  schedule.validate();
  return evolve_drive(schedule, schedule.t_max, g, std::move(initial), default_steps(schedule.t_max));
}

/// Computational-basis measurement: i.i.d. draws from |amplitude|^2.
inline std::vector<Bitstring> sample(std::span<const cd> psi, int n_qubits, std::size_t shots, std::uint64_t seed) {
  if (psi.size() != (std::size_t{1} << n_qubits)) throw std::domain_error("sample: state dimension does not match qubit count");
  std::vector<Bitstring> out;
  if (shots == 0) return out;
  std::vector<double> cdf(psi.size());
  double acc = 0.0;
  for (std::size_t s = 0; s < psi.size(); ++s) {
    acc += std::norm(psi[s]);
    cdf[s] = acc;
  }
  if (!(acc > 0.0)) throw std::domain_error("sample: state has zero norm");
  Rng rng(seed);
  out.reserve(shots);
  for (std::size_t k = 0; k < shots; ++k) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto idx = static_cast<std::uint64_t>(it - cdf.begin());
    out.push_back(Bitstring{idx, n_qubits});
  }
  return out;
}

/// Uniform bitstrings of length n: the random-sampling baseline.
inline std::vector<Bitstring> sample_uniform(int n_qubits, std::size_t shots, std::uint64_t seed) {
  if (n_qubits < 1 || n_qubits > 63) throw std::domain_error("sample_uniform: qubit count must lie in [1, 63]");
  Rng rng(seed);
  std::vector<Bitstring> out;
  out.reserve(shots);
  const std::uint64_t mask = (std::uint64_t{1} << n_qubits) - 1;
  for (std::size_t k = 0; k < shots; ++k) out.push_back(Bitstring{rng() & mask, n_qubits});
  return out;
}

}  // namespace hubsqd
