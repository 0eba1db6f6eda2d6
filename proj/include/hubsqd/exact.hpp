#pragma once

// Reference ground-state solvers: dense diagonalization for small operators,
// Lanczos with full reorthogonalization above the dense cap.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hubsqd/common.hpp"
#include "hubsqd/sparse.hpp"

namespace hubsqd {

inline constexpr std::size_t kDenseCap = 2000;

struct Eigenpair {
  double energy = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
  int iterations = 0;
};

inline Eigenpair dense_ground_state(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw std::domain_error("dense_ground_state: need a non-empty square matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense_ground_state: eigensolver failed");
  Eigenpair out;
  out.energy = es.eigenvalues()(0);
  const Eigen::VectorXd v = es.eigenvectors().col(0);
  out.vector.assign(v.data(), v.data() + v.size());
  out.residual = (m * v - out.energy * v).norm();
  return out;
}

/// Full ascending spectrum; used by tests and small-system reports.
inline Eigen::VectorXd dense_spectrum(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

template <SymmetricOperator Op>
Eigen::MatrixXd materialize(const Op& op) {
  const std::size_t n = op.dim();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(std::span<const double>(e), std::span<double>(col));
    for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    e[j] = 0.0;
  }
  return 0.5 * (m + m.transpose());
}

inline Eigen::MatrixXd materialize(const CsrMatrix& m) { return m.to_dense(); }

inline std::vector<double> random_unit_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  double norm = 0.0;
  for (auto& x : v) {
    x = uniform01(rng) - 0.5;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

struct LanczosOptions {
  double tol = 1e-7;         // residual norm ||Hx - Ex||
  std::size_t krylov_dim = 120;
  int max_restarts = 60;
  int max_breakdowns = 3;
  std::uint64_t seed = 0x1a2b3c4dULL;
};

/// Explicitly restarted Lanczos with full reorthogonalization.
template <SymmetricOperator Op>
Eigenpair lanczos_ground_state(const Op& op, const LanczosOptions& opt = {}) {
  const std::size_t n = op.dim();
  if (n == 0) throw std::domain_error("lanczos_ground_state: empty operator");
  using Vec = Eigen::VectorXd;
  auto apply = [&](const Vec& x, Vec& y) {
    y.resize(x.size());
    op.apply(std::span<const double>(x.data(), n), std::span<double>(y.data(), n));
  };

  const std::size_t m_max = std::min(n, opt.krylov_dim);
  std::vector<double> start = random_unit_vector(n, opt.seed);
  Vec q = Eigen::Map<Vec>(start.data(), static_cast<Eigen::Index>(n));
  double best_residual = INFINITY;
  int breakdowns = 0;
  int total_iters = 0;

  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    std::vector<Vec> basis;
    std::vector<double> alpha, beta;
    basis.push_back(q / q.norm());
    Vec w;
    bool invariant = false;
    for (std::size_t j = 0; j < m_max; ++j) {
      apply(basis[j], w);
      ++total_iters;
      alpha.push_back(basis[j].dot(w));
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) w -= b.dot(w) * b;
      const double bnorm = w.norm();
      if (j + 1 == m_max || bnorm < 1e-12) {
        invariant = bnorm < 1e-12;
        break;
      }
      beta.push_back(bnorm);
      basis.push_back(w / bnorm);
    }
    const std::size_t m = alpha.size();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      t(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = alpha[k];
      if (k + 1 < m) {
        t(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k + 1)) = beta[k];
        t(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k)) = beta[k];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Vec s = es.eigenvectors().col(0);
    Vec x = Vec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < m; ++k) x += s(static_cast<Eigen::Index>(k)) * basis[k];
    x.normalize();
    apply(x, w);
    const double energy = x.dot(w);
    const double residual = (w - energy * x).norm();
    best_residual = std::min(best_residual, residual);
    if (residual <= opt.tol) {
      Eigenpair out;
      out.energy = energy;
      out.vector.assign(x.data(), x.data() + n);
      out.residual = residual;
      out.iterations = total_iters;
      return out;
    }
    if (invariant) {
      // The Krylov space closed without resolving the residual.
      if (++breakdowns > opt.max_breakdowns)
        throw convergence_error("lanczos_ground_state: repeated breakdown", best_residual);
      auto fresh = random_unit_vector(n, derive_seed(opt.seed, static_cast<std::uint64_t>(breakdowns)));
      q = x + 1e-3 * Eigen::Map<Vec>(fresh.data(), static_cast<Eigen::Index>(n));
      continue;
    }
    q = x;
  }
  throw convergence_error("lanczos_ground_state: restart budget exhausted", best_residual);
}

/// Dense path up to kDenseCap, Lanczos beyond it.
template <class Op>
Eigenpair exact_ground_state(const Op& op, std::uint64_t seed = 0x1a2b3c4dULL) {
  if (op.dim() <= kDenseCap) return dense_ground_state(materialize(op));
  LanczosOptions opt;
  opt.seed = seed;
  return lanczos_ground_state(op, opt);
}

/// |<a|b>|^2 for normalized states.
template <class T, class U>
double fidelity(std::span<const T> a, std::span<const U> b) {
  if (a.size() != b.size()) throw std::domain_error("fidelity: dimension mismatch");
  std::complex<double> ov{};
  for (std::size_t k = 0; k < a.size(); ++k) ov += std::conj(std::complex<double>(a[k])) * std::complex<double>(b[k]);
  const double f = std::norm(ov);
  return std::clamp(f, 0.0, 1.0);
}

template <class T, class U>
double fidelity(const std::vector<T>& a, const std::vector<U>& b) {
  return fidelity(std::span<const T>(a), std::span<const U>(b));
}

}  // namespace hubsqd
