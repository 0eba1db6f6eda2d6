#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "hubsqd/common.hpp"
#include "hubsqd/exact.hpp"
#include "hubsqd/sparse.hpp"

namespace hubsqd {

struct DavidsonOptions {
  double tol = 1e-9;  // residual norm ||Hv - Ev||
  std::size_t max_subspace = 30;
  std::size_t restart_keep = 4;
  std::size_t max_iterations = 5000;
  std::uint64_t seed = 0;
};

/// Lowest eigenpair of a real symmetric operator. Block size 1, diagonal
/// (D - E)^-1 preconditioner, thick restart that keeps the lowest Ritz
/// vectors when the search space reaches max_subspace.
template <SymmetricOperator Op>
Eigenpair davidson_ground_state(const Op& op, const DavidsonOptions& opt = {}) {
  using Vec = Eigen::VectorXd;
  using Mat = Eigen::MatrixXd;
  using Index = Eigen::Index;
  const std::size_t n = op.dim();
  if (n == 0) throw std::domain_error("davidson_ground_state: empty operator");
  if (opt.max_subspace < 2 || opt.restart_keep < 1 || opt.restart_keep >= opt.max_subspace)
    throw std::domain_error("davidson_ground_state: need 1 <= restart_keep < max_subspace");

  const std::vector<double> diag = op.diagonal();
  const Index nn = static_cast<Index>(n);
  const Index cap = static_cast<Index>(std::min(n, opt.max_subspace));
  Mat V(nn, cap), AV(nn, cap);
  Index m = 0;
  Rng rng(opt.seed);

  auto apply = [&](const Vec& x, Vec& y) {
    y.resize(nn);
    op.apply(std::span<const double>(x.data(), n), std::span<double>(y.data(), n));
  };
  auto random_vec = [&]() {
    Vec r(nn);
    for (Index i = 0; i < nn; ++i) r(i) = uniform01(rng) - 0.5;
    return r;
  };
  // Orthogonalize against V and append; false when nothing independent is left.
  auto append = [&](Vec t) {
    for (int pass = 0; pass < 2; ++pass)
      if (m > 0) t -= V.leftCols(m) * (V.leftCols(m).transpose() * t);
    const double norm = t.norm();
    if (norm < 1e-10) return false;
    V.col(m) = t / norm;
    Vec at;
    apply(V.col(m), at);
    AV.col(m) = at;
    ++m;
    return true;
  };

  append(random_vec());
  double best_residual = INFINITY;
  Vec x(nn), ax(nn), r(nn);

  for (std::size_t iter = 1; iter <= opt.max_iterations; ++iter) {
    Mat T = V.leftCols(m).transpose() * AV.leftCols(m);
    T = 0.5 * (T + T.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(T);
    const double theta = es.eigenvalues()(0);
    const Vec s = es.eigenvectors().col(0);
    x = V.leftCols(m) * s;
    ax = AV.leftCols(m) * s;
    r = ax - theta * x;
    const double res = r.norm();
    best_residual = std::min(best_residual, res);

    const bool exhausted = static_cast<std::size_t>(m) == n;
    if (res <= opt.tol || exhausted) {
      Eigenpair out;
      const double norm = x.norm();
      out.energy = theta;
      out.vector.resize(n);
      for (std::size_t i = 0; i < n; ++i) out.vector[i] = x(static_cast<Index>(i)) / norm;
      out.residual = res;
      out.iterations = static_cast<int>(iter);
      return out;
    }

    Vec t(nn);
    for (Index i = 0; i < nn; ++i) {
      double den = diag[static_cast<std::size_t>(i)] - theta;
      if (std::abs(den) < 1e-8) den = den < 0 ? -1e-8 : 1e-8;
      t(i) = -r(i) / den;
    }

    if (m == cap) {
      const Index keep = std::min<Index>(static_cast<Index>(opt.restart_keep), m);
      const Mat S = es.eigenvectors().leftCols(keep);
      const Mat Vk = V.leftCols(m) * S;
      const Mat AVk = AV.leftCols(m) * S;
      V.leftCols(keep) = Vk;
      AV.leftCols(keep) = AVk;
      m = keep;
    }

    if (!append(std::move(t))) {
      // Preconditioned residual lies in the search space; widen it at random.
      bool grew = false;
      for (int attempt = 0; attempt < 4 && !grew; ++attempt) grew = append(random_vec());
      if (!grew) break;
    }
  }
  throw convergence_error("davidson_ground_state: iteration budget exhausted", best_residual);
}

}  // namespace hubsqd
