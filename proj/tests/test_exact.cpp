#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "hubsqd/exact.hpp"
#include "hubsqd/fock.hpp"
#include "hubsqd/models.hpp"

using namespace hubsqd;

namespace {

CsrMatrix random_sparse_symmetric(std::size_t n, double density, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 4.0 * uniform01(rng) - 2.0});
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < density) {
        const double v = uniform01(rng) - 0.5;
        t.push_back({i, j, v});
        t.push_back({j, i, v});
      }
  }
  return CsrMatrix::from_triplets(n, std::move(t));
}

}  // namespace

TEST(Dense, PauliX) {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  const auto gs = dense_ground_state(m);
  EXPECT_DOUBLE_EQ(gs.energy, -1.0);
  EXPECT_NEAR(std::abs(gs.vector[0]), 1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(gs.vector[0], -gs.vector[1], 1e-14);
}

TEST(Sparse, TripletsSumDuplicatesAndApply) {
  const auto m = CsrMatrix::from_triplets(3, {{0, 1, 1.0}, {1, 0, 1.0}, {0, 1, 0.5}, {1, 0, 0.5}, {2, 2, -3.0}});
  EXPECT_EQ(m.at(0, 1), 1.5);
  EXPECT_TRUE(m.is_symmetric());
  std::vector<double> x{1, 2, 3}, y(3);
  m.apply(std::span<const double>(x), std::span<double>(y));
  EXPECT_EQ(y, (std::vector<double>{3.0, 1.5, -9.0}));
  EXPECT_EQ(m.diagonal(), (std::vector<double>{0.0, 0.0, -3.0}));
}

TEST(Lanczos, MatchesDenseOnRandomMatrices) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = random_sparse_symmetric(500, 0.02, seed);
    const double dense = dense_spectrum(m.to_dense())(0);
    LanczosOptions opt;
    opt.seed = seed;
    const auto gs = lanczos_ground_state(m, opt);
    EXPECT_NEAR(gs.energy, dense, 1e-8);
    EXPECT_LE(gs.residual, opt.tol);
  }
}

TEST(Lanczos, MatchesDenseOnHubbardSector) {
  const auto spec = hubbard_hamiltonian(reference_hubbard(6));
  const auto basis = enumerate_sector(6, 3, 3);
  const auto h = build_hubbard_matrix(spec, basis);
  const auto dense = dense_ground_state(h.to_dense());
  const auto lz = lanczos_ground_state(h, LanczosOptions{});
  EXPECT_NEAR(lz.energy, dense.energy, 1e-9);
  EXPECT_GT(fidelity(lz.vector, dense.vector), 1 - 1e-8);
}

TEST(Lanczos, ResidualIsHonest) {
  const auto m = random_sparse_symmetric(300, 0.05, 9);
  const auto gs = lanczos_ground_state(m, LanczosOptions{});
  std::vector<double> hx(gs.vector.size());
  m.apply(std::span<const double>(gs.vector), std::span<double>(hx));
  double r = 0.0;
  for (std::size_t k = 0; k < hx.size(); ++k) r += std::pow(hx[k] - gs.energy * gs.vector[k], 2);
  EXPECT_LE(std::sqrt(r), 1.01e-7);
}

TEST(Fidelity, Properties) {
  const auto a = random_unit_vector(64, 1);
  const auto b = random_unit_vector(64, 2);
  EXPECT_NEAR(fidelity(a, a), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(fidelity(a, b), fidelity(b, a));
  std::vector<std::complex<double>> phased(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) phased[k] = std::polar(a[k], 0.7);
  EXPECT_NEAR(fidelity(a, phased), 1.0, 1e-14);
  EXPECT_THROW(fidelity(a, random_unit_vector(32, 3)), std::domain_error);
}
