#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "hubsqd/exact.hpp"
#include "hubsqd/fock.hpp"
#include "hubsqd/models.hpp"

using namespace hubsqd;

namespace {

// c^dagger_i c_j on one channel by literal Jordan-Wigner string evaluation:
// c_j picks up (-1)^(occupied below j), then c^dagger_i (-1)^(occupied below i).
std::optional<std::pair<std::uint64_t, int>> jw_hop(std::uint64_t m, int i, int j) {
  if (!((m >> j) & 1U)) return std::nullopt;
  int sign = (std::popcount(m & ((std::uint64_t{1} << j) - 1)) & 1) ? -1 : 1;
  m &= ~(std::uint64_t{1} << j);
  if ((m >> i) & 1U) return std::nullopt;
  sign *= (std::popcount(m & ((std::uint64_t{1} << i) - 1)) & 1) ? -1 : 1;
  return std::pair{m | (std::uint64_t{1} << i), sign};
}

// Full Fock-space Hubbard matrix from Jordan-Wigner products over all 2L
// orbitals (up 0..L-1, down L..2L-1).
Eigen::MatrixXd fock_space_hubbard(const FermionHamiltonianSpec& spec) {
  const int M = 2 * spec.sites;
  const std::size_t dim = std::size_t{1} << M;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    for (int p = 0; p < spec.sites; ++p)
      if (((s >> p) & 1U) && ((s >> (p + spec.sites)) & 1U)) h(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) += spec.onsite_U;
    for (const auto& hop : spec.hops) {
      const int off = hop.spin == Spin::up ? 0 : spec.sites;
      for (auto [a, b] : {std::pair{hop.i, hop.j}, std::pair{hop.j, hop.i}})
        if (auto r = jw_hop(s, a + off, b + off))
          h(static_cast<Eigen::Index>(r->first), static_cast<Eigen::Index>(s)) += hop.t * r->second;
    }
  }
  return h;
}

double sector_energy_from_fock(const FermionHamiltonianSpec& spec, int nu, int nd) {
  const Eigen::MatrixXd h = fock_space_hubbard(spec);
  const std::uint64_t low = (std::uint64_t{1} << spec.sites) - 1;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index s = 0; s < h.rows(); ++s)
    if (std::popcount(static_cast<std::uint64_t>(s) & low) == nu && std::popcount(static_cast<std::uint64_t>(s) >> spec.sites) == nd) keep.push_back(s);
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = 0; b < keep.size(); ++b) sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = h(keep[a], keep[b]);
  return dense_spectrum(sub)(0);
}

}  // namespace

TEST(SectorBasis, Dimensions) {
  EXPECT_EQ(enumerate_sector(4, 2, 2).size(), 36U);
  const auto vac = enumerate_sector(2, 0, 0);
  ASSERT_EQ(vac.size(), 1U);
  EXPECT_EQ(vac[0], (Determinant{0, 0}));
  EXPECT_EQ(enumerate_sector(6, 3, 3).size(), 400U);
  for (int L = 0; L <= 8; ++L)
    for (int nu = 0; nu <= L; ++nu)
      for (int nd = 0; nd <= L; ++nd) ASSERT_EQ(enumerate_sector(L, nu, nd).size(), binomial(L, nu) * binomial(L, nd));
}

TEST(SectorBasis, CanonicalOrderAndIndexInverse) {
  for (auto [L, nu, nd] : {std::tuple{4, 2, 2}, std::tuple{5, 3, 2}, std::tuple{6, 1, 4}}) {
    const auto basis = enumerate_sector(L, nu, nd);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (k > 0) {
        ASSERT_LT(basis[k - 1], basis[k]);
      }
      ASSERT_EQ(basis[k].n_up(), nu);
      ASSERT_EQ(basis[k].n_dn(), nd);
      ASSERT_LT(basis[k].up | basis[k].dn, std::uint64_t{1} << L);
      ASSERT_EQ(basis.index(basis[k]), k);
    }
    EXPECT_FALSE(basis.index(Determinant{0, 0}).has_value());
  }
}

TEST(SectorBasis, RejectsBadCounts) {
  EXPECT_THROW(enumerate_sector(4, 5, 0), std::domain_error);
  EXPECT_THROW(enumerate_sector(4, -1, 0), std::domain_error);
}

TEST(ApplyHop, Examples) {
  auto r = apply_hop(Determinant{0b0011, 0}, 2, 1, Spin::up);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->det.up, 0b0101U);
  EXPECT_EQ(mask_to_string(r->det.up, 4), "1010");
  EXPECT_EQ(r->sign, 1);

  EXPECT_FALSE(apply_hop(Determinant{0b0101, 0}, 0, 2, Spin::up));

  r = apply_hop(Determinant{0b0111, 0}, 3, 0, Spin::up);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->det.up, 0b1110U);
  EXPECT_EQ(r->sign, 1);

  r = apply_hop(Determinant{0, 0b0011}, 2, 0, Spin::down);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->det.dn, 0b0110U);
  EXPECT_EQ(r->sign, -1);

  EXPECT_THROW(apply_hop(Determinant{1, 0}, 1, 1, Spin::up), std::domain_error);
}

TEST(ApplyHop, MatchesJordanWignerOracle) {
  for (int L = 2; L <= 6; ++L)
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << L); ++m)
      for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
          if (i == j) continue;
          const auto ours = apply_hop(Determinant{m, 0}, i, j, Spin::up);
          const auto jw = jw_hop(m, i, j);
          ASSERT_EQ(ours.has_value(), jw.has_value());
          if (!ours) continue;
          ASSERT_EQ(ours->det.up, jw->first);
          ASSERT_EQ(ours->sign, jw->second);
        }
}

TEST(ApplyHop, ForwardThenBackIsIdentity) {
  for (int L = 2; L <= 6; ++L)
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << L); ++m)
      for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
          if (i == j) continue;
          const Determinant d{m, m ^ ((std::uint64_t{1} << L) - 1)};
          const auto f = apply_hop(d, i, j, Spin::down);
          if (!f) continue;
          const auto b = apply_hop(f->det, j, i, Spin::down);
          ASSERT_TRUE(b);
          ASSERT_EQ(b->det, d);
          ASSERT_EQ(f->sign * b->sign, 1);
        }
}

TEST(DeterminantText, RoundTrip) {
  const Determinant d{0b0101, 0b1010};
  EXPECT_EQ(to_string(d, 4), "up=1010 dn=0101");
  const auto [back, L] = parse_determinant("  up=1010 dn=0101 ");
  EXPECT_EQ(back, d);
  EXPECT_EQ(L, 4);
  EXPECT_THROW(parse_determinant("up=101 dn=0101"), std::domain_error);
  EXPECT_THROW(parse_determinant("dn=0101 up=1010"), std::domain_error);
  EXPECT_THROW(parse_determinant("up=10a0 dn=0101"), std::domain_error);
}

TEST(HubbardMatrix, TwoSiteClosedForm) {
  for (double t : {1.0, -1.0, 0.5}) {
    const auto spec = hubbard_hamiltonian(HubbardParams{10.0, t, t, 0.0, 0.0, 2});
    const auto h = build_hubbard_matrix(spec, enumerate_sector(2, 1, 1));
    const double e = dense_ground_state(h.to_dense()).energy;
    EXPECT_NEAR(e, (10.0 - std::sqrt(100.0 + 16.0 * t * t)) / 2.0, 1e-12);
  }
  const auto spec = hubbard_hamiltonian(HubbardParams{10.0, 1.0, 1.0, 0.0, 0.0, 2});
  EXPECT_NEAR(dense_ground_state(build_hubbard_matrix(spec, enumerate_sector(2, 1, 1)).to_dense()).energy, -0.3852, 5e-5);
}

TEST(HubbardMatrix, NoHoppingIsDiagonalDoubleOccupancy) {
  FermionHamiltonianSpec spec{4, 7.0, {}};
  const auto basis = enumerate_sector(4, 3, 2);
  const auto h = build_hubbard_matrix(spec, basis);
  EXPECT_EQ(h.nnz(), [&] {
    std::size_t n = 0;
    for (const auto& d : basis.dets()) n += d.double_occupancy() > 0;
    return n;
  }());
  for (std::size_t a = 0; a < basis.size(); ++a) EXPECT_EQ(h.at(a, a), 7.0 * basis[a].double_occupancy());
}

TEST(HubbardMatrix, SectorEnergiesMatchFockSpaceOracle) {
  const auto spec = hubbard_hamiltonian(reference_hubbard(4));
  for (auto [nu, nd] : {std::pair{2, 2}, std::pair{2, 1}, std::pair{3, 2}, std::pair{1, 3}}) {
    const auto basis = enumerate_sector(4, nu, nd);
    const double ours = dense_ground_state(build_hubbard_matrix(spec, basis).to_dense()).energy;
    EXPECT_NEAR(ours, sector_energy_from_fock(spec, nu, nd), 1e-10) << nu << "," << nd;
  }
}

TEST(HubbardMatrix, SymmetricAndParticleConserving) {
  for (int L = 2; L <= 6; ++L) {
    const auto spec = hubbard_hamiltonian(reference_hubbard(L));
    const auto [nu, nd] = half_filled_sector(L);
    const auto basis = enumerate_sector(L, nu, nd);
    const auto h = build_hubbard_matrix(spec, basis);
    EXPECT_TRUE(h.is_symmetric());
    for (std::size_t a = 0; a < basis.size(); ++a)
      spec.for_each_connection(basis[a], [&](const Determinant& t, double) {
        ASSERT_EQ(t.n_up(), nu);
        ASSERT_EQ(t.n_dn(), nd);
      });
  }
}

TEST(HubbardOperator, MatchesAssembledMatrix) {
  const auto spec = hubbard_hamiltonian(reference_hubbard(5));
  const auto basis = enumerate_sector(5, 3, 2);
  const HubbardOperator op(spec, basis);
  const Eigen::MatrixXd a = materialize(op);
  const Eigen::MatrixXd b = build_hubbard_matrix(spec, basis).to_dense();
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(op.diagonal(), build_hubbard_matrix(spec, basis).diagonal());
}

TEST(FermionHamiltonianSpec, RejectsBadHops) {
  FermionHamiltonianSpec s{3, 1.0, {{0, 3, Spin::up, 1.0}}};
  EXPECT_THROW(s.validate(), std::domain_error);
  s.hops = {{1, 1, Spin::up, 1.0}};
  EXPECT_THROW(s.validate(), std::domain_error);
}
