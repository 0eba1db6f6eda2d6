#pragma once

// Hubbard and Heisenberg parameter sets, the second-order large-U mapping
// between them, and the spin-sample to Hubbard-configuration map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hubsqd/common.hpp"
#include "hubsqd/exact.hpp"
#include "hubsqd/fock.hpp"
#include "hubsqd/sparse.hpp"

namespace hubsqd {

/// Spin-asymmetric Hubbard chain with NN (t) and NNN (t') hopping, open ends.
struct HubbardParams {
  double U = 10.0;
  double t_up = 1.0;
  double t_dn = 0.25;
  double tp_up = 0.0;
  double tp_dn = 0.0;
  int L = 4;

  void validate() const {
    if (!(U > 0.0) || !std::isfinite(U)) throw std::domain_error("HubbardParams: U must be positive");
    if (!std::isfinite(t_up) || !std::isfinite(t_dn) || !std::isfinite(tp_up) || !std::isfinite(tp_dn))
      throw std::domain_error("HubbardParams: hoppings must be finite");
    if (L < 2 || L > kMaxSites) throw std::domain_error("HubbardParams: L must lie in [2, 32]");
  }
  friend bool operator==(const HubbardParams&, const HubbardParams&) = default;
};

/// The parameter set used for the numerical studies: U=10, t=(1, 0.25), t'=(0.25, 0.0625).
inline HubbardParams reference_hubbard(int L) { return HubbardParams{10.0, 1.0, 0.25, 0.25, 0.0625, L}; }

/// J1-J2 XXZ couplings on an open chain.
struct HeisenbergParams {
  double Jxy1 = 0.0;
  double Jz1 = 1.0;
  double Jxy2 = 0.0;
  double Jz2 = 0.0;
  int L = 4;

  void validate() const {
    if (!std::isfinite(Jxy1) || !std::isfinite(Jz1) || !std::isfinite(Jxy2) || !std::isfinite(Jz2))
      throw std::domain_error("HeisenbergParams: couplings must be finite");
    if (L < 2 || L > kMaxSites) throw std::domain_error("HeisenbergParams: L must lie in [2, 32]");
  }
  bool isotropic() const noexcept { return Jxy1 == Jz1 && Jxy2 == Jz2; }
  friend bool operator==(const HeisenbergParams&, const HeisenbergParams&) = default;
};

enum class Coupling : std::uint8_t { xy, zz };  // xy: Sx Sx + Sy Sy

struct SpinTerm {
  int k;
  int l;
  Coupling kind;
  double value;
  friend bool operator==(const SpinTerm&, const SpinTerm&) = default;
};

/// Symbolic two-body spin Hamiltonian plus a constant energy shift.
struct SpinHamiltonianSpec {
  int sites = 0;
  std::vector<SpinTerm> terms;
  double constant_shift = 0.0;
  friend bool operator==(const SpinHamiltonianSpec&, const SpinHamiltonianSpec&) = default;
};

inline HeisenbergParams effective_couplings(const HubbardParams& p) {
  if (!(p.U > 0.0)) throw std::domain_error("effective_couplings: U must be positive");
  HeisenbergParams h;
  h.Jxy1 = 4.0 * p.t_up * p.t_dn / p.U;
  h.Jz1 = 2.0 * (p.t_up * p.t_up + p.t_dn * p.t_dn) / p.U;
  h.Jxy2 = 4.0 * p.tp_up * p.tp_dn / p.U;
  h.Jz2 = 2.0 * (p.tp_up * p.tp_up + p.tp_dn * p.tp_dn) / p.U;
  h.L = p.L;
  return h;
}

/// NN bonds (k, k+1) and NNN bonds (k, k+2). With include_shift the
/// constant -Jz/4 per bond of the second-order expansion is added.
inline SpinHamiltonianSpec build_spin_hamiltonian(const HeisenbergParams& h, bool include_shift) {
  h.validate();
  SpinHamiltonianSpec s;
  s.sites = h.L;
  auto add_bond = [&](int k, int l, double jxy, double jz) {
    if (jxy != 0.0) s.terms.push_back({k, l, Coupling::xy, jxy});
    if (jz != 0.0) s.terms.push_back({k, l, Coupling::zz, jz});
  };
  for (int k = 0; k + 1 < h.L; ++k) add_bond(k, k + 1, h.Jxy1, h.Jz1);
  for (int k = 0; k + 2 < h.L; ++k) add_bond(k, k + 2, h.Jxy2, h.Jz2);
  if (include_shift) s.constant_shift = -0.25 * h.Jz1 * (h.L - 1) - 0.25 * h.Jz2 * std::max(h.L - 2, 0);
  return s;
}

/// Real sparse matrix on the 2^L qubit basis. Bit k of the basis index is
/// spin k, with 1 = up (Sz = +1/2).
inline CsrMatrix build_spin_matrix(const SpinHamiltonianSpec& s) {
  if (s.sites < 1 || s.sites > 24) throw std::domain_error("build_spin_matrix: site count must lie in [1, 24]");
  for (const auto& t : s.terms)
    if (t.k < 0 || t.l < 0 || t.k >= s.sites || t.l >= s.sites || t.k == t.l)
      throw std::domain_error("build_spin_matrix: invalid term sites");
  const std::size_t dim = std::size_t{1} << s.sites;
  std::vector<Triplet> entries;
  entries.reserve(dim * (1 + s.terms.size()));
  for (std::size_t b = 0; b < dim; ++b) {
    double diag = s.constant_shift;
    for (const auto& t : s.terms) {
      const bool sk = (b >> t.k) & 1U;
      const bool sl = (b >> t.l) & 1U;
      if (t.kind == Coupling::zz) {
        diag += t.value * (sk == sl ? 0.25 : -0.25);
      } else if (sk != sl) {
        const std::size_t flipped = b ^ (std::size_t{1} << t.k) ^ (std::size_t{1} << t.l);
        entries.push_back({flipped, b, 0.5 * t.value});
      }
    }
    if (diag != 0.0) entries.push_back({b, b, diag});
  }
  return CsrMatrix::from_triplets(dim, std::move(entries));
}

/// Measured spin string; character k of the text form is qubit k.
struct Bitstring {
  std::uint64_t bits = 0;
  int length = 0;

  bool operator[](int k) const noexcept { return (bits >> k) & 1U; }
  std::string str() const { return mask_to_string(bits, length); }
  static Bitstring parse(std::string_view s) { return {parse_mask(s), static_cast<int>(s.size())}; }
  friend auto operator<=>(const Bitstring&, const Bitstring&) = default;
};

/// Up channel takes the measured bits, down channel their complement, so
/// every site holds exactly one fermion.
inline Determinant spin_to_hubbard_config(const Bitstring& b, int L) {
  if (b.length != L) throw std::domain_error("spin_to_hubbard_config: bitstring length differs from L");
  const std::uint64_t full = L >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << L) - 1;
  return Determinant{b.bits & full, ~b.bits & full};
}

inline FermionHamiltonianSpec hubbard_hamiltonian(const HubbardParams& p) {
  p.validate();
  FermionHamiltonianSpec f;
  f.sites = p.L;
  f.onsite_U = p.U;
  for (int i = 0; i + 1 < p.L; ++i) {
    if (p.t_up != 0.0) f.hops.push_back({i, i + 1, Spin::up, p.t_up});
    if (p.t_dn != 0.0) f.hops.push_back({i, i + 1, Spin::down, p.t_dn});
  }
  for (int i = 0; i + 2 < p.L; ++i) {
    if (p.tp_up != 0.0) f.hops.push_back({i, i + 2, Spin::up, p.tp_up});
    if (p.tp_dn != 0.0) f.hops.push_back({i, i + 2, Spin::down, p.tp_dn});
  }
  return f;
}

/// Half filling with the down count rounded down: (ceil(L/2), floor(L/2)).
inline std::pair<int, int> half_filled_sector(int L) { return {(L + 1) / 2, L / 2}; }

/// Ground energy of the effective spin model, shift included. Accurate to
/// second order in t/U for the half-filled Hubbard chain.
inline double perturbative_energy_estimate(const HubbardParams& p) {
  p.validate();
  const auto spec = build_spin_hamiltonian(effective_couplings(p), true);
  return exact_ground_state(build_spin_matrix(spec)).energy;
}

/// Exact ground energy of the Hubbard chain in sector (n_up, n_dn).
inline Eigenpair hubbard_sector_ground_state(const HubbardParams& p, int n_up, int n_dn, std::uint64_t seed = 0x1a2b3c4dULL) {
  const auto basis = enumerate_sector(p.L, n_up, n_dn);
  const auto spec = hubbard_hamiltonian(p);
  if (basis.size() <= kDenseCap) return dense_ground_state(build_hubbard_matrix(spec, basis).to_dense());
  return exact_ground_state(build_hubbard_matrix(spec, basis), seed);
}

}  // namespace hubsqd
