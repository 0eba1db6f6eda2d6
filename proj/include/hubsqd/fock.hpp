#pragma once

// Fixed-particle-number Fock bases and Hubbard Hamiltonian assembly.
//
// Orbital ordering: spin-up orbitals are 0..L-1, spin-down orbitals L..2L-1.
// A hop never changes the other channel, so its fermionic sign only counts
// occupied orbitals of the same spin strictly between the two sites.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hubsqd/common.hpp"
#include "hubsqd/sparse.hpp"

namespace hubsqd {

inline constexpr int kMaxSites = 32;

enum class Spin : std::uint8_t { up = 0, down = 1 };

/// One Fock configuration: an occupation bitmask per spin channel.
/// Bit i set means site i holds a fermion of that spin.
struct Determinant {
  std::uint64_t up = 0;
  std::uint64_t dn = 0;

  std::uint64_t channel(Spin s) const noexcept { return s == Spin::up ? up : dn; }
  int n_up() const noexcept { return popcount(up); }
  int n_dn() const noexcept { return popcount(dn); }
  int double_occupancy() const noexcept { return popcount(up & dn); }

  // Canonical order: up mask first, then down mask, ascending.
  friend auto operator<=>(const Determinant&, const Determinant&) = default;
};

struct DeterminantHash {
  std::size_t operator()(const Determinant& d) const noexcept {
    return static_cast<std::size_t>(splitmix64(d.up * 0x9e3779b97f4a7c15ULL ^ d.dn));
  }
};

/// Little-endian 0/1 string of the low `length` bits (character k is bit k).
inline std::string mask_to_string(std::uint64_t mask, int length) {
  std::string s(static_cast<std::size_t>(length), '0');
  for (int k = 0; k < length; ++k)
    if ((mask >> k) & 1U) s[static_cast<std::size_t>(k)] = '1';
  return s;
}

inline std::uint64_t parse_mask(std::string_view s) {
  if (s.size() > 64) throw std::domain_error("bit string longer than 64 characters");
  std::uint64_t m = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '1')
      m |= std::uint64_t{1} << k;
    else if (s[k] != '0')
      throw std::domain_error("bit string must contain only '0' and '1': " + std::string(s));
  }
  return m;
}

/// "up=1010 dn=0101"
inline std::string to_string(const Determinant& d, int length) {
  return "up=" + mask_to_string(d.up, length) + " dn=" + mask_to_string(d.dn, length);
}

/// Parses the text form; returns the determinant and the site count.
inline std::pair<Determinant, int> parse_determinant(std::string_view text) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
    return v;
  };
  text = trim(text);
  if (!text.starts_with("up=")) throw std::domain_error("determinant must start with 'up=': " + std::string(text));
  const auto space = text.find(' ');
  if (space == std::string_view::npos) throw std::domain_error("determinant missing 'dn=' field");
  const auto up = text.substr(3, space - 3);
  auto rest = trim(text.substr(space));
  if (!rest.starts_with("dn=")) throw std::domain_error("determinant missing 'dn=' field");
  const auto dn = rest.substr(3);
  if (up.size() != dn.size()) throw std::domain_error("up and dn strings differ in length");
  return {Determinant{parse_mask(up), parse_mask(dn)}, static_cast<int>(up.size())};
}

struct HopResult {
  Determinant det;
  int sign;
};

/// c^dagger_{i,s} c_{j,s} applied to `det`. Empty when site j is empty or
/// site i is already occupied in channel s.
inline std::optional<HopResult> apply_hop(const Determinant& det, int i, int j, Spin s) {
  if (i == j) throw std::domain_error("apply_hop: i and j must differ");
  const std::uint64_t m = det.channel(s);
  const std::uint64_t bi = std::uint64_t{1} << i;
  const std::uint64_t bj = std::uint64_t{1} << j;
  if (!(m & bj) || (m & bi)) return std::nullopt;
  const int lo = i < j ? i : j;
  const int hi = i < j ? j : i;
  const std::uint64_t between = ((std::uint64_t{1} << hi) - 1) & ~((std::uint64_t{1} << (lo + 1)) - 1);
  const int sign = (popcount(m & between) & 1) ? -1 : 1;
  Determinant out = det;
  (s == Spin::up ? out.up : out.dn) = m ^ bi ^ bj;
  return HopResult{out, sign};
}

namespace detail {

/// Rank of a fixed-popcount mask among all masks of that popcount in
/// ascending integer order (combinatorial number system).
inline std::uint64_t colex_rank(std::uint64_t mask) {
  std::uint64_t r = 0;
  int k = 1;
  while (mask) {
    const int pos = std::countr_zero(mask);
    r += binomial(pos, k);
    ++k;
    mask &= mask - 1;
  }
  return r;
}

inline std::vector<std::uint64_t> masks_with_popcount(int length, int count) {
  std::vector<std::uint64_t> out;
  out.reserve(binomial(length, count));
  if (count == 0) {
    out.push_back(0);
    return out;
  }
  std::uint64_t m = (std::uint64_t{1} << count) - 1;
  const std::uint64_t limit = std::uint64_t{1} << length;
  while (m < limit) {
    out.push_back(m);
    // Gosper's hack: next larger integer with the same popcount.
    const std::uint64_t c = m & (~m + 1);
    const std::uint64_t r = m + c;
    m = (((r ^ m) >> 2) / c) | r;
  }
  return out;
}

}  // namespace detail

/// All determinants with fixed (n_up, n_dn) on L sites, in canonical order.
class SectorBasis {
 public:
  SectorBasis(int sites, int n_up, int n_dn) : L_(sites), n_up_(n_up), n_dn_(n_dn) {
    if (sites < 0 || sites > kMaxSites) throw std::domain_error("SectorBasis: site count out of range");
    if (n_up < 0 || n_up > sites || n_dn < 0 || n_dn > sites)
      throw std::domain_error("SectorBasis: particle counts must lie in [0, L]");
    const auto ups = detail::masks_with_popcount(sites, n_up);
    const auto dns = detail::masks_with_popcount(sites, n_dn);
    dets_.reserve(ups.size() * dns.size());
    for (auto u : ups)
      for (auto d : dns) dets_.push_back({u, d});
    n_dn_states_ = dns.size();
  }

  int sites() const noexcept { return L_; }
  int n_up() const noexcept { return n_up_; }
  int n_dn() const noexcept { return n_dn_; }
  std::size_t size() const noexcept { return dets_.size(); }
  const Determinant& operator[](std::size_t k) const { return dets_[k]; }
  std::span<const Determinant> dets() const noexcept { return dets_; }

  /// Ordinal of `d`, or empty when it lies outside this sector.
  std::optional<std::size_t> index(const Determinant& d) const noexcept {
    if (d.n_up() != n_up_ || d.n_dn() != n_dn_) return std::nullopt;
    if (L_ < 64 && ((d.up | d.dn) >> L_) != 0) return std::nullopt;
    return static_cast<std::size_t>(detail::colex_rank(d.up) * n_dn_states_ + detail::colex_rank(d.dn));
  }

 private:
  int L_;
  int n_up_;
  int n_dn_;
  std::size_t n_dn_states_ = 1;
  std::vector<Determinant> dets_;
};

inline SectorBasis enumerate_sector(int sites, int n_up, int n_dn) { return SectorBasis(sites, n_up, n_dn); }

/// One hopping term t (c^dagger_i c_j + c^dagger_j c_i) in spin channel `spin`.
struct Hop {
  int i;
  int j;
  Spin spin;
  double t;
};

/// Real-amplitude Hubbard Hamiltonian: listed hops (each with its
/// Hermitian conjugate) plus on-site U n_up n_dn.
struct FermionHamiltonianSpec {
  int sites = 0;
  double onsite_U = 0.0;
  std::vector<Hop> hops;

  void validate() const {
    for (const auto& h : hops) {
      if (h.i < 0 || h.j < 0 || h.i >= sites || h.j >= sites)
        throw std::domain_error("hop index outside [0, L)");
      if (h.i == h.j) throw std::domain_error("hop must connect two distinct sites");
    }
  }

  double diagonal(const Determinant& d) const noexcept { return onsite_U * d.double_occupancy(); }

  /// Calls visit(target, amplitude) for every off-diagonal H|d> contribution.
  template <class Visit>
  void for_each_connection(const Determinant& d, Visit&& visit) const {
    for (const auto& h : hops) {
      if (h.t == 0.0) continue;
      if (auto r = apply_hop(d, h.i, h.j, h.spin)) visit(r->det, h.t * r->sign);
      if (auto r = apply_hop(d, h.j, h.i, h.spin)) visit(r->det, h.t * r->sign);
    }
  }
};

/// Sparse Hubbard matrix over a configuration list. `index_of` maps a
/// determinant to its row or returns empty when it is outside the list.
/// Each unordered pair is generated once and mirrored, so the result is
/// exactly symmetric.
template <class IndexOf>
CsrMatrix assemble_hubbard(const FermionHamiltonianSpec& spec, std::span<const Determinant> dets, IndexOf&& index_of) {
  std::vector<Triplet> entries;
  entries.reserve(dets.size() * (1 + spec.hops.size()));
  for (std::size_t a = 0; a < dets.size(); ++a) {
    const double diag = spec.diagonal(dets[a]);
    if (diag != 0.0) entries.push_back({a, a, diag});
    spec.for_each_connection(dets[a], [&](const Determinant& target, double amp) {
      const std::optional<std::size_t> b = index_of(target);
      if (b && *b > a) {
        entries.push_back({a, *b, amp});
        entries.push_back({*b, a, amp});
      }
    });
  }
  return CsrMatrix::from_triplets(dets.size(), std::move(entries));
}

inline CsrMatrix build_hubbard_matrix(const FermionHamiltonianSpec& spec, const SectorBasis& basis) {
  if (basis.sites() != spec.sites) throw std::domain_error("build_hubbard_matrix: basis and Hamiltonian site counts differ");
  spec.validate();
  return assemble_hubbard(spec, basis.dets(), [&](const Determinant& d) { return basis.index(d); });
}

/// Matrix-free Hubbard action on a full sector, for bases too large to store.
class HubbardOperator {
 public:
  HubbardOperator(FermionHamiltonianSpec spec, const SectorBasis& basis) : spec_(std::move(spec)), basis_(&basis) {
    if (basis.sites() != spec_.sites) throw std::domain_error("HubbardOperator: basis and Hamiltonian site counts differ");
    spec_.validate();
  }

  std::size_t dim() const noexcept { return basis_->size(); }

  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t a = 0; a < dim(); ++a) {
      const Determinant& d = (*basis_)[a];
      double acc = spec_.diagonal(d) * x[a];
      spec_.for_each_connection(d, [&](const Determinant& target, double amp) {
        if (auto b = basis_->index(target)) acc += amp * x[*b];
      });
      y[a] = acc;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> out(dim());
    for (std::size_t a = 0; a < dim(); ++a) out[a] = spec_.diagonal((*basis_)[a]);
    return out;
  }

 private:
  FermionHamiltonianSpec spec_;
  const SectorBasis* basis_;
};

}  // namespace hubsqd
