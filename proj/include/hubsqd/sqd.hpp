#pragma once

// Sample-based quantum diagonalization of the Hubbard chain.
//
// Outer loop: recover raw samples into the target sector using the current
// orbital occupancies, draw K batches, project H onto each batch subspace,
// solve with Davidson, and average occupancies over the batch ground states.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hubsqd/common.hpp"
#include "hubsqd/davidson.hpp"
#include "hubsqd/fock.hpp"
#include "hubsqd/models.hpp"
#include "hubsqd/sparse.hpp"

namespace hubsqd {

struct Sector {
  int n_up = 0;
  int n_dn = 0;
  friend bool operator==(const Sector&, const Sector&) = default;
};

/// Deduplicated configurations in canonical order with sample counts.
struct ConfigurationSet {
  int sites = 0;
  std::vector<Determinant> configs;
  std::vector<std::uint64_t> multiplicities;

  std::size_t size() const noexcept { return configs.size(); }
  bool empty() const noexcept { return configs.empty(); }
  std::uint64_t total_count() const noexcept {
    std::uint64_t n = 0;
    for (auto m : multiplicities) n += m;
    return n;
  }

  template <class Range>
  static ConfigurationSet from_counts(int L, const Range& det_count_pairs) {
    std::map<Determinant, std::uint64_t> counts;
    for (const auto& [d, c] : det_count_pairs) {
      if (c == 0) continue;
      if (L < 64 && ((d.up | d.dn) >> L) != 0) throw std::domain_error("ConfigurationSet: determinant has bits beyond L");
      counts[d] += c;
    }
    ConfigurationSet cs;
    cs.sites = L;
    for (const auto& [d, c] : counts) {
      cs.configs.push_back(d);
      cs.multiplicities.push_back(c);
    }
    return cs;
  }

  static ConfigurationSet from_determinants(int L, std::span<const Determinant> dets) {
    std::vector<std::pair<Determinant, std::uint64_t>> pairs;
    pairs.reserve(dets.size());
    for (const auto& d : dets) pairs.emplace_back(d, 1);
    return from_counts(L, pairs);
  }

  /// Spin samples mapped through spin_to_hubbard_config.
  static ConfigurationSet from_bitstrings(int L, std::span<const Bitstring> samples) {
    std::vector<std::pair<Determinant, std::uint64_t>> pairs;
    pairs.reserve(samples.size());
    for (const auto& b : samples) pairs.emplace_back(spin_to_hubbard_config(b, L), 1);
    return from_counts(L, pairs);
  }
};

/// Occupancy per spin-orbital: index p for (p, up), L + p for (p, down).
using Occupancies = std::vector<double>;

/// First-round occupancies: per channel, the multiplicity-weighted mean of
/// the raw samples whose count in that channel already matches the target.
/// A channel with no such sample falls back to the uniform value n / L.
inline Occupancies initial_occupancies(const ConfigurationSet& raw, Sector target) {
  const int L = raw.sites;
  Occupancies occ(2 * static_cast<std::size_t>(L), 0.0);
  for (int ch = 0; ch < 2; ++ch) {
    const int want = ch == 0 ? target.n_up : target.n_dn;
    double weight = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const std::uint64_t m = ch == 0 ? raw.configs[k].up : raw.configs[k].dn;
      if (popcount(m) != want) continue;
      const double w = static_cast<double>(raw.multiplicities[k]);
      weight += w;
      for (int p = 0; p < L; ++p)
        if ((m >> p) & 1U) occ[static_cast<std::size_t>(ch * L + p)] += w;
    }
    for (int p = 0; p < L; ++p) {
      auto& o = occ[static_cast<std::size_t>(ch * L + p)];
      o = weight > 0.0 ? o / weight : static_cast<double>(want) / L;
    }
  }
  return occ;
}

namespace detail {

// Flip bits of one channel until its popcount equals `want`. Candidates are
// bits whose flip moves the count toward the target, drawn one at a time
// with weight |x_p - n_p|; uniform when every candidate weight is zero.
inline std::uint64_t repair_channel(std::uint64_t mask, int want, int L, std::span<const double> occ, Rng& rng) {
  int have = popcount(mask);
  std::vector<int> cand;
  std::vector<double> w;
  while (have != want) {
    const bool remove = have > want;
    cand.clear();
    w.clear();
    double total = 0.0;
    for (int p = 0; p < L; ++p) {
      const bool bit = (mask >> p) & 1U;
      if (bit != remove) continue;
      cand.push_back(p);
      const double x = bit ? 1.0 : 0.0;
      w.push_back(std::abs(x - occ[static_cast<std::size_t>(p)]));
      total += w.back();
    }
    int pick;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      std::size_t k = 0;
      while (k + 1 < cand.size() && u >= w[k]) u -= w[k++];
      while (w[k] == 0.0 && k > 0) --k;  // land on a positive-weight bit when rounding runs off the end
      pick = cand[k];
    } else {
      pick = cand[uniform_index(rng, cand.size())];
    }
    mask ^= std::uint64_t{1} << pick;
    have += remove ? -1 : 1;
  }
  return mask;
}

}  // namespace detail

/// Every output configuration lies in `target`; in-sector inputs pass through
/// unchanged. Each sample instance (multiplicity) is repaired independently.
inline ConfigurationSet recover_configurations(const ConfigurationSet& raw, std::span<const double> occupancies,
                                               Sector target, std::uint64_t seed) {
  const int L = raw.sites;
  if (raw.empty()) throw std::domain_error("recover_configurations: empty sample set");
  if (occupancies.size() != 2 * static_cast<std::size_t>(L))
    throw std::domain_error("recover_configurations: occupancy vector must have 2L entries");
  if (target.n_up < 0 || target.n_up > L || target.n_dn < 0 || target.n_dn > L)
    throw std::domain_error("recover_configurations: target sector outside [0, L]");
  Rng rng(seed);
  const auto occ_up = occupancies.subspan(0, static_cast<std::size_t>(L));
  const auto occ_dn = occupancies.subspan(static_cast<std::size_t>(L));
  std::vector<std::pair<Determinant, std::uint64_t>> out;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const Determinant& d = raw.configs[k];
    if (d.n_up() == target.n_up && d.n_dn() == target.n_dn) {
      out.emplace_back(d, raw.multiplicities[k]);
      continue;
    }
    for (std::uint64_t rep = 0; rep < raw.multiplicities[k]; ++rep) {
      Determinant r{detail::repair_channel(d.up, target.n_up, L, occ_up, rng),
                    detail::repair_channel(d.dn, target.n_dn, L, occ_dn, rng)};
      out.emplace_back(r, 1);
    }
  }
  return ConfigurationSet::from_counts(L, out);
}

enum class SubspaceMode : std::uint8_t {
  product,  // span of (unique up strings) x (unique down strings) of the batch
  direct,   // span of the batch configurations themselves
};

struct SqdConfig {
  int batches = 5;                      // K
  std::size_t batch_size = 100;         // d: configurations drawn per batch
  int max_outer_iters = 10;
  double davidson_tol = 1e-9;
  double energy_tolerance = 1e-8;       // outer-loop stop on best-energy change
  std::uint64_t seed = 0;
  Sector target{};
  SubspaceMode subspace = SubspaceMode::product;
  std::size_t max_subspace_dim = 0;     // 0: unlimited

  void validate() const {
    if (batches < 1) throw std::domain_error("SqdConfig: batch count K must be >= 1");
    if (batch_size < 1) throw std::domain_error("SqdConfig: batch size d must be >= 1");
    if (max_outer_iters < 1) throw std::domain_error("SqdConfig: max_outer_iters must be >= 1");
    if (!(davidson_tol > 0.0)) throw std::domain_error("SqdConfig: davidson_tol must be positive");
  }
};

/// K batches of min(d, |cs|) distinct configurations, each an independent
/// draw without replacement weighted by multiplicity. Batches are returned in
/// draw order; the same seed with a larger d yields a superset.
inline std::vector<std::vector<Determinant>> partition_batches(const ConfigurationSet& cs, const SqdConfig& cfg,
                                                               std::uint64_t seed) {
  if (cs.empty()) throw std::domain_error("partition_batches: empty configuration set");
  cfg.validate();
  const std::size_t take = std::min(cfg.batch_size, cs.size());
  std::vector<std::vector<Determinant>> out(static_cast<std::size_t>(cfg.batches));
  std::vector<std::pair<double, std::size_t>> keys(cs.size());
  for (int k = 0; k < cfg.batches; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    // Efraimidis-Spirakis: the largest log(u) / w give a weighted draw.
    for (std::size_t i = 0; i < cs.size(); ++i) {
      double u = uniform01(rng);
      if (u <= 0.0) u = 0x1.0p-60;
      keys[i] = {std::log(u) / static_cast<double>(cs.multiplicities[i]), i};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    auto& batch = out[static_cast<std::size_t>(k)];
    batch.reserve(take);
    for (std::size_t i = 0; i < take; ++i) batch.push_back(cs.configs[keys[i].second]);
  }
  return out;
}

/// Subspace basis for one batch, sorted canonically. `max_dim` (0 = no cap)
/// limits the dimension: configurations are admitted in draw order and one
/// that would push the subspace past the cap is skipped.
inline std::vector<Determinant> build_subspace(std::span<const Determinant> batch, SubspaceMode mode,
                                               std::size_t max_dim = 0) {
  std::vector<Determinant> dets;
  if (mode == SubspaceMode::direct) {
    for (const auto& d : batch) {
      if (max_dim && dets.size() >= max_dim) break;
      dets.push_back(d);
    }
    std::sort(dets.begin(), dets.end());
    dets.erase(std::unique(dets.begin(), dets.end()), dets.end());
    return dets;
  }
  std::vector<std::uint64_t> ups, dns;
  auto contains = [](const std::vector<std::uint64_t>& v, std::uint64_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  for (const auto& d : batch) {
    const bool new_up = !contains(ups, d.up);
    const bool new_dn = !contains(dns, d.dn);
    const std::size_t dim = (ups.size() + new_up) * (dns.size() + new_dn);
    if (max_dim && dim > max_dim) continue;
    if (new_up) ups.push_back(d.up);
    if (new_dn) dns.push_back(d.dn);
  }
  std::sort(ups.begin(), ups.end());
  std::sort(dns.begin(), dns.end());
  dets.reserve(ups.size() * dns.size());
  for (auto u : ups)
    for (auto v : dns) dets.push_back({u, v});
  return dets;
}

/// <x_a|H|x_b> over a deduplicated single-sector configuration list.
inline CsrMatrix project_hamiltonian(const FermionHamiltonianSpec& spec, std::span<const Determinant> dets) {
  spec.validate();
  if (dets.empty()) throw std::domain_error("project_hamiltonian: empty configuration list");
  const int nu = dets[0].n_up(), nd = dets[0].n_dn();
  std::unordered_map<Determinant, std::size_t, DeterminantHash> index;
  index.reserve(dets.size() * 2);
  for (std::size_t a = 0; a < dets.size(); ++a) {
    if (dets[a].n_up() != nu || dets[a].n_dn() != nd) throw std::domain_error("project_hamiltonian: configurations span several sectors");
    if (!index.emplace(dets[a], a).second) throw std::domain_error("project_hamiltonian: duplicate configuration");
  }
  return assemble_hubbard(spec, dets, [&](const Determinant& d) -> std::optional<std::size_t> {
    auto it = index.find(d);
    if (it == index.end()) return std::nullopt;
    return it->second;
  });
}

struct BatchSolution {
  std::vector<Determinant> dets;
  Eigenpair state;
};

/// n_{p sigma} = (1/K) sum_k sum_a |v_a^(k)|^2 x_{a, p sigma}
inline Occupancies average_occupancies(std::span<const BatchSolution> results, int L) {
  Occupancies occ(2 * static_cast<std::size_t>(L), 0.0);
  if (results.empty()) return occ;
  for (const auto& r : results) {
    if (r.state.vector.size() != r.dets.size()) throw std::domain_error("average_occupancies: eigenvector and batch sizes differ");
    for (std::size_t a = 0; a < r.dets.size(); ++a) {
      const double w = r.state.vector[a] * r.state.vector[a];
      for (int p = 0; p < L; ++p) {
        if ((r.dets[a].up >> p) & 1U) occ[static_cast<std::size_t>(p)] += w;
        if ((r.dets[a].dn >> p) & 1U) occ[static_cast<std::size_t>(L + p)] += w;
      }
    }
  }
  for (auto& o : occ) o = std::clamp(o / static_cast<double>(results.size()), 0.0, 1.0);
  return occ;
}

struct SqdIteration {
  std::vector<double> batch_energies;
  std::vector<std::size_t> subspace_dims;
  double best_energy = 0.0;  // min over batches
  Occupancies occupancies;   // after this iteration
};

struct SubspaceResult {
  std::vector<SqdIteration> iterations;
  std::vector<BatchSolution> final_batches;
  Occupancies occupancies;
  double energy = 0.0;  // best batch energy at the final iteration
  bool converged = false;
};

inline Eigenpair solve_subspace(const FermionHamiltonianSpec& spec, std::span<const Determinant> dets, double tol,
                                std::uint64_t seed) {
  const CsrMatrix h = project_hamiltonian(spec, dets);
  DavidsonOptions opt;
  opt.tol = tol;
  opt.seed = seed;
  return davidson_ground_state(h, opt);
}

inline SubspaceResult sqd_run(const FermionHamiltonianSpec& spec, const ConfigurationSet& samples, const SqdConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw std::domain_error("sqd_run: no samples");
  if (samples.sites != spec.sites) throw std::domain_error("sqd_run: samples and Hamiltonian site counts differ");
  const int L = spec.sites;

  SubspaceResult out;
  Occupancies occ = initial_occupancies(samples, cfg.target);
  for (int it = 0; it < cfg.max_outer_iters; ++it) {
    const auto iter_tag = static_cast<std::uint64_t>(it);
    const ConfigurationSet recovered =
        recover_configurations(samples, occ, cfg.target, derive_seed(derive_seed(cfg.seed, "recovery"), iter_tag));
    const auto batches = partition_batches(recovered, cfg, derive_seed(derive_seed(cfg.seed, "batching"), iter_tag));

    std::vector<BatchSolution> solved;
    SqdIteration rec;
    for (std::size_t k = 0; k < batches.size(); ++k) {
      BatchSolution b;
      b.dets = build_subspace(batches[k], cfg.subspace, cfg.max_subspace_dim);
      const std::uint64_t dseed = derive_seed(derive_seed(derive_seed(cfg.seed, "davidson"), iter_tag), k);
      b.state = solve_subspace(spec, b.dets, cfg.davidson_tol, dseed);
      rec.batch_energies.push_back(b.state.energy);
      rec.subspace_dims.push_back(b.dets.size());
      solved.push_back(std::move(b));
    }
    rec.best_energy = *std::min_element(rec.batch_energies.begin(), rec.batch_energies.end());
    occ = average_occupancies(solved, L);
    rec.occupancies = occ;
    const bool settled = !out.iterations.empty() && std::abs(rec.best_energy - out.iterations.back().best_energy) < cfg.energy_tolerance;
    out.iterations.push_back(std::move(rec));
    out.final_batches = std::move(solved);
    if (settled) {
      out.converged = true;
      break;
    }
  }
  out.occupancies = occ;
  out.energy = out.iterations.back().best_energy;
  return out;
}

}  // namespace hubsqd
