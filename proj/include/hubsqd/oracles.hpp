#pragma once

// Energy tables, chemical potentials and the large-U validity check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubsqd/common.hpp"
#include "hubsqd/exact.hpp"
#include "hubsqd/models.hpp"

namespace hubsqd {

struct EnergyRow {
  int n_occ = 0;
  double energy = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  friend bool operator==(const EnergyRow&, const EnergyRow&) = default;
};

class EnergyTable {
 public:
  static constexpr const char* kHeader = "N_occ,E,method,seed";

  void add(EnergyRow row) {
    if (!std::isfinite(row.energy)) throw std::domain_error("EnergyTable: energy must be finite");
    if (row.method.find_first_of(",\n") != std::string::npos) throw std::domain_error("EnergyTable: method tag may not contain ',' or newline");
    for (const auto& r : rows_)
      if (r.n_occ == row.n_occ && r.method == row.method && r.seed == row.seed)
        throw std::domain_error("EnergyTable: duplicate N_occ " + std::to_string(row.n_occ) + " for method " + row.method);
    rows_.push_back(std::move(row));
  }

  const std::vector<EnergyRow>& rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }

  /// Rows of one (method, seed) run.
  EnergyTable select(const std::string& method, std::uint64_t seed) const {
    EnergyTable t;
    for (const auto& r : rows_)
      if (r.method == method && r.seed == seed) t.rows_.push_back(r);
    return t;
  }

  /// Energy at N_occ; the table must hold a single run.
  std::optional<double> energy(int n_occ) const {
    std::optional<double> e;
    for (const auto& r : rows_) {
      if (r.n_occ != n_occ) continue;
      if (e) throw std::domain_error("EnergyTable: several runs define N_occ " + std::to_string(n_occ) + "; select one first");
      e = r.energy;
    }
    return e;
  }

  void write_csv(std::ostream& os) const {
    os << kHeader << '\n';
    for (const auto& r : rows_) os << r.n_occ << ',' << format_double(r.energy) << ',' << r.method << ',' << r.seed << '\n';
  }

  std::string to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }

  static EnergyTable read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kHeader) throw std::domain_error("EnergyTable: expected header '" + std::string(kHeader) + "'");
    EnergyTable t;
    int lineno = 1;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::size_t start = 0;
      for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) f.push_back(line.substr(start, pos - start));
      f.push_back(line.substr(start));
      if (f.size() != 4) throw std::domain_error("EnergyTable: line " + std::to_string(lineno) + " needs 4 fields");
      try {
        std::size_t used = 0;
        EnergyRow r;
        r.n_occ = std::stoi(f[0], &used);
        if (used != f[0].size()) throw std::invalid_argument("N_occ");
        r.energy = std::stod(f[1], &used);
        if (used != f[1].size()) throw std::invalid_argument("E");
        r.method = f[2];
        r.seed = std::stoull(f[3], &used);
        if (used != f[3].size()) throw std::invalid_argument("seed");
        t.add(std::move(r));
      } catch (const std::invalid_argument&) {
        throw std::domain_error("EnergyTable: malformed line " + std::to_string(lineno));
      } catch (const std::out_of_range&) {
        throw std::domain_error("EnergyTable: value out of range on line " + std::to_string(lineno));
      }
    }
    return t;
  }

  static EnergyTable from_csv(const std::string& text) {
    std::istringstream is(text);
    return read_csv(is);
  }

 private:
  std::vector<EnergyRow> rows_;
};

struct ChemicalPotential {
  double mu = 0.0;                 // E(N) - E(N-1)
  std::optional<double> mu_prime;  // E(N+1) - 2 E(N) + E(N-1)
};

/// Needs E(N-1) and E(N); mu' is filled when E(N+1) is present.
inline ChemicalPotential chemical_potential(const EnergyTable& table, int n) {
  auto need = [&](int k) {
    auto e = table.energy(k);
    if (!e) throw std::domain_error("chemical_potential: no energy for N_occ = " + std::to_string(k));
    return *e;
  };
  const double e_n = need(n);
  const double e_m = need(n - 1);
  ChemicalPotential out;
  out.mu = e_n - e_m;
  if (auto e_p = table.energy(n + 1)) out.mu_prime = *e_p - 2.0 * e_n + e_m;
  return out;
}

/// Lowest exact energy at fixed total occupation, minimized over the splits
/// with |n_up - n_dn| <= 1.
inline double exact_occupation_energy(const HubbardParams& p, int n_occ) {
  if (n_occ < 0 || n_occ > 2 * p.L) throw std::domain_error("exact_occupation_energy: N_occ outside [0, 2L]");
  double best = INFINITY;
  for (int nu = (n_occ + 1) / 2; nu >= n_occ / 2; --nu) {
    const int nd = n_occ - nu;
    if (nu > p.L || nd > p.L || nd < 0) continue;
    best = std::min(best, hubbard_sector_ground_state(p, nu, nd).energy);
  }
  return best;
}

struct ValidatorRow {
  double U = 0.0;
  double e_hubbard = 0.0;
  double e_effective = 0.0;
  double deviation = 0.0;
};

struct ValidatorResult {
  std::vector<ValidatorRow> rows;
  // Least-squares slope of log deviation against log(1/U); nullopt when
  // fewer than two deviations are positive.
  std::optional<double> exponent;
  // deviation(U_0) / deviation(U_last) for the first and last U.
  std::optional<double> shrink_factor;
};

/// Exact half-filled Hubbard energy against the effective spin model at each U.
inline ValidatorResult perturbation_validator(const HubbardParams& base, const std::vector<double>& U_list) {
  if (base.L > 8) throw std::domain_error("perturbation_validator: L must be <= 8 for exact diagonalization");
  ValidatorResult out;
  const auto [nu, nd] = half_filled_sector(base.L);
  for (double U : U_list) {
    HubbardParams p = base;
    p.U = U;
    p.validate();
    ValidatorRow r;
    r.U = U;
    r.e_hubbard = hubbard_sector_ground_state(p, nu, nd).energy;
    r.e_effective = perturbative_energy_estimate(p);
    r.deviation = std::abs(r.e_hubbard - r.e_effective);
    out.rows.push_back(r);
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : out.rows)
    if (r.deviation > 0.0) pts.emplace_back(std::log(1.0 / r.U), std::log(r.deviation));
  if (pts.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : pts) mx += x, my += y;
    mx /= pts.size();
    my /= pts.size();
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
    if (sxx > 0) out.exponent = sxy / sxx;
  }
  if (out.rows.size() >= 2 && out.rows.back().deviation > 0.0)
    out.shrink_factor = out.rows.front().deviation / out.rows.back().deviation;
  return out;
}

}  // namespace hubsqd
