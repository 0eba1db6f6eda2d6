#pragma once

// Sample files and determinant files.
//
//   # shots=<n> seed=<s> source=<tag>
//   0110
//   1001
//
// One bitstring per line, qubit 0 leftmost. Determinant files hold one
// "up=<bits> dn=<bits>" line per configuration; '#' starts a comment.

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubsqd/fock.hpp"
#include "hubsqd/models.hpp"

namespace hubsqd {

struct SampleFile {
  std::uint64_t seed = 0;
  std::string source;
  std::vector<Bitstring> samples;
};

inline void write_samples(std::ostream& os, const SampleFile& f) {
  if (f.source.find_first_of(" \n") != std::string::npos) throw std::domain_error("write_samples: source tag may not contain spaces");
  os << "# shots=" << f.samples.size() << " seed=" << f.seed << " source=" << f.source << '\n';
  for (const auto& b : f.samples) os << b.str() << '\n';
}

inline SampleFile read_samples(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw std::domain_error("read_samples: missing '# shots=... seed=... source=...' header");
  SampleFile f;
  std::size_t shots = 0;
  bool have_shots = false;
  std::istringstream hs(line.substr(2));
  for (std::string kv; hs >> kv;) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::domain_error("read_samples: malformed header field '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    try {
      if (key == "shots") {
        shots = std::stoull(value);
        have_shots = true;
      } else if (key == "seed") {
        f.seed = std::stoull(value);
      } else if (key == "source") {
        f.source = value;
      }
    } catch (const std::exception&) {
      throw std::domain_error("read_samples: bad header value for " + key);
    }
  }
  if (!have_shots) throw std::domain_error("read_samples: header lacks shots=");
  int length = -1;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto b = Bitstring::parse(line);
    if (length < 0) length = b.length;
    if (b.length != length) throw std::domain_error("read_samples: bitstrings of unequal length");
    f.samples.push_back(b);
  }
  if (f.samples.size() != shots)
    throw std::domain_error("read_samples: header declares " + std::to_string(shots) + " shots, file holds " + std::to_string(f.samples.size()));
  return f;
}

inline SampleFile load_samples(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::domain_error("cannot open sample file " + path);
  return read_samples(is);
}

/// Configurations with their site count. Repeated lines count as repeated samples.
inline std::pair<std::vector<Determinant>, int> read_determinants(std::istream& is) {
  std::vector<Determinant> out;
  int L = -1;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto [d, len] = parse_determinant(line);
    if (L < 0) L = len;
    if (len != L) throw std::domain_error("read_determinants: configurations of unequal length");
    out.push_back(d);
  }
  if (L < 0) throw std::domain_error("read_determinants: no configurations");
  return {out, L};
}

inline void write_determinants(std::ostream& os, std::span<const Determinant> dets, int L) {
  for (const auto& d : dets) os << to_string(d, L) << '\n';
}

}  // namespace hubsqd
