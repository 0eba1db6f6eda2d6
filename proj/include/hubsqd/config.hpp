#pragma once

// Experiment configuration: JSON with a version field, strict keys, and a
// normalized emitted form (every default filled in, keys sorted).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "hubsqd/models.hpp"
#include "hubsqd/sqd.hpp"
#include "hubsqd/vqite.hpp"

namespace hubsqd {

inline constexpr int kConfigVersion = 1;

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SampleSource : std::uint8_t { simulated, file, random_uniform };

inline std::string to_string(SampleSource s) {
  switch (s) {
    case SampleSource::simulated: return "simulated";
    case SampleSource::file: return "file";
    case SampleSource::random_uniform: return "random-uniform";
  }
  return "?";
}

inline std::string to_string(SubspaceMode m) { return m == SubspaceMode::product ? "product" : "direct"; }

struct VqiteSettings {
  double d_tau = 0.1;
  int max_steps = 40;
  Theta fd_epsilon = kDefaultFdEpsilon;
  std::optional<double> regularization;
  double stop_tolerance = 1e-6;
  Theta theta0 = kInitialTheta;
  int fidelity_max_qubits = 14;
  friend bool operator==(const VqiteSettings&, const VqiteSettings&) = default;
};

struct PipelineSettings {
  double spacing = 7.0;  // um, atom chain
  VqiteSettings vqite;
  std::size_t shots = 1000;
  SampleSource source = SampleSource::simulated;
  std::string sample_file;              // source = file
  std::optional<Theta> theta;           // skip VQITE and sample at this theta
  std::vector<std::pair<int, Theta>> theta_fits;  // (L, theta*) for extrapolation
  friend bool operator==(const PipelineSettings&, const PipelineSettings&) = default;
};

struct SqdSettings {
  int K = 5;
  std::size_t d = 1000;
  int max_outer_iters = 10;
  double davidson_tol = 1e-9;
  SubspaceMode subspace = SubspaceMode::product;
  std::size_t max_subspace_dim = 0;
  std::optional<double> subspace_fraction;  // of the target sector; overrides max_subspace_dim
  std::optional<Sector> sector;             // default: half filling
  std::vector<int> occupations;             // N_occ list for chem
  int mu_at = 0;                            // N_occ for mu; 0 means L
  std::vector<std::size_t> dimension_sweep; // subspace caps for a convergence sweep
  friend bool operator==(const SqdSettings&, const SqdSettings&) = default;
};

struct ValidateSettings {
  std::vector<double> U_list{50.0, 100.0};
  friend bool operator==(const ValidateSettings&, const ValidateSettings&) = default;
};

struct OutputSettings {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct ExperimentConfig {
  int version = kConfigVersion;
  std::uint64_t seed = 0;
  std::optional<HubbardParams> hubbard;
  std::optional<HeisenbergParams> heisenberg;
  PipelineSettings pipeline;
  SqdSettings sqd;
  ValidateSettings validate;
  OutputSettings output;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  int sites() const { return hubbard ? hubbard->L : heisenberg->L; }
};

namespace detail {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(path_ + ": expected an object");
  }
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw config_error(where(k) + ": unknown key");
  }

  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  std::string where(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    if (!j_.contains(k)) throw config_error(where(k) + ": required field missing");
    return j_.at(k);
  }

  template <class T>
  T get(const std::string& k) {
    const json& v = raw(k);
    if (!kind_ok<T>(v)) throw config_error(where(k) + ": wrong type");
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw config_error(where(k) + ": wrong type");
    }
  }

  template <class T>
  T get(const std::string& k, T fallback) {
    seen_.insert(k);
    if (!has(k)) return fallback;
    return get<T>(k);
  }

  void mark(const std::string& k) { seen_.insert(k); }

 private:
  template <class T>
  static bool kind_ok(const json& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v.is_boolean();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) return false;
      if constexpr (std::is_unsigned_v<T>) return v.is_number_unsigned() || v.get<long long>() >= 0;
      return true;
    } else if constexpr (std::is_floating_point_v<T>) {
      return v.is_number();
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v.is_string();
    } else {
      return true;
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Theta theta_from(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != kThetaSize) throw config_error(where + ": expected an array of 5 numbers");
  Theta t{};
  for (std::size_t i = 0; i < kThetaSize; ++i) {
    if (!v[i].is_number()) throw config_error(where + ": expected an array of 5 numbers");
    t[i] = v[i].get<double>();
  }
  return t;
}

inline json theta_json(const Theta& t) { return json(std::vector<double>(t.begin(), t.end())); }

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::Reader;
  ExperimentConfig c;
  Reader top(j, "");
  c.version = top.get<int>("version");
  if (c.version != kConfigVersion) throw config_error("version: unsupported value " + std::to_string(c.version));
  c.seed = top.get<std::uint64_t>("seed");

  {
    Reader model(top.raw("model"), "model");
    if (model.has("hubbard")) {
      Reader h(model.raw("hubbard"), "model.hubbard");
      HubbardParams p;
      p.U = h.get<double>("U");
      p.L = h.get<int>("L");
      p.t_up = h.get<double>("t_up", p.t_up);
      p.t_dn = h.get<double>("t_dn", p.t_dn);
      p.tp_up = h.get<double>("tp_up", p.tp_up);
      p.tp_dn = h.get<double>("tp_dn", p.tp_dn);
      c.hubbard = p;
    } else {
      model.mark("hubbard");
    }
    if (model.has("heisenberg")) {
      Reader h(model.raw("heisenberg"), "model.heisenberg");
      HeisenbergParams p;
      p.L = h.get<int>("L");
      p.Jxy1 = h.get<double>("Jxy1", 0.0);
      p.Jz1 = h.get<double>("Jz1", 0.0);
      p.Jxy2 = h.get<double>("Jxy2", 0.0);
      p.Jz2 = h.get<double>("Jz2", 0.0);
      c.heisenberg = p;
    } else {
      model.mark("heisenberg");
    }
    if (c.hubbard.has_value() == c.heisenberg.has_value())
      throw config_error("model: exactly one of 'hubbard' or 'heisenberg' is required");
  }

  if (top.has("pipeline")) {
    Reader p(top.raw("pipeline"), "pipeline");
    auto& s = c.pipeline;
    s.spacing = p.get<double>("spacing", s.spacing);
    s.shots = p.get<std::size_t>("shots", s.shots);
    const std::string src = p.get<std::string>("source", to_string(s.source));
    if (src == "simulated") s.source = SampleSource::simulated;
    else if (src == "file") s.source = SampleSource::file;
    else if (src == "random-uniform") s.source = SampleSource::random_uniform;
    else throw config_error("pipeline.source: expected simulated, file or random-uniform");
    s.sample_file = p.get<std::string>("sample_file", "");
    if (p.has("theta")) s.theta = detail::theta_from(p.raw("theta"), "pipeline.theta");
    else p.mark("theta");
    if (p.has("theta_fits")) {
      const auto& arr = p.raw("theta_fits");
      if (!arr.is_array()) throw config_error("pipeline.theta_fits: expected an array");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        Reader f(arr[k], "pipeline.theta_fits[" + std::to_string(k) + "]");
        const int L = f.get<int>("L");
        s.theta_fits.emplace_back(L, detail::theta_from(f.raw("theta"), "pipeline.theta_fits[" + std::to_string(k) + "].theta"));
      }
    } else {
      p.mark("theta_fits");
    }
    if (p.has("vqite")) {
      Reader v(p.raw("vqite"), "pipeline.vqite");
      auto& q = s.vqite;
      q.d_tau = v.get<double>("d_tau", q.d_tau);
      q.max_steps = v.get<int>("max_steps", q.max_steps);
      if (v.has("fd_epsilon")) q.fd_epsilon = detail::theta_from(v.raw("fd_epsilon"), "pipeline.vqite.fd_epsilon");
      else v.mark("fd_epsilon");
      if (v.has("regularization")) q.regularization = v.get<double>("regularization");
      else v.mark("regularization");
      q.stop_tolerance = v.get<double>("stop_tolerance", q.stop_tolerance);
      if (v.has("theta0")) q.theta0 = detail::theta_from(v.raw("theta0"), "pipeline.vqite.theta0");
      else v.mark("theta0");
      q.fidelity_max_qubits = v.get<int>("fidelity_max_qubits", q.fidelity_max_qubits);
    } else {
      p.mark("vqite");
    }
  } else {
    top.mark("pipeline");
  }

  if (top.has("sqd")) {
    Reader q(top.raw("sqd"), "sqd");
    auto& s = c.sqd;
    s.K = q.get<int>("K", s.K);
    s.d = q.get<std::size_t>("d", s.d);
    s.max_outer_iters = q.get<int>("max_outer_iters", s.max_outer_iters);
    s.davidson_tol = q.get<double>("davidson_tol", s.davidson_tol);
    const std::string mode = q.get<std::string>("subspace", to_string(s.subspace));
    if (mode == "product") s.subspace = SubspaceMode::product;
    else if (mode == "direct") s.subspace = SubspaceMode::direct;
    else throw config_error("sqd.subspace: expected product or direct");
    s.max_subspace_dim = q.get<std::size_t>("max_subspace_dim", s.max_subspace_dim);
    if (q.has("subspace_fraction")) s.subspace_fraction = q.get<double>("subspace_fraction");
    else q.mark("subspace_fraction");
    if (q.has("sector")) {
      Reader sec(q.raw("sector"), "sqd.sector");
      s.sector = Sector{sec.get<int>("n_up"), sec.get<int>("n_dn")};
    } else {
      q.mark("sector");
    }
    s.occupations = q.get<std::vector<int>>("occupations", s.occupations);
    s.mu_at = q.get<int>("mu_at", s.mu_at);
    s.dimension_sweep = q.get<std::vector<std::size_t>>("dimension_sweep", s.dimension_sweep);
  } else {
    top.mark("sqd");
  }

  if (top.has("validate")) {
    Reader v(top.raw("validate"), "validate");
    c.validate.U_list = v.get<std::vector<double>>("U_list", c.validate.U_list);
  } else {
    top.mark("validate");
  }

  if (top.has("output")) {
    Reader o(top.raw("output"), "output");
    c.output.directory = o.get<std::string>("directory", c.output.directory);
    c.output.formats = o.get<std::vector<std::string>>("formats", c.output.formats);
  } else {
    top.mark("output");
  }
  return c;
}

/// Range and consistency checks beyond the schema. `base_dir` resolves a
/// relative sample_file path.
inline void validate_config(const ExperimentConfig& c, const std::filesystem::path& base_dir = {}) {
  try {
    if (c.hubbard) c.hubbard->validate();
    if (c.heisenberg) c.heisenberg->validate();
  } catch (const std::domain_error& e) {
    throw config_error(std::string("model: ") + e.what());
  }
  const auto& p = c.pipeline;
  if (!(p.spacing > 0.0)) throw config_error("pipeline.spacing: must be positive");
  if (!(p.vqite.d_tau > 0.0)) throw config_error("pipeline.vqite.d_tau: must be positive");
  if (p.vqite.max_steps < 0) throw config_error("pipeline.vqite.max_steps: must be >= 0");
  if (p.vqite.regularization && !(*p.vqite.regularization >= 0.0)) throw config_error("pipeline.vqite.regularization: must be >= 0");
  for (double e : p.vqite.fd_epsilon)
    if (!(e > 0.0)) throw config_error("pipeline.vqite.fd_epsilon: entries must be positive");
  if (p.source == SampleSource::file) {
    if (p.sample_file.empty()) throw config_error("pipeline.sample_file: required when source is file");
    std::filesystem::path f(p.sample_file);
    if (f.is_relative() && !base_dir.empty()) f = base_dir / f;
    if (!std::filesystem::exists(f)) throw config_error("pipeline.sample_file: " + f.string() + " does not exist");
  }
  const auto& s = c.sqd;
  if (s.K < 1) throw config_error("sqd.K: must be >= 1");
  if (s.d < 1) throw config_error("sqd.d: must be >= 1");
  if (s.max_outer_iters < 1) throw config_error("sqd.max_outer_iters: must be >= 1");
  if (!(s.davidson_tol > 0.0)) throw config_error("sqd.davidson_tol: must be positive");
  if (s.subspace_fraction && !(*s.subspace_fraction > 0.0 && *s.subspace_fraction <= 1.0))
    throw config_error("sqd.subspace_fraction: must lie in (0, 1]");
  const int L = c.sites();
  if (s.sector && (s.sector->n_up < 0 || s.sector->n_dn < 0 || s.sector->n_up > L || s.sector->n_dn > L))
    throw config_error("sqd.sector: counts must lie in [0, L]");
  for (int n : s.occupations)
    if (n < 0 || n > 2 * L) throw config_error("sqd.occupations: entries must lie in [0, 2L]");
  for (double U : c.validate.U_list)
    if (!(U > 0.0)) throw config_error("validate.U_list: entries must be positive");
  for (const auto& f : c.output.formats)
    if (f != "csv" && f != "json") throw config_error("output.formats: unknown format " + f);
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["version"] = c.version;
  j["seed"] = c.seed;
  json model = json::object();
  if (c.hubbard)
    model["hubbard"] = {{"U", c.hubbard->U}, {"L", c.hubbard->L}, {"t_up", c.hubbard->t_up}, {"t_dn", c.hubbard->t_dn},
                        {"tp_up", c.hubbard->tp_up}, {"tp_dn", c.hubbard->tp_dn}};
  if (c.heisenberg)
    model["heisenberg"] = {{"L", c.heisenberg->L}, {"Jxy1", c.heisenberg->Jxy1}, {"Jz1", c.heisenberg->Jz1},
                           {"Jxy2", c.heisenberg->Jxy2}, {"Jz2", c.heisenberg->Jz2}};
  j["model"] = model;

  const auto& p = c.pipeline;
  json vq = {{"d_tau", p.vqite.d_tau},
             {"max_steps", p.vqite.max_steps},
             {"fd_epsilon", detail::theta_json(p.vqite.fd_epsilon)},
             {"stop_tolerance", p.vqite.stop_tolerance},
             {"theta0", detail::theta_json(p.vqite.theta0)},
             {"fidelity_max_qubits", p.vqite.fidelity_max_qubits}};
  vq["regularization"] = p.vqite.regularization ? json(*p.vqite.regularization) : json(nullptr);
  json fits = json::array();
  for (const auto& [L, th] : p.theta_fits) fits.push_back({{"L", L}, {"theta", detail::theta_json(th)}});
  j["pipeline"] = {{"spacing", p.spacing}, {"shots", p.shots},       {"source", to_string(p.source)},
                   {"sample_file", p.sample_file}, {"vqite", vq}, {"theta_fits", fits}};
  j["pipeline"]["theta"] = p.theta ? detail::theta_json(*p.theta) : json(nullptr);

  const auto& s = c.sqd;
  j["sqd"] = {{"K", s.K},
              {"d", s.d},
              {"max_outer_iters", s.max_outer_iters},
              {"davidson_tol", s.davidson_tol},
              {"subspace", to_string(s.subspace)},
              {"max_subspace_dim", s.max_subspace_dim},
              {"occupations", s.occupations},
              {"mu_at", s.mu_at},
              {"dimension_sweep", s.dimension_sweep}};
  j["sqd"]["subspace_fraction"] = s.subspace_fraction ? json(*s.subspace_fraction) : json(nullptr);
  j["sqd"]["sector"] = s.sector ? json{{"n_up", s.sector->n_up}, {"n_dn", s.sector->n_dn}} : json(nullptr);
  j["validate"] = {{"U_list", c.validate.U_list}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return j;
}

inline std::string emit_config(const ExperimentConfig& c) { return config_to_json(c).dump(2) + "\n"; }

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hubsqd
