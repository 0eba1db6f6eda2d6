// hubsqd: config-driven pipeline from Hubbard parameters to SQD energies.
//
//   hubsqd <map|vqite|sample|sqd|chem|validate> --config run.json [--seed N] [--out DIR]
//
// Exit status: 0 success, 2 configuration error, 3 numerical non-convergence.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hubsqd/config.hpp"
#include "hubsqd/hubsqd.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hubsqd;

namespace {

constexpr const char* kToolVersion = "hubsqd 1.0.0";
constexpr std::size_t kOracleSectorCap = 200000;

enum Exit : int { kOk = 0, kFailure = 1, kConfig = 2, kNoConvergence = 3 };

struct Timings {
  std::vector<std::pair<std::string, double>> stages;

  template <class F>
  auto time(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record {
      Timings* self;
      std::string stage;
      std::chrono::steady_clock::time_point t0;
      ~Record() { self->stages.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()); }
    } rec{this, stage, t0};
    try {
      return f();
    } catch (const convergence_error& e) {
      throw convergence_error(stage + ": " + e.what(), e.best_residual());
    } catch (const config_error&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error(stage + ": " + e.what());
    }
  }
};

struct Context {
  ExperimentConfig cfg;
  fs::path config_dir;
  fs::path out;
  std::optional<fs::path> theta_from;
  Timings timings;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

json theta_json(const Theta& t) { return json(std::vector<double>(t.begin(), t.end())); }

json energy_record(double value, const std::string& method, const std::string& stage) {
  return {{"value", value}, {"method", method}, {"stage", stage}};
}

json report_base(const Context& ctx, const std::string& command) {
  json r;
  r["tool_version"] = kToolVersion;
  r["command"] = command;
  r["config"] = config_to_json(ctx.cfg);
  return r;
}

void finish(Context& ctx, const json& report) {
  write_file(ctx.out / "report.json", report.dump(2) + "\n");
  json t = json::object();
  for (const auto& [k, v] : ctx.timings.stages) t[k] = v;
  write_file(ctx.out / "timings.json", t.dump(2) + "\n");
}

const HubbardParams& require_hubbard(const Context& ctx, const char* command) {
  if (!ctx.cfg.hubbard) throw config_error(std::string(command) + ": requires a model.hubbard block");
  return *ctx.cfg.hubbard;
}

SpinHamiltonianSpec spin_target(const ExperimentConfig& c) {
  if (c.heisenberg) return build_spin_hamiltonian(*c.heisenberg, false);
  return build_spin_hamiltonian(effective_couplings(*c.hubbard), false);
}

AnalogAnsatz ansatz_for(const ExperimentConfig& c) {
  const int L = c.sites();
  if (L > kMaxAtoms)
    throw config_error("L = " + std::to_string(L) + " exceeds the 24-atom simulator cap; use pipeline.source = \"file\" with externally produced samples");
  return AnalogAnsatz(AtomGeometry::chain(L, c.pipeline.spacing));
}

VqiteConfig vqite_config(const ExperimentConfig& c) {
  VqiteConfig v;
  v.d_tau = c.pipeline.vqite.d_tau;
  v.max_steps = c.pipeline.vqite.max_steps;
  v.fd_epsilon = c.pipeline.vqite.fd_epsilon;
  v.regularization = c.pipeline.vqite.regularization;
  v.stop_tolerance = c.pipeline.vqite.stop_tolerance;
  v.target = spin_target(c);
  return v;
}

struct VqiteOutcome {
  VqiteResult result;
  json record;
};

VqiteOutcome run_vqite_stage(Context& ctx) {
  const auto& c = ctx.cfg;
  const AnalogAnsatz ansatz = ansatz_for(c);
  const VqiteConfig vc = vqite_config(c);
  std::optional<Eigenpair> exact;
  ctx.timings.time("oracle", [&] { exact = target_ground_state(vc.target, c.pipeline.vqite.fidelity_max_qubits); return 0; });
  VqiteOutcome out;
  out.result = ctx.timings.time("vqite", [&] { return run_vqite(ansatz, vc, c.pipeline.vqite.theta0, exact); });

  std::ostringstream csv;
  csv << "step,energy,fidelity,condition,flagged,omega_max,delta_start,delta_end,phi,t_max\n";
  json steps = json::array();
  for (const auto& r : out.result.trace.records) {
    csv << r.step << ',' << format_double(r.energy) << ',' << (r.fidelity ? format_double(*r.fidelity) : "") << ','
        << format_double(r.condition) << ',' << (r.flagged ? 1 : 0);
    for (double v : r.theta) csv << ',' << format_double(v);
    csv << '\n';
    json s = {{"step", r.step}, {"theta", theta_json(r.theta)}, {"energy", r.energy}, {"condition", std::isfinite(r.condition) ? json(r.condition) : json(nullptr)}, {"flagged", r.flagged}};
    s["fidelity"] = r.fidelity ? json(*r.fidelity) : json(nullptr);
    steps.push_back(s);
  }
  write_file(ctx.out / "vqite_trace.csv", csv.str());

  out.record = {{"steps", steps},
                {"best_theta", theta_json(out.result.best_theta)},
                {"best_energy", energy_record(out.result.best_energy, "vqite", "vqite")},
                {"converged", out.result.converged},
                {"reached_tolerance", out.result.reached_tolerance}};
  if (exact) out.record["exact_energy"] = energy_record(exact->energy, "exact", "oracle");
  return out;
}

Theta theta_from_report(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw config_error("cannot open theta source " + p.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception&) {
    throw config_error(p.string() + ": not valid JSON");
  }
  const json* t = nullptr;
  if (j.contains("vqite") && j["vqite"].contains("best_theta")) t = &j["vqite"]["best_theta"];
  else if (j.contains("best_theta")) t = &j["best_theta"];
  if (!t) throw config_error(p.string() + ": no best_theta field");
  return detail::theta_from(*t, p.string() + ": best_theta");
}

struct SampleOutcome {
  std::vector<Bitstring> bitstrings;
  std::vector<Determinant> determinants;  // native determinant files
  std::string source;
  json record;
};

// Theta for simulated sampling: --theta-from, pipeline.theta, fitted
// extrapolation, in that order; nullopt when none is available.
std::optional<std::pair<Theta, std::string>> resolve_theta(const Context& ctx, json& note) {
  const auto& p = ctx.cfg.pipeline;
  if (ctx.theta_from) return std::pair{theta_from_report(*ctx.theta_from), std::string("report")};
  if (p.theta) return std::pair{*p.theta, std::string("config")};
  if (!p.theta_fits.empty()) {
    const auto model = extrapolate_hyperparameters(p.theta_fits);
    if (!model.warning.empty()) {
      note["warning"] = model.warning;
      std::cerr << "warning: " << model.warning << '\n';
    }
    return std::pair{model(ctx.cfg.sites()), std::string("extrapolated")};
  }
  return std::nullopt;
}

SampleOutcome acquire_samples(Context& ctx, bool allow_inline_vqite, json& report) {
  const auto& c = ctx.cfg;
  const int L = c.sites();
  const std::uint64_t seed = derive_seed(c.seed, "sampling");
  SampleOutcome out;
  switch (c.pipeline.source) {
    case SampleSource::random_uniform:
      out.bitstrings = ctx.timings.time("sampling", [&] { return sample_uniform(L, c.pipeline.shots, seed); });
      out.source = "random-uniform";
      break;
    case SampleSource::file: {
      fs::path f(c.pipeline.sample_file);
      if (f.is_relative()) f = ctx.config_dir / f;
      std::ifstream is(f);
      if (!is) throw config_error("pipeline.sample_file: cannot open " + f.string());
      std::string first;
      std::getline(is, first);
      is.seekg(0);
      if (first.find("up=") != std::string::npos) {
        auto [dets, len] = read_determinants(is);
        if (len != L) throw config_error("pipeline.sample_file: determinants have " + std::to_string(len) + " sites, model has " + std::to_string(L));
        out.determinants = std::move(dets);
        out.source = "file:determinants";
      } else {
        SampleFile sf = read_samples(is);
        if (!sf.samples.empty() && sf.samples.front().length != L)
          throw config_error("pipeline.sample_file: bitstrings have length " + std::to_string(sf.samples.front().length) + ", model has L = " + std::to_string(L));
        out.bitstrings = std::move(sf.samples);
        out.source = "file:" + (sf.source.empty() ? std::string("unknown") : sf.source);
      }
      break;
    }
    case SampleSource::simulated: {
      json note = json::object();
      auto theta = resolve_theta(ctx, note);
      if (!theta) {
        if (!allow_inline_vqite)
          throw config_error("sample: no theta available; set pipeline.theta, pipeline.theta_fits or pass --theta-from a vqite report");
        auto v = run_vqite_stage(ctx);
        report["vqite"] = v.record;
        theta = std::pair{v.result.best_theta, std::string("vqite")};
      }
      const AnalogAnsatz ansatz = ansatz_for(c);
      const StateVector psi = ctx.timings.time("evolve", [&] { return ansatz(theta->first); });
      out.bitstrings = ctx.timings.time("sampling", [&] { return sample(psi, L, c.pipeline.shots, seed); });
      out.source = "simulated";
      note["theta"] = theta_json(theta->first);
      note["theta_source"] = theta->second;
      out.record = note;
      for (const auto& w : hardware_warnings(schedule_from(theta->first), ansatz.geometry())) std::cerr << "warning: " << w << '\n';
      break;
    }
  }
  out.record["source"] = out.source;
  out.record["shots"] = out.determinants.empty() ? out.bitstrings.size() : out.determinants.size();
  out.record["seed"] = seed;
  return out;
}

ConfigurationSet configurations(const SampleOutcome& s, int L) {
  if (!s.determinants.empty()) return ConfigurationSet::from_determinants(L, s.determinants);
  return ConfigurationSet::from_bitstrings(L, s.bitstrings);
}

SqdConfig sqd_config(const ExperimentConfig& c, Sector target, std::uint64_t seed) {
  SqdConfig s;
  s.batches = c.sqd.K;
  s.batch_size = c.sqd.d;
  s.max_outer_iters = c.sqd.max_outer_iters;
  s.davidson_tol = c.sqd.davidson_tol;
  s.subspace = c.sqd.subspace;
  s.seed = seed;
  s.target = target;
  s.max_subspace_dim = c.sqd.max_subspace_dim;
  if (c.sqd.subspace_fraction) {
    const auto dim = binomial(c.sites(), target.n_up) * binomial(c.sites(), target.n_dn);
    s.max_subspace_dim = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(*c.sqd.subspace_fraction * static_cast<double>(dim))));
  }
  return s;
}

std::optional<double> sector_oracle(const HubbardParams& p, Sector s) {
  if (binomial(p.L, s.n_up) * binomial(p.L, s.n_dn) > kOracleSectorCap) return std::nullopt;
  return hubbard_sector_ground_state(p, s.n_up, s.n_dn).energy;
}

json sqd_record(const SubspaceResult& r) {
  json iters = json::array();
  for (std::size_t k = 0; k < r.iterations.size(); ++k) {
    const auto& it = r.iterations[k];
    iters.push_back({{"iteration", k}, {"batch_energies", it.batch_energies}, {"subspace_dims", it.subspace_dims}, {"best_energy", it.best_energy}});
  }
  return {{"iterations", iters}, {"occupancies", r.occupancies}, {"converged", r.converged},
          {"energy", energy_record(r.energy, "sqd", "sqd")}};
}

// ---------------------------------------------------------------- commands

int cmd_map(Context& ctx) {
  const auto& p = require_hubbard(ctx, "map");
  if (!(p.U > 0.0)) throw config_error("model.hubbard.U: must be positive");
  const auto h = effective_couplings(p);
  const auto spec = build_spin_hamiltonian(h, true);
  std::cout << "Jxy1=" << format_double(h.Jxy1) << '\n'
            << "Jz1=" << format_double(h.Jz1) << '\n'
            << "Jxy2=" << format_double(h.Jxy2) << '\n'
            << "Jz2=" << format_double(h.Jz2) << '\n'
            << "constant_shift=" << format_double(spec.constant_shift) << '\n';
  if (h.isotropic()) std::cout << "isotropic\n";
  json r = report_base(ctx, "map");
  r["couplings"] = {{"Jxy1", h.Jxy1}, {"Jz1", h.Jz1}, {"Jxy2", h.Jxy2}, {"Jz2", h.Jz2}, {"L", h.L}};
  r["constant_shift"] = spec.constant_shift;
  r["isotropic"] = h.isotropic();
  finish(ctx, r);
  return kOk;
}

int cmd_vqite(Context& ctx) {
  json r = report_base(ctx, "vqite");
  auto v = run_vqite_stage(ctx);
  r["vqite"] = v.record;
  finish(ctx, r);
  std::cout << "best_energy=" << format_double(v.result.best_energy) << '\n';
  std::cout << "best_theta=";
  for (std::size_t i = 0; i < kThetaSize; ++i) std::cout << (i ? "," : "") << format_double(v.result.best_theta[i]);
  std::cout << '\n';
  if (!v.result.converged) {
    std::cerr << "vqite: not converged after " << ctx.cfg.pipeline.vqite.max_steps << " steps\n";
    return kNoConvergence;
  }
  return kOk;
}

int cmd_sample(Context& ctx) {
  if (ctx.cfg.pipeline.source == SampleSource::file) throw config_error("sample: pipeline.source = file has nothing to sample");
  json r = report_base(ctx, "sample");
  auto s = acquire_samples(ctx, false, r);
  SampleFile f{derive_seed(ctx.cfg.seed, "sampling"), s.source, s.bitstrings};
  std::ostringstream os;
  write_samples(os, f);
  write_file(ctx.out / "samples.txt", os.str());
  r["sampling"] = s.record;
  finish(ctx, r);
  std::cout << "wrote " << s.bitstrings.size() << " samples to " << (ctx.out / "samples.txt").string() << '\n';
  return kOk;
}

int cmd_sqd(Context& ctx) {
  const auto& p = require_hubbard(ctx, "sqd");
  const auto [hu, hd] = half_filled_sector(p.L);
  const Sector target = ctx.cfg.sqd.sector.value_or(Sector{hu, hd});
  json r = report_base(ctx, "sqd");
  auto s = acquire_samples(ctx, true, r);
  r["sampling"] = s.record;
  const ConfigurationSet cs = configurations(s, p.L);
  const auto spec = hubbard_hamiltonian(p);
  const std::uint64_t sqd_seed = derive_seed(ctx.cfg.seed, "sqd");
  const SqdConfig sc = sqd_config(ctx.cfg, target, sqd_seed);
  const SubspaceResult res = ctx.timings.time("sqd", [&] { return sqd_run(spec, cs, sc); });

  json rec = sqd_record(res);
  rec["sector"] = {{"n_up", target.n_up}, {"n_dn", target.n_dn}};
  rec["max_subspace_dim"] = sc.max_subspace_dim;
  rec["sector_dim"] = binomial(p.L, target.n_up) * binomial(p.L, target.n_dn);
  rec["unique_configurations"] = cs.size();
  std::ostringstream csv;
  csv << "iteration,batch,energy,subspace_dim\n";
  for (std::size_t k = 0; k < res.iterations.size(); ++k)
    for (std::size_t b = 0; b < res.iterations[k].batch_energies.size(); ++b)
      csv << k << ',' << b << ',' << format_double(res.iterations[k].batch_energies[b]) << ',' << res.iterations[k].subspace_dims[b] << '\n';
  write_file(ctx.out / "sqd_iterations.csv", csv.str());

  const auto exact = ctx.timings.time("oracle", [&] { return sector_oracle(p, target); });
  if (exact) {
    rec["exact_energy"] = energy_record(*exact, "exact", "oracle");
    rec["error"] = res.energy - *exact;
  } else {
    rec["exact_energy"] = nullptr;
  }

  if (!ctx.cfg.sqd.dimension_sweep.empty()) {
    std::ostringstream sw;
    sw << "max_subspace_dim,energy,error\n";
    json rows = json::array();
    for (std::size_t cap : ctx.cfg.sqd.dimension_sweep) {
      SqdConfig scap = sc;
      scap.max_subspace_dim = cap;
      const auto rs = ctx.timings.time("sweep", [&] { return sqd_run(spec, cs, scap); });
      json row = {{"max_subspace_dim", cap}, {"energy", energy_record(rs.energy, "sqd", "sweep")}};
      sw << cap << ',' << format_double(rs.energy) << ',';
      if (exact) {
        row["error"] = rs.energy - *exact;
        sw << format_double(rs.energy - *exact);
      }
      sw << '\n';
      rows.push_back(row);
    }
    write_file(ctx.out / "sqd_sweep.csv", sw.str());
    rec["dimension_sweep"] = rows;
  }
  r["sqd"] = rec;
  finish(ctx, r);
  std::cout << "sqd_energy=" << format_double(res.energy) << '\n';
  if (exact) std::cout << "exact_energy=" << format_double(*exact) << "\nerror=" << format_double(res.energy - *exact) << '\n';
  return kOk;
}

int cmd_chem(Context& ctx) {
  const auto& p = require_hubbard(ctx, "chem");
  const auto& occ = ctx.cfg.sqd.occupations;
  if (occ.empty()) throw config_error("sqd.occupations: chem needs a list of N_occ values");
  const int n_mu = ctx.cfg.sqd.mu_at ? ctx.cfg.sqd.mu_at : p.L;
  for (int need : {n_mu - 1, n_mu})
    if (std::find(occ.begin(), occ.end(), need) == occ.end())
      throw config_error("chem: mu(" + std::to_string(n_mu) + ") needs N_occ = " + std::to_string(need) + ", absent from sqd.occupations");

  json r = report_base(ctx, "chem");
  auto s = acquire_samples(ctx, true, r);
  r["sampling"] = s.record;
  const ConfigurationSet cs = configurations(s, p.L);
  const auto spec = hubbard_hamiltonian(p);
  const std::string method = "sqd-" + s.source;

  EnergyTable table;
  json sectors = json::array();
  std::map<int, double> exact;
  for (int n : occ) {
    double best = INFINITY;
    Sector best_sector{};
    for (int nu = (n + 1) / 2; nu >= n / 2; --nu) {
      const Sector sec{nu, n - nu};
      if (sec.n_up > p.L || sec.n_dn > p.L || sec.n_dn < 0) continue;
      const auto sc = sqd_config(ctx.cfg, sec, derive_seed(derive_seed(ctx.cfg.seed, "chem"), static_cast<std::uint64_t>(n * 64 + nu)));
      const auto res = ctx.timings.time("sqd", [&] { return sqd_run(spec, cs, sc); });
      json rec = sqd_record(res);
      rec["N_occ"] = n;
      rec["sector"] = {{"n_up", sec.n_up}, {"n_dn", sec.n_dn}};
      rec["max_subspace_dim"] = sc.max_subspace_dim;
      sectors.push_back(rec);
      if (res.energy < best) best = res.energy, best_sector = sec;
    }
    table.add({n, best, method, ctx.cfg.seed});
    bool solvable = true;
    for (int nu = (n + 1) / 2; nu >= n / 2; --nu)
      if (binomial(p.L, nu) * binomial(p.L, n - nu) > kOracleSectorCap) solvable = false;
    if (solvable) exact[n] = ctx.timings.time("oracle", [&] { return exact_occupation_energy(p, n); });
  }
  for (const auto& [n, e] : exact) table.add({n, e, "exact", 0});
  write_file(ctx.out / "energies.csv", table.to_csv());

  const auto mu = chemical_potential(table.select(method, ctx.cfg.seed), n_mu);
  json m = {{"N_occ", n_mu}, {"mu", energy_record(mu.mu, method, "chem")}};
  m["mu_prime"] = mu.mu_prime ? energy_record(*mu.mu_prime, method, "chem") : json(nullptr);
  std::cout << "mu(" << n_mu << ")=" << format_double(mu.mu) << '\n';
  if (mu.mu_prime) std::cout << "mu_prime(" << n_mu << ")=" << format_double(*mu.mu_prime) << '\n';
  const EnergyTable ex = table.select("exact", 0);
  if (ex.energy(n_mu) && ex.energy(n_mu - 1)) {
    const auto mu_ex = chemical_potential(ex, n_mu);
    m["exact_mu"] = energy_record(mu_ex.mu, "exact", "oracle");
    m["mu_error"] = mu.mu - mu_ex.mu;
    if (mu_ex.mu_prime) m["exact_mu_prime"] = energy_record(*mu_ex.mu_prime, "exact", "oracle");
    std::cout << "exact_mu(" << n_mu << ")=" << format_double(mu_ex.mu) << '\n';
  }
  r["sectors"] = sectors;
  r["chemical_potential"] = m;
  finish(ctx, r);
  return kOk;
}

int cmd_validate(Context& ctx) {
  const auto& p = require_hubbard(ctx, "validate");
  if (p.L > 8) throw config_error("validate: L must be <= 8 for exact diagonalization");
  const auto v = ctx.timings.time("validate", [&] { return perturbation_validator(p, ctx.cfg.validate.U_list); });
  std::ostringstream csv;
  csv << "U,E_hubbard,E_effective,deviation\n";
  json rows = json::array();
  for (const auto& row : v.rows) {
    csv << format_double(row.U) << ',' << format_double(row.e_hubbard) << ',' << format_double(row.e_effective) << ',' << format_double(row.deviation) << '\n';
    rows.push_back({{"U", row.U}, {"hubbard", energy_record(row.e_hubbard, "exact", "validate")},
                    {"effective", energy_record(row.e_effective, "perturbative", "validate")}, {"deviation", row.deviation}});
    std::cout << "U=" << format_double(row.U) << " deviation=" << format_double(row.deviation) << '\n';
  }
  write_file(ctx.out / "validate.csv", csv.str());
  json r = report_base(ctx, "validate");
  r["rows"] = rows;
  r["exponent"] = v.exponent ? json(*v.exponent) : json(nullptr);
  r["shrink_factor"] = v.shrink_factor ? json(*v.shrink_factor) : json(nullptr);
  if (v.exponent) std::cout << "fitted_exponent=" << format_double(*v.exponent) << '\n';
  if (v.shrink_factor) std::cout << "shrink_factor=" << format_double(*v.shrink_factor) << '\n';
  finish(ctx, r);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hubbard ground states from Rydberg-sampled SQD"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string theta_from;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--out", out_dir, "output directory (overrides output.directory)");

  const std::map<std::string, int (*)(Context&)> commands{
      {"map", cmd_map}, {"vqite", cmd_vqite}, {"sample", cmd_sample}, {"sqd", cmd_sqd}, {"chem", cmd_chem}, {"validate", cmd_validate}};
  std::map<std::string, CLI::App*> subs;
  subs["map"] = app.add_subcommand("map", "print the effective spin couplings");
  subs["vqite"] = app.add_subcommand("vqite", "optimize pulse hyperparameters by imaginary-time evolution");
  subs["sample"] = app.add_subcommand("sample", "write a sample file");
  subs["sqd"] = app.add_subcommand("sqd", "sample-based diagonalization of the Hubbard chain");
  subs["chem"] = app.add_subcommand("chem", "energies per occupation and the chemical potential");
  subs["validate"] = app.add_subcommand("validate", "compare exact and perturbative energies over U");
  subs["sample"]->add_option("--theta-from", theta_from, "vqite report.json providing best_theta");
  subs["sqd"]->add_option("--theta-from", theta_from, "vqite report.json providing best_theta");
  subs["chem"]->add_option("--theta-from", theta_from, "vqite report.json providing best_theta");
  for (auto& [name, sub] : subs) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    Context ctx;
    ctx.cfg = load_config(config_path);
    ctx.config_dir = fs::path(config_path).parent_path();
    if (seed) ctx.cfg.seed = *seed;
    validate_config(ctx.cfg, ctx.config_dir);
    if (!theta_from.empty()) ctx.theta_from = theta_from;
    ctx.out = out_dir.empty() ? fs::path(ctx.cfg.output.directory) : fs::path(out_dir);
    fs::create_directories(ctx.out);
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) return commands.at(name)(ctx);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const convergence_error& e) {
    std::cerr << "not converged: " << e.what() << " (best residual " << format_double(e.best_residual()) << ")\n";
    return kNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
