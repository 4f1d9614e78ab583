#include "stefan/runner.hpp"

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "stefan/errors.hpp"
#include "stefan/sha256.hpp"

namespace stefan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string path_tag(int p) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%04d", p);
  return buf;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr char kDwMagic[8] = {'S', 'T', 'E', 'F', 'A', 'N', 'D', 'W'};

}  // namespace

void write_grid_csv(const std::string& path, const Basis& basis, std::span<const double> grid) {
  if (static_cast<int>(grid.size()) != basis.grid_size())
    throw RuntimeError("grid csv: size mismatch");
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write grid csv: " + path);
  out << "# M=" << basis.grid_per_axis() << " dim=" << basis.dim() << " order=row-major\n";
  const int M = basis.grid_per_axis();
  const int rows = basis.dim() == 1 ? 1 : M;
  for (int i1 = 0; i1 < rows; ++i1) {
    for (int i2 = 0; i2 < M; ++i2)
      out << (i2 ? "," : "") << fmt17(grid[std::size_t(i1) * M + i2]);
    out << '\n';
  }
}

std::vector<double> read_grid_csv(const std::string& path, const Basis& basis) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open grid csv: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> grid;
  grid.reserve(basis.grid_size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) grid.push_back(std::stod(tok));
  }
  if (static_cast<int>(grid.size()) != basis.grid_size())
    throw RuntimeError("grid csv: wrong cell count in " + path);
  return grid;
}

std::string model_validation_to_json(const ModelValidation& mv) {
  json j;
  j["pass"] = mv.pass;
  json checks = json::array();
  for (const auto& c : mv.checks) {
    json jc;
    jc["name"] = c.name;
    jc["measured"] = c.measured;
    jc["bound"] = c.bound;
    jc["pass"] = c.pass;
    checks.push_back(jc);
  }
  j["checks"] = checks;
  return j.dump(2);
}

void write_snapshot_csv(const std::string& path, const Basis& basis, const Trajectory& tr) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write snapshots: " + path);
  out << (basis.dim() == 1 ? "time,mode_index,coefficient\n"
                           : "time,mode_index_1,mode_index_2,coefficient\n");
  for (std::size_t s = 0; s < tr.states.size(); ++s) {
    for (int j = 0; j < basis.num_modes(); ++j) {
      const Mode mo = basis.modes()[j];
      out << fmt17(tr.times[s]) << ',' << mo.k1;
      if (basis.dim() == 2) out << ',' << mo.k2;
      out << ',' << fmt17(tr.states[s][j]) << '\n';
    }
  }
}

std::vector<std::vector<double>> read_snapshot_csv(const std::string& path, const Basis& basis,
                                                   std::vector<double>& times) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open snapshots: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> states;
  times.clear();
  const int n = basis.num_modes();
  int j = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> cols;
    while (std::getline(ls, tok, ',')) cols.push_back(tok);
    const std::size_t want = basis.dim() == 1 ? 3 : 4;
    if (cols.size() != want) throw RuntimeError("snapshots: malformed row in " + path);
    if (j == 0) {
      times.push_back(std::stod(cols[0]));
      states.emplace_back(n, 0.0);
    }
    states.back()[j] = std::stod(cols.back());
    j = (j + 1) % n;
  }
  if (j != 0) throw RuntimeError("snapshots: truncated file " + path);
  return states;
}

void write_dw_file(const std::string& path, const Trajectory& tr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write increments: " + path);
  out.write(kDwMagic, 8);
  const std::uint32_t version = 1, K = static_cast<std::uint32_t>(tr.noise_dim);
  const std::uint64_t steps = static_cast<std::uint64_t>(tr.num_steps);
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&K), 4);
  out.write(reinterpret_cast<const char*>(&steps), 8);
  out.write(reinterpret_cast<const char*>(tr.dw.data()),
            static_cast<std::streamsize>(tr.dw.size() * sizeof(double)));
}

void read_dw_file(const std::string& path, int& steps, int& noise_dim, std::vector<double>& dw) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("replay data absent: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kDwMagic, 8) != 0)
    throw RuntimeError("increments file has wrong magic: " + path);
  std::uint32_t version = 0, K = 0;
  std::uint64_t st = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&K), 4);
  in.read(reinterpret_cast<char*>(&st), 8);
  if (version != 1) throw RuntimeError("increments file: unsupported version");
  noise_dim = static_cast<int>(K);
  steps = static_cast<int>(st);
  dw.resize(std::size_t(steps) * noise_dim);
  in.read(reinterpret_cast<char*>(dw.data()),
          static_cast<std::streamsize>(dw.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != dw.size() * sizeof(double))
    throw RuntimeError("increments file truncated: " + path);
}

int run_simulate(const ParsedConfig& cfg, const std::string& out_dir, const RunnerOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  Simulation sim(cfg.sim);
  const int threads = hardware_threads_or(opt.threads);
  std::vector<Trajectory> ens = sim.simulate_ensemble(threads);

  fs::create_directories(out_dir);
  RunManifest man;
  man.config = echo_config(cfg);
  man.config["dt"] = fmt17(sim.dt());  // resolved value; replay must not re-derive it
  man.seed = cfg.sim.seed;
  man.dt_used = sim.dt();
  man.lambda_max = sim.basis().lambda_max();
  man.gamma_const = sim.noise().gamma_const();
  const SeriesReport ip1 = sim.noise().check_ip1();
  man.ip1_sum = ip1.sum_k;
  man.ip1_increment_ratio = ip1.increment_ratio;
  man.ip1_status = ip1.status == SeriesStatus::converged
                       ? "converged"
                       : (ip1.status == SeriesStatus::marginal ? "marginal" : "divergent");
  const PsdReport psd = sim.noise().check_ip2_ip3();
  man.q_min_eigenvalue = psd.min_eigenvalue;
  man.q_trace_tail_ratio = psd.trace_tail_ratio;
  man.enthalpy_hypotheses_pass = sim.model().validate_hypotheses(-10.0, 10.0).pass;

  bool any_blowup = false;
  for (const auto& tr : ens) {
    man.blowup_steps.push_back(tr.blew_up ? tr.blowup_step : -1);
    any_blowup = any_blowup || tr.blew_up;
    const std::string snap = "snapshots_" + path_tag(tr.path_index) + ".csv";
    const std::string dwf = "dw_" + path_tag(tr.path_index) + ".bin";
    write_snapshot_csv((fs::path(out_dir) / snap).string(), sim.basis(), tr);
    write_dw_file((fs::path(out_dir) / dwf).string(), tr);
    man.files[snap] = sha256_file_hex((fs::path(out_dir) / snap).string());
    man.files[dwf] = sha256_file_hex((fs::path(out_dir) / dwf).string());
  }
  man.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.save((fs::path(out_dir) / "manifest.json").string());
  if (!opt.quiet)
    std::cout << "simulate: " << ens.size() << " path(s), " << sim.num_steps()
              << " steps, dt=" << sim.dt() << (any_blowup ? ", BLOW-UP flagged" : "") << "\n";
  return any_blowup ? kExitRuntime : kExitOk;
}

LoadedRun load_run(const std::string& run_dir) {
  LoadedRun run;
  run.manifest = RunManifest::load((fs::path(run_dir) / "manifest.json").string());
  for (const auto& [name, hash] : run.manifest.files) {
    const std::string full = (fs::path(run_dir) / name).string();
    if (!fs::exists(full)) throw RuntimeError("replay data absent: " + full);
    if (sha256_file_hex(full) != hash)
      throw RuntimeError("hash mismatch, refusing tampered run file: " + full);
  }
  std::string text;
  for (const auto& [k, v] : run.manifest.config) text += k + " = " + v + "\n";
  run.config = parse_config_text(text);
  run.sim = std::make_unique<Simulation>(run.config.sim);

  for (int p = 0; p < run.config.sim.paths; ++p) {
    const std::string dwf = "dw_" + path_tag(p) + ".bin";
    if (!run.manifest.files.count(dwf)) throw RuntimeError("replay data absent: " + dwf);
    int steps = 0, K = 0;
    std::vector<double> dw;
    read_dw_file((fs::path(run_dir) / dwf).string(), steps, K, dw);
    Trajectory tr = run.sim->replay(dw, p);
    // the stored snapshots must reproduce bit-for-bit
    const std::string snap = "snapshots_" + path_tag(p) + ".csv";
    std::vector<double> times;
    const auto states = read_snapshot_csv((fs::path(run_dir) / snap).string(),
                                          run.sim->basis(), times);
    if (states.size() != tr.states.size())
      throw RuntimeError("replay mismatch: snapshot count differs for path " + std::to_string(p));
    for (std::size_t s = 0; s < states.size(); ++s)
      for (std::size_t j = 0; j < states[s].size(); ++j)
        if (states[s][j] != tr.states[s][j])
          throw RuntimeError("replay mismatch: stored snapshots disagree with replay");
    run.trajectories.push_back(std::move(tr));
  }
  return run;
}

std::string report_to_json(const VerificationReport& rep) {
  json j = json::array();
  for (const auto& e : rep.entries) {
    json je;
    je["name"] = e.name;
    je["claim"] = e.claim;
    je["measured"] = e.measured;
    je["bound"] = e.bound;
    je["pass"] = e.pass;
    je["inconclusive"] = e.inconclusive;
    if (!e.detail.empty()) je["detail"] = e.detail;
    j.push_back(je);
  }
  json top;
  top["checks"] = j;
  top["all_pass"] = rep.all_pass();
  return top.dump(2);
}

int run_verify(const std::string& run_dir, const RunnerOptions& opt) {
  LoadedRun run = load_run(run_dir);
  VerifyOptions vopt;
  vopt.threads = hardware_threads_or(opt.threads);
  Verifier ver(*run.sim, vopt);
  VerificationReport rep = ver.run_all(run.trajectories);

  RunManifest man = run.manifest;
  man.energy_slack_c_e = ver.energy_slack_coefficient();
  man.save((fs::path(run_dir) / "manifest.json").string());

  std::ofstream out((fs::path(run_dir) / "report.json").string());
  out << report_to_json(rep) << "\n";
  if (!opt.quiet) rep.print_table(std::cout);
  return rep.all_pass() ? kExitOk : kExitVerify;
}

int run_converge(const ParsedConfig& cfg, const std::string& out_dir, const RunnerOptions& opt) {
  ConvergenceResult res = galerkin_convergence(cfg.sim, cfg.converge_modes);
  fs::create_directories(out_dir);
  std::ofstream csv((fs::path(out_dir) / "dn.csv").string());
  csv << "n_modes,distance_h_minus_1\n";
  for (std::size_t i = 0; i < res.modes.size(); ++i)
    csv << res.modes[i] << ',' << fmt17(res.distance[i]) << '\n';
  VerificationReport rep;
  rep.add(res.entry);
  std::ofstream out((fs::path(out_dir) / "converge_report.json").string());
  out << report_to_json(rep) << "\n";
  if (!opt.quiet) rep.print_table(std::cout);
  if (res.entry.inconclusive) return kExitRuntime;
  return res.entry.pass ? kExitOk : kExitVerify;
}

int run_qreport(const ParsedConfig& cfg, const std::string& out_dir, const RunnerOptions& opt) {
  Basis basis(cfg.sim.basis);
  EnthalpyModel model(cfg.sim.phys);
  NoiseModel noise(basis, cfg.sim.noise);
  fs::create_directories(out_dir);

  std::ofstream csv((fs::path(out_dir) / "q_grid.csv").string());
  csv << "x1,x2,q11,q12,q22,min_eigenvalue\n";
  const int M = basis.grid_per_axis();
  const double h = basis.h();
  const auto q11 = noise.q11();
  const auto q12 = noise.q12();
  const auto q22 = noise.q22();
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < (basis.dim() == 2 ? M : 1); ++i2) {
      const std::size_t at = basis.dim() == 2 ? std::size_t(i1) * M + i2 : std::size_t(i1);
      const double half = 0.5 * (q11[at] + q22[at]);
      const double rad = std::sqrt(0.25 * (q11[at] - q22[at]) * (q11[at] - q22[at]) +
                                   q12[at] * q12[at]);
      csv << fmt17((i1 + 1) * h) << ',' << fmt17(basis.dim() == 2 ? (i2 + 1) * h : 0.0) << ','
          << fmt17(q11[at]) << ',' << fmt17(q12[at]) << ',' << fmt17(q22[at]) << ','
          << fmt17(half - rad) << '\n';
    }

  const SeriesReport ip1 = noise.check_ip1();
  const PsdReport psd = noise.check_ip2_ip3();
  json j;
  j["gamma_const"] = noise.gamma_const();
  j["ip1_sum_K"] = ip1.sum_k;
  j["ip1_sum_2K"] = ip1.sum_2k;
  j["ip1_increment_ratio"] = ip1.increment_ratio;
  j["ip1_status"] = ip1.status == SeriesStatus::converged
                        ? "converged"
                        : (ip1.status == SeriesStatus::marginal ? "marginal" : "divergent");
  j["q_min_eigenvalue"] = psd.min_eigenvalue;
  j["q_trace_tail_ratio"] = psd.trace_tail_ratio;
  std::ofstream out((fs::path(out_dir) / "q_summary.json").string());
  out << j.dump(2) << "\n";
  if (!opt.quiet)
    std::cout << "qreport: gamma=" << noise.gamma_const() << " ip1_ratio=" << ip1.increment_ratio
              << " min_eig=" << psd.min_eigenvalue << "\n";
  return kExitOk;
}

}  // namespace stefan
