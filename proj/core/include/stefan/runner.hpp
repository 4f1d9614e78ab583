#pragma once

#include <string>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/manifest.hpp"
#include "stefan/verification.hpp"

namespace stefan {

// Exit codes shared by the CLI: 0 success, 1 configuration rejected,
// 2 runtime failure (blow-up, missing or corrupt data), 3 verification failed.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitVerify = 3;

struct RunnerOptions {
  int threads = 0;  // 0 = hardware concurrency
  bool quiet = false;
};

int run_simulate(const ParsedConfig& cfg, const std::string& out_dir, const RunnerOptions& opt);
int run_verify(const std::string& run_dir, const RunnerOptions& opt);
int run_converge(const ParsedConfig& cfg, const std::string& out_dir, const RunnerOptions& opt);
int run_qreport(const ParsedConfig& cfg, const std::string& out_dir, const RunnerOptions& opt);

// file helpers shared with the tests
void write_grid_csv(const std::string& path, const Basis& basis, std::span<const double> grid);
std::vector<double> read_grid_csv(const std::string& path, const Basis& basis);
std::string model_validation_to_json(const ModelValidation& mv);
void write_snapshot_csv(const std::string& path, const Basis& basis, const Trajectory& tr);
std::vector<std::vector<double>> read_snapshot_csv(const std::string& path, const Basis& basis,
                                                   std::vector<double>& times);
void write_dw_file(const std::string& path, const Trajectory& tr);
void read_dw_file(const std::string& path, int& steps, int& noise_dim, std::vector<double>& dw);

// A finished run directory pulled back into memory: the manifest (hash
// checked), the rebuilt simulation, and the trajectories replayed from the
// stored increments and cross-checked against the stored snapshots.
struct LoadedRun {
  ParsedConfig config;
  RunManifest manifest;
  std::unique_ptr<Simulation> sim;
  std::vector<Trajectory> trajectories;
};

LoadedRun load_run(const std::string& run_dir);

std::string report_to_json(const VerificationReport& rep);

}  // namespace stefan
