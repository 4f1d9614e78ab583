#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stefan/errors.hpp"
#include "stefan/runner.hpp"
#include "stefan/sha256.hpp"

using namespace stefan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("stefan_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string str() const { return path.string(); }
};

std::string small_slab_config(int paths = 1) {
  return "preset = slab2d\n"
         "t_final = 0.004\n"
         "modes_per_axis = 8\n"
         "grid_per_axis = 32\n"
         "noise_modes = 8\n"
         "save_every = 10\n"
         "paths = " + std::to_string(paths) + "\n";
}

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("", 0) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc", 3) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing: presets, overrides, rejection") {
  ParsedConfig pc = parse_config_text("preset = heat1d\n");
  CHECK(pc.sim.basis.dim == 1);
  CHECK(pc.sim.noise.alpha0 == 0.0);

  pc = parse_config_text("preset = slab2d\nalpha0 = 0.25\n# comment\nseed = 9\n");
  CHECK(pc.sim.noise.alpha0 == 0.25);
  CHECK(pc.sim.seed == 9);

  CHECK_THROWS_AS(parse_config_text("nonsense_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("preset = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dim\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("dt = fast\n"), ConfigError);

  // validator propagation: c2 < 1 violates the inverse-slope hypothesis
  ParsedConfig bad = parse_config_text("preset = slab2d\nc2 = 0.5\n");
  CHECK_THROWS_WITH_AS(Simulation{bad.sim}, doctest::Contains("min(c1,c2)"), ConfigError);
}

TEST_CASE("config echo round-trips") {
  ParsedConfig pc = parse_config_text(small_slab_config(3));
  std::string text;
  for (const auto& [k, v] : echo_config(pc)) text += k + " = " + v + "\n";
  ParsedConfig back = parse_config_text(text);
  CHECK(back.sim.basis.modes_per_axis == pc.sim.basis.modes_per_axis);
  CHECK(back.sim.noise.alpha0 == pc.sim.noise.alpha0);
  CHECK(back.sim.paths == 3);
  CHECK(back.sim.t_final == pc.sim.t_final);
  CHECK(back.converge_modes == pc.converge_modes);
}

TEST_CASE("dt = auto resolves to the stability bound") {
  ParsedConfig pc = parse_config_text("preset = heat2d\ndt = auto\n");
  Simulation sim(pc.sim);
  CHECK(sim.dt() == sim.system().stable_dt());
}

TEST_CASE("snapshot CSV and increment files round-trip") {
  ParsedConfig pc = parse_config_text(small_slab_config());
  Simulation sim(pc.sim);
  Trajectory tr = sim.simulate_path(0);
  TempDir dir;
  const std::string snap = (dir.path / "snap.csv").string();
  const std::string dwf = (dir.path / "dw.bin").string();
  write_snapshot_csv(snap, sim.basis(), tr);
  write_dw_file(dwf, tr);

  std::vector<double> times;
  const auto states = read_snapshot_csv(snap, sim.basis(), times);
  REQUIRE(states.size() == tr.states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    CHECK(times[s] == tr.times[s]);
    CHECK(states[s] == tr.states[s]);
  }
  int steps = 0, K = 0;
  std::vector<double> dw;
  read_dw_file(dwf, steps, K, dw);
  CHECK(steps == tr.num_steps);
  CHECK(K == tr.noise_dim);
  CHECK(dw == tr.dw);
}

TEST_CASE("simulate writes a complete, hash-consistent run directory") {
  ParsedConfig pc = parse_config_text(small_slab_config(2));
  TempDir dir;
  RunnerOptions opt;
  opt.quiet = true;
  CHECK(run_simulate(pc, dir.str(), opt) == kExitOk);
  RunManifest man = RunManifest::load((dir.path / "manifest.json").string());
  CHECK(man.files.size() == 4);  // 2 paths x (snapshots + increments)
  CHECK(man.blowup_steps == std::vector<int>({-1, -1}));
  CHECK(man.dt_used > 0.0);
  for (const auto& [name, hash] : man.files)
    CHECK(sha256_file_hex((dir.path / name).string()) == hash);

  LoadedRun run = load_run(dir.str());
  CHECK(run.trajectories.size() == 2);
  CHECK(run.trajectories[0].states.size() == run.trajectories[1].states.size());
}

TEST_CASE("verify refuses tampered runs and missing replay data") {
  ParsedConfig pc = parse_config_text(small_slab_config());
  TempDir dir;
  RunnerOptions opt;
  opt.quiet = true;
  REQUIRE(run_simulate(pc, dir.str(), opt) == kExitOk);

  SUBCASE("tampered snapshots") {
    std::ofstream((dir.path / "snapshots_p0000.csv").string(), std::ios::app) << "0,1,1,9\n";
    CHECK_THROWS_WITH_AS(load_run(dir.str()), doctest::Contains("hash mismatch"), RuntimeError);
  }
  SUBCASE("missing increments") {
    fs::remove(dir.path / "dw_p0000.bin");
    CHECK_THROWS_WITH_AS(load_run(dir.str()), doctest::Contains("replay data absent"),
                         RuntimeError);
  }
}

TEST_CASE("identical seeds give byte-identical outputs across thread counts") {
  ParsedConfig pc = parse_config_text(small_slab_config(3));
  TempDir d1, d8;
  RunnerOptions o1, o8;
  o1.quiet = o8.quiet = true;
  o1.threads = 1;
  o8.threads = 8;
  REQUIRE(run_simulate(pc, d1.str(), o1) == kExitOk);
  REQUIRE(run_simulate(pc, d8.str(), o8) == kExitOk);
  RunManifest m1 = RunManifest::load((d1.path / "manifest.json").string());
  RunManifest m8 = RunManifest::load((d8.path / "manifest.json").string());
  CHECK(m1.files == m8.files);  // identical content hashes
}

TEST_CASE("qreport writes the covariance diagnostics") {
  ParsedConfig pc = parse_config_text(small_slab_config());
  TempDir dir;
  RunnerOptions opt;
  opt.quiet = true;
  CHECK(run_qreport(pc, dir.str(), opt) == kExitOk);
  CHECK(fs::exists(dir.path / "q_grid.csv"));
  CHECK(fs::exists(dir.path / "q_summary.json"));
}

TEST_CASE("exit codes: config rejection via 1D noise") {
  ParsedConfig pc = parse_config_text("preset = heat1d\nalpha0 = 0.5\nnoise_modes = 4\n");
  CHECK_THROWS_AS(Simulation{pc.sim}, ConfigError);
}

TEST_CASE("grid CSV round-trips with its header") {
  Basis basis({2, 4, 8});
  SpectralScratch ws;
  std::vector<double> c(basis.num_modes(), 0.0);
  c[2] = 1.25;
  std::vector<double> grid(basis.grid_size());
  basis.synthesize(c, grid, ws);
  TempDir dir;
  const std::string path = (dir.path / "field.csv").string();
  write_grid_csv(path, basis, grid);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("M=8") != std::string::npos);
  CHECK(header.find("dim=2") != std::string::npos);
  CHECK(read_grid_csv(path, basis) == grid);
}

TEST_CASE("model validation serializes to JSON") {
  EnthalpyModel model{PhysicalParams{}};
  const std::string j = model_validation_to_json(model.validate_hypotheses(-8.0, 8.0));
  CHECK(j.find("\"pass\": true") != std::string::npos);
  CHECK(j.find("inverse slope") != std::string::npos);
}

