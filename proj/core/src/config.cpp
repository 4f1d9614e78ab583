#include "stefan/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line) + ": expected a number, got '" + v +
                      "'");
  }
}

long long parse_int(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line) + ": expected an integer, got '" + v +
                      "'");
  }
}

std::vector<int> parse_int_list(const std::string& v, int line) {
  std::vector<int> out;
  std::istringstream is(v);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(static_cast<int>(parse_int(tok, line)));
  }
  if (out.empty()) throw ConfigError("config line " + std::to_string(line) + ": empty list");
  return out;
}

void apply_key(ParsedConfig& pc, const std::string& key, const std::string& val, int line) {
  SimConfig& c = pc.sim;
  if (key == "preset") {
    pc = preset_config(val);
    return;
  }
  if (key == "dim") c.basis.dim = static_cast<int>(parse_int(val, line));
  else if (key == "modes_per_axis") c.basis.modes_per_axis = static_cast<int>(parse_int(val, line));
  else if (key == "grid_per_axis") c.basis.grid_per_axis = static_cast<int>(parse_int(val, line));
  else if (key == "c1") c.phys.c1 = parse_double(val, line);
  else if (key == "c2") c.phys.c2 = parse_double(val, line);
  else if (key == "k1") c.phys.k1 = parse_double(val, line);
  else if (key == "k2") c.phys.k2 = parse_double(val, line);
  else if (key == "latent_heat") c.phys.latent_heat = parse_double(val, line);
  else if (key == "eta_cutoff") c.phys.eta_cutoff = parse_double(val, line);
  else if (key == "eta_lipschitz") c.phys.eta_lipschitz = parse_double(val, line);
  else if (key == "mush_width") c.phys.mush_width = parse_double(val, line);
  else if (key == "psi_floor") c.phys.psi_floor = parse_double(val, line);
  else if (key == "blend_width") c.phys.blend_width = parse_double(val, line);
  else if (key == "noise_modes") c.noise.num_modes = static_cast<int>(parse_int(val, line));
  else if (key == "alpha0") c.noise.alpha0 = parse_double(val, line);
  else if (key == "decay_p") c.noise.decay_p = parse_double(val, line);
  else if (key == "t_final") c.t_final = parse_double(val, line);
  else if (key == "dt") c.dt = (val == "auto") ? 0.0 : parse_double(val, line);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(val, line));
  else if (key == "paths") c.paths = static_cast<int>(parse_int(val, line));
  else if (key == "save_every") c.save_every = static_cast<int>(parse_int(val, line));
  else if (key == "ic") {
    if (val == "mode") c.ic.kind = InitialCondition::Kind::mode;
    else if (val == "slab") c.ic.kind = InitialCondition::Kind::slab;
    else if (val == "file") c.ic.kind = InitialCondition::Kind::coeffs_file;
    else throw ConfigError("config line " + std::to_string(line) + ": ic must be mode|slab|file");
  } else if (key == "ic_mode_index") c.ic.mode_index = static_cast<int>(parse_int(val, line));
  else if (key == "ic_amplitude") c.ic.amplitude = parse_double(val, line);
  else if (key == "ic_slab_solid") c.ic.slab_solid = parse_double(val, line);
  else if (key == "ic_slab_liquid") c.ic.slab_liquid = parse_double(val, line);
  else if (key == "ic_slab_margin") c.ic.slab_margin = parse_double(val, line);
  else if (key == "ic_file") c.ic.file = val;
  else if (key == "source") {
    if (val == "zero") c.source.kind = SourceSpec::Kind::zero;
    else if (val == "file") c.source.kind = SourceSpec::Kind::coeffs_file;
    else throw ConfigError("config line " + std::to_string(line) + ": source must be zero|file");
  } else if (key == "source_file") c.source.file = val;
  else if (key == "brownian_test_signal") c.brownian_test_signal = parse_int(val, line) != 0;
  else if (key == "converge_modes") pc.converge_modes = parse_int_list(val, line);
  else throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key + "'");
}

}  // namespace

ParsedConfig preset_config(const std::string& name) {
  ParsedConfig pc;
  SimConfig& c = pc.sim;
  pc.preset = name;
  if (name == "heat2d" || name == "heat2d-exact" || name == "heat1d") {
    c.basis = {name == "heat1d" ? 1 : 2, 16, 64};
    c.phys = PhysicalParams{1.0, 1.0, 1.0, 1.0, 0.0, 0.05, 1.0, 0.05, 1.0, 0.1};
    c.noise = {0, 0.0, 2.0};
    c.t_final = 0.01;
    c.dt = name == "heat2d-exact" ? 1e-5 : 0.0;
    c.ic = {InitialCondition::Kind::mode, 0, 1.0, 1.0, 1.0, 0.1, ""};
    c.paths = 1;
    c.save_every = 100;
  } else if (name == "slab2d") {
    c.basis = {2, 16, 64};
    c.phys = PhysicalParams{1.0, 1.0, 1.0, 1.0, 1.0, 0.05, 1.0, 0.05, 0.05, 0.1};
    c.noise = {32, 0.5, 2.0};
    c.t_final = 0.05;
    c.dt = 0.0;
    c.ic = {InitialCondition::Kind::slab, 0, 1.0, 1.0, 1.0, 0.1, ""};
    c.paths = 1;
    c.save_every = 50;
  } else {
    throw ConfigError("unknown preset '" + name + "' (heat1d, heat2d, heat2d-exact, slab2d)");
  }
  return pc;
}

ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig pc;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++ln;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(ln) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "preset" && any)
      throw ConfigError("config line " + std::to_string(ln) + ": preset must come first");
    apply_key(pc, key, val, ln);
    any = true;
  }
  return pc;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::map<std::string, std::string> echo_config(const ParsedConfig& pc) {
  const SimConfig& c = pc.sim;
  std::map<std::string, std::string> m;
  auto put_d = [&m](const std::string& k, double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    m[k] = os.str();
  };
  m["dim"] = std::to_string(c.basis.dim);
  m["modes_per_axis"] = std::to_string(c.basis.modes_per_axis);
  m["grid_per_axis"] = std::to_string(c.basis.grid_per_axis);
  put_d("c1", c.phys.c1);
  put_d("c2", c.phys.c2);
  put_d("k1", c.phys.k1);
  put_d("k2", c.phys.k2);
  put_d("latent_heat", c.phys.latent_heat);
  put_d("eta_cutoff", c.phys.eta_cutoff);
  put_d("eta_lipschitz", c.phys.eta_lipschitz);
  put_d("mush_width", c.phys.mush_width);
  put_d("psi_floor", c.phys.psi_floor);
  put_d("blend_width", c.phys.blend_width);
  m["noise_modes"] = std::to_string(c.noise.num_modes);
  put_d("alpha0", c.noise.alpha0);
  put_d("decay_p", c.noise.decay_p);
  put_d("t_final", c.t_final);
  if (c.dt > 0.0) put_d("dt", c.dt);
  else m["dt"] = "auto";
  m["seed"] = std::to_string(c.seed);
  m["paths"] = std::to_string(c.paths);
  m["save_every"] = std::to_string(c.save_every);
  switch (c.ic.kind) {
    case InitialCondition::Kind::mode: m["ic"] = "mode"; break;
    case InitialCondition::Kind::slab: m["ic"] = "slab"; break;
    case InitialCondition::Kind::coeffs_file: m["ic"] = "file"; break;
  }
  m["ic_mode_index"] = std::to_string(c.ic.mode_index);
  put_d("ic_amplitude", c.ic.amplitude);
  put_d("ic_slab_solid", c.ic.slab_solid);
  put_d("ic_slab_liquid", c.ic.slab_liquid);
  put_d("ic_slab_margin", c.ic.slab_margin);
  if (!c.ic.file.empty()) m["ic_file"] = c.ic.file;
  m["source"] = c.source.kind == SourceSpec::Kind::zero ? "zero" : "file";
  if (!c.source.file.empty()) m["source_file"] = c.source.file;
  if (c.brownian_test_signal) m["brownian_test_signal"] = "1";
  {
    std::ostringstream os;
    for (std::size_t i = 0; i < pc.converge_modes.size(); ++i)
      os << (i ? "," : "") << pc.converge_modes[i];
    m["converge_modes"] = os.str();
  }
  return m;
}

}  // namespace stefan
