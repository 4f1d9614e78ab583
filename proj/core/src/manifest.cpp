#include "stefan/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "stefan/errors.hpp"

namespace stefan {

using nlohmann::json;

std::string RunManifest::to_json() const {
  json j;
  j["artifact_version"] = artifact_version;
  j["config"] = config;
  j["seed"] = seed;
  j["dt_used"] = dt_used;
  j["lambda_max"] = lambda_max;
  j["gamma_const"] = gamma_const;
  j["ip1_sum"] = ip1_sum;
  j["ip1_increment_ratio"] = ip1_increment_ratio;
  j["ip1_status"] = ip1_status;
  j["q_min_eigenvalue"] = q_min_eigenvalue;
  j["q_trace_tail_ratio"] = q_trace_tail_ratio;
  j["enthalpy_hypotheses_pass"] = enthalpy_hypotheses_pass;
  j["energy_slack_c_e"] = energy_slack_c_e;
  j["wall_seconds"] = wall_seconds;
  j["blowup_steps"] = blowup_steps;
  j["files"] = files;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw RuntimeError(std::string("manifest: invalid JSON: ") + e.what());
  }
  m.artifact_version = j.value("artifact_version", "");
  m.config = j.value("config", std::map<std::string, std::string>{});
  m.seed = j.value("seed", std::uint64_t{0});
  m.dt_used = j.value("dt_used", 0.0);
  m.lambda_max = j.value("lambda_max", 0.0);
  m.gamma_const = j.value("gamma_const", 0.0);
  m.ip1_sum = j.value("ip1_sum", 0.0);
  m.ip1_increment_ratio = j.value("ip1_increment_ratio", 0.0);
  m.ip1_status = j.value("ip1_status", "");
  m.q_min_eigenvalue = j.value("q_min_eigenvalue", 0.0);
  m.q_trace_tail_ratio = j.value("q_trace_tail_ratio", 0.0);
  m.enthalpy_hypotheses_pass = j.value("enthalpy_hypotheses_pass", false);
  m.energy_slack_c_e = j.value("energy_slack_c_e", 0.0);
  m.wall_seconds = j.value("wall_seconds", 0.0);
  m.blowup_steps = j.value("blowup_steps", std::vector<int>{});
  m.files = j.value("files", std::map<std::string, std::string>{});
  return m;
}

void RunManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write manifest: " + path);
  out << to_json() << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot open manifest: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace stefan
