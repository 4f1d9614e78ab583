#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace stefan {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Everything needed to replay and audit a run: the resolved configuration,
// the validator summaries, and a hash inventory of every file written.
struct RunManifest {
  std::string artifact_version = kArtifactVersion;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  double dt_used = 0.0;
  double lambda_max = 0.0;
  double gamma_const = 0.0;
  double ip1_sum = 0.0;
  double ip1_increment_ratio = 0.0;
  std::string ip1_status;
  double q_min_eigenvalue = 0.0;
  double q_trace_tail_ratio = 0.0;
  bool enthalpy_hypotheses_pass = false;
  double energy_slack_c_e = 0.0;  // recorded by verify once calibrated
  double wall_seconds = 0.0;
  std::vector<int> blowup_steps;  // per path; -1 = completed
  std::map<std::string, std::string> files;  // relative name -> sha256

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

}  // namespace stefan
