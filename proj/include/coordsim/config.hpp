#pragma once

// Structured config file parsing: [system] kernels (presets or explicit
// tables), [code] construction parameters, [run] experiment parameters.
// Command-line flags override file values in the CLI layer.

#include <map>
#include <stdexcept>
#include <string>

#include "coordsim/sim.hpp"

namespace coordsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

ConfigSections parse_ini(const std::string& text);
ConfigSections load_ini_file(const std::string& path);

// [system] kernel grammar:
//   p_ac:         copy(q) | noisycopy(q,f) | independent(qa,qc) | uniform |
//                 table(|A|,|C|): p ...
//   p_x_given_ac: copy_c | copy_a | bsc_c(p) | bsc_a(p) | bec_c(e) |
//                 uniform(m) | table(|A|*|C|,|X|): p ...
//   p_b_given_a:  identity | bsc(p) | bec(e) | table(|A|,|B|): p ...
//   p_y_given_bc: copy_b | copy_c | bsc_b(p) | uniform(m) |
//                 table(|B|*|C|,|Y|): p ...
//   q_xy:         optional table(|X|,|Y|): p ...  (checked against the
//                 composed marginal)
CoordinationSystem parse_system(const std::map<std::string, std::string>& section);

struct CliConfig {
  explicit CliConfig(ExperimentConfig exp) : experiment(std::move(exp)) {}
  ExperimentConfig experiment;
  bool export_traces = false;
};

CliConfig load_config(const std::string& path);

// Canonical text of everything the set construction depends on; hashing it
// yields the cache key.
std::string construction_fingerprint(const ExperimentConfig& cfg);

}  // namespace coordsim
