#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mtnls/dynamics.hpp"
#include "mtnls/functionals.hpp"

namespace mtnls {

// Raw parse of the block/key=value config format:
//   [basis]
//   kind = torus-fourier
//   K = 8
// '#' starts a comment; keys are unique within a block.
using ConfigBlocks = std::map<std::string, std::map<std::string, std::string>>;

ConfigBlocks parse_config_text(const std::string& text);
ConfigBlocks parse_config_file(const std::string& path);

struct RunConfig {
  // [basis]
  BasisKind kind = BasisKind::TorusFourier;
  int K = 8;
  int q = 2;

  // [params]
  ModelParams params;
  SeriesPolicy policy;

  // [noise]
  double noise_r = 1.5;
  double noise_a0 = 1.0;
  double noise_scale = 1.0;

  // [dynamics]
  StepperConfig stepper;
  double T = 1.0;

  // [experiment], interpreted per subcommand
  std::map<std::string, std::string> experiment;

  std::string source_text;                 // canonical echo for the manifest
  std::vector<std::string> warnings;       // advisory validation messages

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);

  // typed experiment lookups with defaults
  double exp_double(const std::string& key, double fallback) const;
  long exp_int(const std::string& key, long fallback) const;
  std::string exp_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> exp_list(const std::string& key,
                               const std::vector<double>& fallback) const;
};

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace mtnls
