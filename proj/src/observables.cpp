#include "mtnls/observables.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "mtnls/config.hpp"

namespace mtnls {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_ndjson(const ObservableRecord& rec, std::ostream& os) {
  os << "{\"t\": " << format_double(rec.t);
  for (const auto& [name, v] : rec.values)
    os << ", \"" << name << "\": " << format_double(v);
  os << "}\n";
}

void write_manifest(const ManifestInfo& info, const RunConfig& config,
                    std::ostream& os) {
  nlohmann::ordered_json j;
  j["subcommand"] = info.subcommand;
  j["config_hash"] = info.config_hash;
  j["seed"] = info.seed;
  j["workers"] = info.workers;
  j["code_version"] = "mtnls-1.0";
  j["wall_seconds"] = info.wall_seconds;

  nlohmann::ordered_json resolved;
  resolved["basis"] = {{"kind", to_string(config.kind)},
                       {"K", config.K},
                       {"q", config.q}};
  resolved["params"] = {{"beta", config.params.beta},
                        {"gamma", config.params.gamma},
                        {"delta", config.params.delta},
                        {"alpha", config.params.alpha},
                        {"C", config.params.C},
                        {"C1", config.params.C1},
                        {"C2", config.params.C2},
                        {"p_max", config.policy.p_max},
                        {"tail_tol", config.policy.tail_tol}};
  resolved["noise"] = {{"r", config.noise_r},
                       {"a0", config.noise_a0},
                       {"scale", config.noise_scale}};
  resolved["dynamics"] = {{"scheme", to_string(config.stepper.scheme)},
                          {"h", config.stepper.h},
                          {"T", config.T},
                          {"stride", config.stepper.stride},
                          {"seed", config.stepper.seed}};
  resolved["experiment"] = config.experiment;
  j["resolved_config"] = resolved;
  j["config_text"] = info.config_text;

  nlohmann::ordered_json digests = nlohmann::ordered_json::object();
  for (const auto& [k, v] : info.digests) digests[k] = v;
  j["digests"] = digests;
  j["warnings"] = info.warnings;

  os << j.dump(2) << '\n';
}

}  // namespace mtnls
