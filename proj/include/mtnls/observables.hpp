#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mtnls {

struct RunConfig;

// One NDJSON line: {"t": ..., "<name>": ..., ...}. Key order is the
// insertion order, values are printed with %.17g, so equal runs produce
// byte-identical streams.
struct ObservableRecord {
  double t = 0.0;
  std::vector<std::pair<std::string, double>> values;

  void set(const std::string& name, double v) { values.emplace_back(name, v); }
};

std::string format_double(double v);  // %.17g
void write_ndjson(const ObservableRecord& rec, std::ostream& os);

struct ManifestInfo {
  std::string subcommand;
  std::uint64_t config_hash = 0;
  std::string config_text;
  std::uint64_t seed = 0;
  int workers = 1;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> digests;  // experiment results
  std::vector<std::string> warnings;
};

// JSON manifest (pretty-printed, stable key order)
void write_manifest(const ManifestInfo& info, const RunConfig& config,
                    std::ostream& os);

}  // namespace mtnls
