#include "mtnls/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "mtnls/errors.hpp"

namespace mtnls {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& block, const std::string& key,
                    const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("[" + block + "] " + key + ": not a number: '" + v + "'");
  }
}

long parse_int(const std::string& block, const std::string& key,
               const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("[" + block + "] " + key + ": not an integer: '" + v + "'");
  }
}

}  // namespace

ConfigBlocks parse_config_text(const std::string& text) {
  ConfigBlocks blocks;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!blocks[section].emplace(key, value).second)
      throw ConfigError("config: duplicate key '" + key + "' in [" + section + "]");
  }
  return blocks;
}

ConfigBlocks parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

const std::string* find(const ConfigBlocks& b, const std::string& section,
                        const std::string& key) {
  auto s = b.find(section);
  if (s == b.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
  const ConfigBlocks b = parse_config_text(text);
  for (const auto& [section, kv] : b) {
    (void)kv;
    if (section != "basis" && section != "params" && section != "noise" &&
        section != "dynamics" && section != "experiment")
      throw ConfigError("config: unknown section [" + section + "]");
  }

  RunConfig c;
  c.source_text = text;

  if (const auto* v = find(b, "basis", "kind")) c.kind = basis_kind_from_string(*v);
  if (const auto* v = find(b, "basis", "K"))
    c.K = static_cast<int>(parse_int("basis", "K", *v));
  if (const auto* v = find(b, "basis", "q"))
    c.q = static_cast<int>(parse_int("basis", "q", *v));
  if (c.K < (c.kind == BasisKind::DirichletSine ? 1 : 0))
    throw ConfigError("[basis] K: invalid cutoff");
  if (c.q < 2) throw ConfigError("[basis] q: oversample must be >= 2");

  auto pd = [&](const char* key, double& dst) {
    if (const auto* v = find(b, "params", key)) dst = parse_double("params", key, *v);
  };
  pd("beta", c.params.beta);
  pd("gamma", c.params.gamma);
  pd("delta", c.params.delta);
  pd("alpha", c.params.alpha);
  pd("C", c.params.C);
  pd("C1", c.params.C1);
  pd("C2", c.params.C2);
  if (const auto* v = find(b, "params", "p_max"))
    c.policy.p_max = static_cast<int>(parse_int("params", "p_max", *v));
  if (const auto* v = find(b, "params", "tail_tol"))
    c.policy.tail_tol = parse_double("params", "tail_tol", *v);
  if (c.policy.p_max < 1) throw ConfigError("[params] p_max: must be >= 1");
  if (!(c.policy.tail_tol > 0.0)) throw ConfigError("[params] tail_tol: must be > 0");
  if (auto warning = c.params.validate()) c.warnings.push_back(*warning);

  if (const auto* v = find(b, "noise", "r")) c.noise_r = parse_double("noise", "r", *v);
  if (const auto* v = find(b, "noise", "a0"))
    c.noise_a0 = parse_double("noise", "a0", *v);
  if (const auto* v = find(b, "noise", "scale"))
    c.noise_scale = parse_double("noise", "scale", *v);
  if (!(c.noise_a0 >= 0.0)) throw ConfigError("[noise] a0: must be >= 0");
  if (!(c.noise_scale > 0.0)) throw ConfigError("[noise] scale: must be > 0");

  if (const auto* v = find(b, "dynamics", "scheme"))
    c.stepper.scheme = scheme_from_string(*v);
  if (const auto* v = find(b, "dynamics", "h"))
    c.stepper.h = parse_double("dynamics", "h", *v);
  if (const auto* v = find(b, "dynamics", "T")) c.T = parse_double("dynamics", "T", *v);
  if (const auto* v = find(b, "dynamics", "stride"))
    c.stepper.stride = static_cast<int>(parse_int("dynamics", "stride", *v));
  if (const auto* v = find(b, "dynamics", "seed"))
    c.stepper.seed = static_cast<std::uint64_t>(parse_int("dynamics", "seed", *v));
  if (!(c.stepper.h > 0.0)) throw ConfigError("[dynamics] h: must be > 0");
  if (c.stepper.stride < 1) throw ConfigError("[dynamics] stride: must be >= 1");

  if (auto s = b.find("experiment"); s != b.end()) c.experiment = s->second;
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

double RunConfig::exp_double(const std::string& key, double fallback) const {
  auto it = experiment.find(key);
  return it == experiment.end() ? fallback
                                : parse_double("experiment", key, it->second);
}

long RunConfig::exp_int(const std::string& key, long fallback) const {
  auto it = experiment.find(key);
  return it == experiment.end() ? fallback : parse_int("experiment", key, it->second);
}

std::string RunConfig::exp_string(const std::string& key,
                                  const std::string& fallback) const {
  auto it = experiment.find(key);
  return it == experiment.end() ? fallback : it->second;
}

std::vector<double> RunConfig::exp_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
  auto it = experiment.find(key);
  if (it == experiment.end()) return fallback;
  std::vector<double> out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_double("experiment", key, item));
  }
  if (out.empty())
    throw ConfigError("[experiment] " + key + ": empty list");
  return out;
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mtnls
