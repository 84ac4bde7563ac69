#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin() {
  const char* b = std::getenv("MTNLS_BIN");
  REQUIRE_MESSAGE(b != nullptr, "MTNLS_BIN must point at the CLI binary");
  return b;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args, const fs::path& dir) {
  const fs::path so = dir / "stdout.txt";
  const fs::path se = dir / "stderr.txt";
  const std::string cmd =
      bin() + " " + args + " >" + so.string() + " 2>" + se.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("mtnls_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& name,
                      const std::string& text) {
  fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

const std::string kMild =
    "[basis]\n"
    "kind = torus\n"
    "K = 2\n"
    "[params]\n"
    "beta = 0.5\n"
    "gamma = 2.5\n"
    "C = 1\n"
    "C1 = 1\n"
    "[noise]\n"
    "r = 1.5\n"
    "a0 = 0.3\n"
    "[dynamics]\n"
    "h = 1e-2\n"
    "T = 0.5\n"
    "stride = 10\n"
    "seed = 5\n";

std::vector<json> read_ndjson(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), "missing " << p.string());
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("check subcommand passes on a mild configuration") {
  fs::path d = fresh_dir("check");
  fs::path cfg = write_config(d, "run.cfg", kMild);
  RunResult r = run("check " + cfg.string() + " --out " + (d / "out").string(), d);
  CHECK(r.code == 0);
  std::size_t ok = 0, fail = 0;
  std::istringstream is(r.out);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("ok   ", 0) == 0) ++ok;
    if (line.rfind("FAIL ", 0) == 0) ++fail;
  }
  CHECK(ok == 8);  // torus basis exercises every property including the
                   // exact single-mode solution
  CHECK(fail == 0);
  CHECK(fs::exists(d / "out" / "manifest.json"));
}

TEST_CASE("simulate conserves mass and energy on a single mode") {
  fs::path d = fresh_dir("simulate");
  fs::path cfg = write_config(d, "run.cfg",
                              kMild +
                                  "[experiment]\n"
                                  "init = single-mode\n"
                                  "k1 = 1\n"
                                  "k2 = 1\n"
                                  "amplitude = 0.4\n");
  RunResult r = run("simulate " + cfg.string() + " --out " + (d / "out").string(), d);
  CHECK(r.code == 0);
  CHECK(fs::exists(d / "out" / "snapshots" / "final.bin"));

  auto recs = read_ndjson(d / "out" / "observables.ndjson");
  REQUIRE(recs.size() >= 5);
  const double m0 = recs.front()["M"].get<double>();
  const double e0 = recs.front()["E"].get<double>();
  CHECK(m0 > 0.0);
  for (const auto& rec : recs) {
    CHECK(std::abs(rec["M"].get<double>() - m0) <= 1e-10 * m0);
    CHECK(std::abs(rec["E"].get<double>() - e0) <= 1e-8 * (1.0 + std::abs(e0)));
  }

  json manifest = json::parse(slurp(d / "out" / "manifest.json"));
  CHECK(manifest["subcommand"] == "simulate");
  CHECK(manifest["seed"] == 5);
}

TEST_CASE("reruns are byte-identical") {
  fs::path d = fresh_dir("repro");
  fs::path cfg = write_config(d, "run.cfg",
                              kMild +
                                  "[experiment]\n"
                                  "trajectories = 8\n");
  RunResult a = run("fdsim " + cfg.string() + " --out " + (d / "a").string() +
                        " --workers 2",
                    d);
  RunResult b = run("fdsim " + cfg.string() + " --out " + (d / "b").string() +
                        " --workers 1",
                    d);
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(slurp(d / "a" / "observables.ndjson") ==
        slurp(d / "b" / "observables.ndjson"));
  CHECK(slurp(d / "a" / "reports" / "kb_average.ndjson") ==
        slurp(d / "b" / "reports" / "kb_average.ndjson"));

  // a seed override changes the stream
  RunResult c = run("fdsim " + cfg.string() + " --out " + (d / "c").string() +
                        " --seed 99",
                    d);
  CHECK(c.code == 0);
  CHECK(slurp(d / "a" / "observables.ndjson") !=
        slurp(d / "c" / "observables.ndjson"));
}

TEST_CASE("configuration errors name the offender and exit 2") {
  fs::path d = fresh_dir("badcfg");

  fs::path missing = d / "does_not_exist.cfg";
  RunResult r0 = run("simulate " + missing.string(), d);
  CHECK(r0.code == 2);
  CHECK(r0.err.find("cannot open config file") != std::string::npos);

  fs::path bad1 = write_config(d, "bad1.cfg", "[nonsense]\nx = 1\n");
  RunResult r1 = run("simulate " + bad1.string() + " --out " + (d / "o1").string(), d);
  CHECK(r1.code == 2);
  CHECK(r1.err.find("nonsense") != std::string::npos);

  fs::path bad2 = write_config(d, "bad2.cfg",
                               "[params]\nbeta = 1\ngamma = 1.5\n");
  RunResult r2 = run("simulate " + bad2.string() + " --out " + (d / "o2").string(), d);
  CHECK(r2.code == 2);
  CHECK(r2.err.find("gamma") != std::string::npos);

  fs::path bad3 = write_config(d, "bad3.cfg", "[dynamics]\nh = zero\n");
  RunResult r3 = run("simulate " + bad3.string() + " --out " + (d / "o3").string(), d);
  CHECK(r3.code == 2);
  CHECK(r3.err.find("h") != std::string::npos);

  RunResult r4 = run("frobnicate " + bad1.string(), d);
  CHECK(r4.code == 2);
}

TEST_CASE("overflow in an ensemble exits 3 with a machine-readable record") {
  fs::path d = fresh_dir("overflow");
  fs::path cfg = write_config(d, "run.cfg",
                              "[basis]\nkind = torus\nK = 2\n"
                              "[params]\nbeta = 0.5\ngamma = 2.5\nC = 1\nC1 = 1\n"
                              "[noise]\nr = 0\na0 = 500\n"
                              "[dynamics]\nh = 1e-2\nT = 1\nseed = 3\n"
                              "[experiment]\ntrajectories = 3\n");
  RunResult r = run("fdsim " + cfg.string() + " --out " + (d / "out").string(), d);
  CHECK(r.code == 3);
  json err = json::parse(r.err.substr(r.err.find('{')));
  CHECK(err["error"] == "overflow");
  CHECK(err["message"].get<std::string>().find("trajectory") != std::string::npos);
}

TEST_CASE("divergence reports land on disk with exact initial separations") {
  fs::path d = fresh_dir("yudo");
  fs::path cfg = write_config(d, "run.cfg",
                              kMild +
                                  "[experiment]\n"
                                  "init = gaussian\n"
                                  "amplitude = 0.2\n"
                                  "eps_list = 1e-2, 1e-3\n"
                                  "lambda_grid = 0.5, 0.9\n");
  RunResult r = run("yudovich " + cfg.string() + " --out " + (d / "out").string(), d);
  CHECK(r.code == 0);
  CHECK(fs::exists(d / "out" / "reports" / "yudovich_eps_0.csv"));
  CHECK(fs::exists(d / "out" / "reports" / "yudovich_eps_1.csv"));

  auto recs = read_ndjson(d / "out" / "reports" / "yudovich_summary.ndjson");
  REQUIRE(recs.size() == 2);
  CHECK(std::abs(recs[0]["z0"].get<double>() - 1e-2) <= 1e-12);
  CHECK(std::abs(recs[1]["z0"].get<double>() - 1e-3) <= 1e-13);
  CHECK(recs[0]["sup_diff_l2"].get<double>() >
        recs[1]["sup_diff_l2"].get<double>());
  CHECK(recs[0]["hold_fraction_0.9"].get<double>() == 1.0);

  std::ifstream csv(d / "out" / "reports" / "yudovich_eps_0.csv");
  std::string header;
  REQUIRE(std::getline(csv, header));
  CHECK(header == "t,z,gradz,g,G,bound_0.5,bound_0.9");
}

TEST_CASE("noise scaling quadruples the injection rate at doubled amplitude") {
  fs::path d = fresh_dir("stationary");
  fs::path cfg = write_config(d, "run.cfg",
                              "[basis]\nkind = torus\nK = 1\n"
                              "[params]\nbeta = 0.5\ngamma = 2.5\nC = 1\nC1 = 1\n"
                              "[noise]\nr = 1.5\na0 = 0.3\n"
                              "[dynamics]\nh = 1e-2\nT = 3\nstride = 20\nseed = 13\n"
                              "[experiment]\n"
                              "trajectories = 32\n"
                              "burn_in = 1\n"
                              "scales = 1, 2\n");
  RunResult r = run("stationary " + cfg.string() + " --out " + (d / "out").string(), d);
  CHECK(r.code == 0);

  auto recs = read_ndjson(d / "out" / "reports" / "stationary.ndjson");
  REQUIRE(recs.size() == 2);
  const double a0_1 = recs[0]["A0"].get<double>();
  const double a0_2 = recs[1]["A0"].get<double>();
  CHECK(a0_2 == 4.0 * a0_1);
  CHECK(recs[0]["target"].get<double>() == a0_1 / 2.0);
  for (const auto& rec : recs) CHECK(rec["ratio"].get<double>() > 0.0);

  json manifest = json::parse(slurp(d / "out" / "manifest.json"));
  CHECK(manifest["subcommand"] == "stationary");
}
