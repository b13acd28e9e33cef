#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = PROBETOPO_TEST_TMP;

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI with stdout and stderr captured into files; returns the exit code.
int run(const std::string& args, const std::string& tag) {
  fs::create_directories(kTmp);
  const std::string cmd = std::string("\"") + PROBETOPO_CLI + "\" " + args + " > \"" +
                          (kTmp / (tag + ".out")).string() + "\" 2> \"" +
                          (kTmp / (tag + ".err")).string() + "\"";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string out(const std::string& tag) { return read_file(kTmp / (tag + ".out")); }
std::string err(const std::string& tag) { return read_file(kTmp / (tag + ".err")); }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("validate") {
  CHECK(run("validate " + quoted(fixtures::data("ieee37.csv")), "validate") == 0);
  const auto doc = nlohmann::json::parse(out("validate"));
  CHECK(doc["nodes"] == 37);
  CHECK(doc["leaves"].size() == 15);

  std::ofstream(kTmp / "cyclic.csv") << "from,to,r_pu,x_pu\n0,1,1,1\n2,3,1,1\n3,2,1,1\n";
  CHECK(run("validate " + quoted(kTmp / "cyclic.csv"), "cyclic") == 1);
  CHECK(nlohmann::json::parse(err("cyclic"))["error"] == "CycleDetected");
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("", "none") == 2);
  CHECK(nlohmann::json::parse(err("none"))["error"] == "UsageError");
  CHECK(run("frobnicate", "unknown") == 2);
  CHECK(run("validate", "missing") == 2);
  CHECK(run("montecarlo", "nocfg") == 2);
  CHECK(run("--help", "help") == 0);
}

TEST_CASE("reduce") {
  std::ofstream(kTmp / "y.csv") << "from,to,r_pu,x_pu\n0,1,1,1\n1,2,2,1\n1,3,3,1\n";
  CHECK(run("reduce " + quoted(kTmp / "y.csv") + " --probing 2 3", "reduce") == 0);
  const auto doc = nlohmann::json::parse(out("reduce"));
  CHECK(doc["internal"] == nlohmann::json::array({1}));
  CHECK(run("reduce " + quoted(kTmp / "y.csv") + " --probing 2", "reduce_bad") == 1);
  CHECK(nlohmann::json::parse(err("reduce_bad"))["error"] == "LeafNotProbed");
  CHECK(run("reduce " + quoted(fixtures::data("ieee37.csv")) + " --all-leaves", "reduce37") == 0);
  CHECK(nlohmann::json::parse(out("reduce37"))["nodes"].size() == 27);
}

TEST_CASE("probe and recover round trip on the Y tree") {
  const std::string y = "from,to,r_pu,x_pu\n0,1,1,1\n1,2,2,1\n1,3,3,1\n";
  std::ofstream(kTmp / "y.csv") << y;
  const auto record = kTmp / "y_record.csv";
  CHECK(run("probe " + quoted(kTmp / "y.csv") + " --delta 0.5 --noiseless --periods 2 --out " +
                quoted(record),
            "probe") == 0);
  CHECK(run("recover " + quoted(record), "recover") == 0);
  // Reactances are not recovered; everything else matches the input.
  CHECK(out("recover") == "from,to,r_pu,x_pu\n0,1,1,\n1,2,2,\n1,3,3,\n");

  const auto dir = kTmp / "report";
  fs::remove_all(dir);
  CHECK(run("recover " + quoted(record) + " --truth " + quoted(kTmp / "y.csv") + " --out " +
                quoted(dir) + " --diagnostics " + quoted(kTmp / "diag.json"),
            "recover_out") == 0);
  const auto meta = nlohmann::json::parse(read_file(dir / "report.json"));
  CHECK(meta["comparison"]["topology_correct"] == true);
  CHECK(nlohmann::json::parse(read_file(kTmp / "diag.json")).size() == 2);

  std::ofstream(kTmp / "garbage.csv") << "not a record\n";
  CHECK(run("recover " + quoted(kTmp / "garbage.csv"), "garbage") == 1);
  CHECK(nlohmann::json::parse(err("garbage"))["error"] == "ParseError");
}

TEST_CASE("probe with a config and noisy recovery") {
  const auto record = kTmp / "ieee_record.csv";
  CHECK(run("probe " + quoted(fixtures::data("ieee37.csv")) + " --config " +
                quoted(fixtures::data("table1_partial.json")) + " --seed 4 --out " +
                quoted(record),
            "probe37") == 0);
  CHECK(run("recover " + quoted(record) + " --r-min 0.0020668 --truth " +
                quoted(fixtures::data("ieee37.csv")) + " --out " + quoted(kTmp / "r37"),
            "recover37") == 0);
  const auto meta = nlohmann::json::parse(read_file(kTmp / "r37" / "report.json"));
  CHECK(meta["mode"] == "partial");
  CHECK(meta["internal"].size() == 12);
}

TEST_CASE("montecarlo writes one row per sweep entry") {
  const auto dir = kTmp / "mc";
  fs::remove_all(dir);
  CHECK(run("montecarlo --config " + quoted(fixtures::data("table1_complete.json")) +
                " --trials 20 --no-timing --out " + quoted(dir),
            "mc") == 0);
  std::ifstream csv(dir / "results.csv");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == 6);
  const auto doc = nlohmann::json::parse(read_file(dir / "results.json"));
  CHECK(doc["config"]["trials"] == 20);

  CHECK(run("montecarlo --config " + quoted(fixtures::data("table1_complete.json")) +
                " --trials 0",
            "mc_bad") == 2);
}
