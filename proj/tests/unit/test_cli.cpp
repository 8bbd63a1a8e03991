#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "generators.hpp"
#include "pspace/cli.hpp"

using namespace pspace;
using namespace pspace::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = PSPACE_FIXTURES;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result pspace_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> synth_run_args(const fs::path& out) {
  const auto dir = kFixtures / "synth";
  return {"run",
          "--trade", (dir / "trade.csv").string(),
          "--income", (dir / "income.csv").string(),
          "--meta", (dir / "meta.csv").string(),
          "--regions", (dir / "regions.csv").string(),
          "--compare", "1990:1995",
          "--highlight", "Alpha",
          "--format", "graphml,dot,json,edge-csv,binary",
          "--out", out.string()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    files[e.path().filename().string()] = read_text(e.path());
  return files;
}

}  // namespace

TEST_CASE("help on every subcommand") {
  for (std::string sub : {"ingest", "rca", "proximity", "graph", "density", "transitions", "diffuse",
                          "converge", "report", "run", "synth"}) {
    auto r = pspace_cli({sub, "--help"});
    CHECK_MESSAGE(r.code == 0, sub);
    CHECK_MESSAGE(r.out.find("--out") != std::string::npos, sub);
  }
  CHECK(pspace_cli({"--help"}).code == 0);
  CHECK(pspace_cli({}).code != 0);
  CHECK(pspace_cli({"frobnicate"}).code != 0);
}

TEST_CASE("proximity of the 3x3 toy file") {
  TempDir dir;
  const auto out = dir.path().string();
  const auto trade = (kFixtures / "toy3_trade.csv").string();
  REQUIRE(pspace_cli({"ingest", "--trade", trade, "--window", "2000", "--out", out}).code == 0);
  REQUIRE(pspace_cli({"rca", "--window", "2000", "--out", out}).code == 0);
  REQUIRE(pspace_cli({"proximity", "--out", out}).code == 0);
  // S_0001 = {AAA, CCC}, S_0002 = {AAA, BBB}, S_0003 = {BBB, CCC}
  CHECK(read_text(dir / "proximity.csv") ==
        "sitc4_i,sitc4_j,phi\n0001,0002,0.5\n0001,0003,0.5\n0002,0003,0.5\n");
  CHECK(fs::exists(dir / "proximity.config.json"));
}

TEST_CASE("missing prior stage names the command to run") {
  TempDir dir;
  auto r = pspace_cli({"proximity", "--out", dir.path().string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("pspace proximity: error:") != std::string::npos);
  CHECK(r.err.find("pspace rca") != std::string::npos);

  auto t = pspace_cli({"transitions", "--compare", "1990:1995", "--out", dir.path().string()});
  CHECK(t.code != 0);
  CHECK(t.err.find("rca --compare") != std::string::npos);
}

TEST_CASE("bad input fails with a stage-named diagnostic") {
  TempDir dir;
  write_text(dir / "bad.csv", "year,exporter,sitc4,value\n1999,CHL,2879,-1\n");
  auto r = pspace_cli({"ingest", "--trade", (dir / "bad.csv").string(), "--out", dir.path().string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("pspace ingest: error:") != std::string::npos);
  CHECK(r.err.find(":2:") != std::string::npos);
}

TEST_CASE("full run, frozen diffusion and report") {
  TempDir dir;
  auto r = pspace_cli(synth_run_args(dir.path()));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"exports.csv", "rca.csv", "specialization.csv", "proximity.csv", "proximity.bin",
                        "phi_stats.json", "graph.graphml", "graph.dot", "graph.json", "graph_edges.csv",
                        "component_curve.csv", "hierarchical_order.csv", "density.csv", "transitions.csv",
                        "ratios.csv", "curve_proximity.csv", "curve_rank.csv", "trace.csv", "prody.csv",
                        "sweep.csv", "convergence.json", "report.json", "rca_regions.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  auto report = nlohmann::json::parse(read_text(dir / "report.json"));
  for (const char* section : {"phi_stats", "component_curve", "transitions", "diffusion", "convergence"})
    CHECK_MESSAGE(!report[section].is_null(), section);
  CHECK(report["missing"].empty());
  CHECK(read_text(dir / "graph.graphml").find("<data key=\"rca\">true</data>") != std::string::npos);

  SUBCASE("phi0 = 1 leaves every basket as it was") {
    REQUIRE(pspace_cli({"diffuse", "--phi0", "1.0", "--strict-threshold", "--out", dir.path().string()}).code == 0);
    auto trace = read_text(dir / "trace.csv");
    auto spec = read_text(dir / "specialization.csv");
    std::size_t steps = 0, nonzero = 0, bits = 0;
    std::istringstream t(trace), s(spec);
    std::string line;
    std::getline(t, line);
    while (std::getline(t, line)) {
      ++steps;
      nonzero += line.back() != '0';
    }
    std::getline(s, line);
    while (std::getline(s, line)) bits += line.back() == '1';
    CHECK(nonzero == 0);
    CHECK(steps == bits);
  }
  SUBCASE("report without diffusion") {
    fs::remove(dir / "trace.csv");
    auto rep = pspace_cli({"report", "--out", dir.path().string()});
    CHECK(rep.code == 0);
    CHECK(rep.err.find("warning") != std::string::npos);
    auto doc = nlohmann::json::parse(read_text(dir / "report.json"));
    CHECK(doc["diffusion"].is_null());
    CHECK(doc["missing"].size() == 1);
    CHECK(doc["missing"][0]["stage"] == "diffuse");
    CHECK_FALSE(doc["phi_stats"].is_null());
  }
}

TEST_CASE("runs are byte-stable and the resolved config reproduces them") {
  TempDir a, b, c;
  REQUIRE(pspace_cli(synth_run_args(a.path())).code == 0);
  auto first = snapshot(a.path());
  REQUIRE(pspace_cli(synth_run_args(a.path())).code == 0);
  CHECK(snapshot(a.path()) == first);

  REQUIRE(pspace_cli(synth_run_args(b.path())).code == 0);
  auto second = snapshot(b.path());
  REQUIRE(first.size() == second.size());
  for (const auto& [name, text] : first) {
    if (name.find(".config.json") != std::string::npos) continue;  // records --out
    CHECK_MESSAGE(second[name] == text, name);
  }

  REQUIRE(pspace_cli({"run", "--config", (a / "converge.config.json").string(), "--out", c.path().string()}).code == 0);
  auto third = snapshot(c.path());
  for (const auto& [name, text] : first) {
    if (name.find(".config.json") != std::string::npos) continue;
    CHECK_MESSAGE(third[name] == text, name);
  }
}

TEST_CASE("explicit flags override the config file") {
  TempDir dir;
  const auto trade = (kFixtures / "synth" / "trade.csv").string();
  REQUIRE(pspace_cli({"ingest", "--trade", trade, "--window", "1998:2000", "--out", dir.path().string()}).code == 0);
  auto cfg = dir / "ingest.config.json";
  auto moved = dir / "saved.json";
  fs::rename(cfg, moved);
  REQUIRE(pspace_cli({"ingest", "--config", moved.string(), "--window", "1999:2000", "--out",
                      dir.path().string()})
              .code == 0);
  auto doc = nlohmann::json::parse(read_text(cfg));
  CHECK(doc["window"] == "1999:2000");
  CHECK(doc["trade"] == trade);
  CHECK(doc["rca_high"] == 1.0);
  CHECK(doc["iterations"] == 20);
  CHECK(doc["top_n"] == 50);
  CHECK(doc["overlay_phi"] == 0.55);
  CHECK(doc["rca_low"] == 0.5);
}

TEST_CASE("environment sets the default output directory") {
  TempDir dir;
  const auto target = dir / "from_env";
  ::setenv("PSPACE_OUT", target.c_str(), 1);
  auto r = pspace_cli({"synth", "--synth-countries", "5", "--synth-products", "12"});
  ::unsetenv("PSPACE_OUT");
  CHECK(r.code == 0);
  CHECK(fs::exists(target / "trade.csv"));
}

TEST_CASE("synthetic fixture is reproducible from its seed") {
  TempDir dir;
  REQUIRE(pspace_cli({"synth", "--seed", "1", "--out", dir.path().string()}).code == 0);
  CHECK(read_text(dir / "trade.csv") == read_text(kFixtures / "synth" / "trade.csv"));
  TempDir other;
  REQUIRE(pspace_cli({"synth", "--seed", "2", "--out", other.path().string()}).code == 0);
  CHECK(read_text(other / "trade.csv") != read_text(dir / "trade.csv"));
}

TEST_CASE("grid parsing") {
  auto g = cli::parse_grid("0.4:0.05:0.8");
  REQUIRE(g.size() == 9);
  CHECK(g[4] == 0.6);
  CHECK(g.back() == 0.8);
  CHECK(cli::parse_grid("0.65,0.55") == std::vector<double>{0.55, 0.65});
  CHECK_THROWS(cli::parse_grid("0.8:0.05:0.4"));
  CHECK_THROWS(cli::parse_grid("a,b"));
  CHECK_THROWS(cli::parse_grid("0:0:1"));
}

TEST_CASE("config json round trip") {
  cli::RunConfig cfg;
  cfg.trade = "t.csv";
  cfg.compare = std::make_pair(1990, 1995);
  cfg.income_year = 1999;
  cfg.phi_grid = {0.5, 0.6};
  cfg.inclusive = false;
  cfg.formats = {"dot"};
  auto back = cli::config_from_json(nlohmann::json::parse(cli::to_json(cfg).dump()));
  CHECK(cli::to_json(back) == cli::to_json(cfg));
}
