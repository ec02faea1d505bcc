#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "pnclab/schedule.hpp"

using namespace pnclab;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage = {"pnclab"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : storage) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Rows of a cut/trace CSV keyed by "node,tick".
std::map<std::string, std::string> rows_by_point(const std::string& csv) {
  std::map<std::string, std::string> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("node", 0) == 0) continue;
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    const auto third = line.find(',', second + 1);
    out[line.substr(0, second)] = line.substr(second + 1, third - second - 1);
  }
  return out;
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string name) : path(std::move(name)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("gen line writes three-send line") {
  TempFile f("cli_example_a.json");
  REQUIRE(cli({"gen", "line", "--n", "2", "--k", "2", "--reps", "3", "--out", f.path}).code == 0);
  const Schedule s = load_schedule(f.path);
  CHECK(s.events == oracle::three_send_line().events);
  CHECK(s.generator.has_value());
}

TEST_CASE("gen is deterministic and validates its arguments") {
  const auto a = cli({"gen", "gossip", "--n", "10", "--k", "4", "--rounds", "20", "--seed", "7"});
  const auto b = cli({"gen", "gossip", "--n", "10", "--k", "4", "--rounds", "20", "--seed", "7"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(cli({"gen", "gossip", "--n", "1"}).code == 2);
  CHECK(cli({"gen", "teleport"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"gen", "random", "--n", "4", "--k", "2", "--events", "20", "--seed", "3"}).code == 0);
}

TEST_CASE("mincut on the worked examples") {
  TempFile a("cli_mincut_a.json"), b("cli_mincut_b.json");
  save_schedule(oracle::three_send_line(), a.path);
  save_schedule(oracle::two_send_line(), b.path);

  auto r = cli({"mincut", "--schedule", a.path, "--graph", "ginf"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# config: ", 0) == 0);
  auto rows = rows_by_point(r.out);
  CHECK(rows["1,2"] == "1");
  CHECK(rows["1,3"] == "2");
  CHECK(rows["1,4"] == "2");
  CHECK(rows_by_point(cli({"mincut", "--schedule", a.path, "--graph", "gpnc"}).out) == rows);

  r = cli({"mincut", "--schedule", b.path, "--graph", "gmu", "--mu", "1"});
  REQUIRE(r.code == 0);
  CHECK(rows_by_point(r.out)["1,3"] == "1");
  for (const char* graph : {"grecomb", "gacc"})
    CHECK(rows_by_point(cli({"mincut", "--schedule", b.path, "--graph", graph, "--mu", "1"}).out)["1,3"] == "1");

  CHECK(cli({"mincut", "--schedule", a.path, "--graph", "gfoo"}).code == 2);
  CHECK(cli({"mincut", "--schedule", a.path, "--graph", "gmu", "--mu", "zero"}).code == 2);
  CHECK(cli({"mincut"}).code == 2);
  CHECK(cli({"mincut", "--schedule", "/nonexistent.json"}).code == 3);
}

TEST_CASE("mincut edge-list export and import") {
  TempFile a("cli_export_a.json"), e("cli_export_a.txt");
  save_schedule(oracle::three_send_line(), a.path);
  const auto direct = cli({"mincut", "--schedule", a.path, "--graph", "gacc", "--mu", "2", "--export", e.path});
  REQUIRE(direct.code == 0);
  const auto imported = cli({"mincut", "--edge-list", e.path});
  REQUIRE(imported.code == 0);
  CHECK(rows_by_point(imported.out) == rows_by_point(direct.out));

  TempFile junk("cli_junk.txt");
  std::ofstream(junk.path) << "not an edge list\n";
  CHECK(cli({"mincut", "--edge-list", junk.path}).code == 3);
}

TEST_CASE("invalid schedules exit 3") {
  TempFile bad("cli_bad.json");
  Schedule s = oracle::three_send_line();
  s.events.erase(s.events.begin());
  save_schedule(s, bad.path);
  CHECK(cli({"mincut", "--schedule", bad.path}).code == 3);
  CHECK(cli({"run", "--schedule", bad.path}).code == 3);
  std::ofstream(bad.path) << "{\"n\": 2, \"k\": 1, \"bogus\": 0, \"events\": []}";
  CHECK(cli({"run", "--schedule", bad.path}).code == 3);
}

TEST_CASE("run traces are deterministic and respect the cut") {
  TempFile a("cli_run_a.json"), packets("cli_run_packets.csv");
  save_schedule(gen_random_dynamic(6, 3, 40, 2, 5), a.path);
  const auto r1 = cli({"run", "--schedule", a.path, "--protocol", "pnc", "--seed", "9", "--packets", packets.path});
  const auto r2 = cli({"run", "--schedule", a.path, "--protocol", "pnc", "--seed", "9"});
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(slurp(packets.path).find("hyperedge,event,sender,tick,header") != std::string::npos);

  for (const auto& [protocol, graph] : std::vector<std::pair<std::string, std::string>>{
           {"pnc", "ginf"}, {"recomb", "gmu"}, {"acc", "gmu"}}) {
    const auto ranks = rows_by_point(cli({"run", "--schedule", a.path, "--protocol", protocol, "--mu", "2"}).out);
    const auto cuts = rows_by_point(cli({"mincut", "--schedule", a.path, "--graph", graph, "--mu", "2"}).out);
    REQUIRE(ranks.size() == cuts.size());
    for (const auto& [point, rank] : ranks) CHECK(std::stoi(rank) <= std::stoi(cuts.at(point)));
  }
  CHECK(cli({"run", "--schedule", a.path, "--protocol", "flood"}).code == 2);
  CHECK(cli({"run", "--schedule", a.path, "--field", "7"}).code == 2);
}

TEST_CASE("seed falls back to the environment") {
  TempFile a("cli_env_a.json");
  save_schedule(oracle::three_send_line(), a.path);
  const auto explicit_seed = cli({"run", "--schedule", a.path, "--seed", "4242"});
  setenv("PNCLAB_SEED", "4242", 1);
  const auto from_env = cli({"run", "--schedule", a.path});
  unsetenv("PNCLAB_SEED");
  const auto fallback = cli({"run", "--schedule", a.path});
  CHECK(explicit_seed.out == from_env.out);
  CHECK(fallback.out != from_env.out);
}

TEST_CASE("verify subcommands") {
  TempFile report("cli_verify.json"), records("cli_records.csv");
  auto r = cli({"verify", "simulate", "--schedules", "10", "--seeds", "2", "--out", report.path});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(slurp(report.path));
  CHECK(j["simulate"]["runs"] == 20);
  CHECK(j["config"]["seed"] == 1);

  CHECK(cli({"verify", "cuts", "--schedules", "5"}).code == 0);
  r = cli({"verify", "optimality", "--trials", "30", "--protocol", "recomb", "--mu", "2", "--records", records.path,
           "--workers", "2"});
  CHECK(r.code == 0);
  CHECK(slurp(records.path).rfind("# config: ", 0) == 0);

  // An unreachable target turns into a verification failure.
  CHECK(cli({"verify", "optimality", "--trials", "30", "--field", "4", "--protocol", "recomb", "--mu", "k", "--epsilon", "0"}).code == 1);
  CHECK(cli({"verify", "nothing"}).code == 2);
}
