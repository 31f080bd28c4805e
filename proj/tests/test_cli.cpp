#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crn/cli.hpp"

using namespace crn;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "crn_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

struct EnvGuard {
  EnvGuard() { unsetenv("CRN_SEED"); }
  ~EnvGuard() { unsetenv("CRN_SEED"); }
};

}  // namespace

TEST_CASE("count prints one json document") {
  const auto r = run({"count", "--species", "3", "--steps", "2", "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["mechanisms"] == 276);
  CHECK(j["mechanisms_exact_species"] == 246);
}

TEST_CASE("every command has a json mode that yields a single document") {
  const EnvGuard env;
  const auto sim = scratch("sim.csv");
  const std::vector<std::vector<std::string>> cmds{
      {"count", "--species", "2", "--steps", "1"},
      {"enumerate", "--species", "2", "--steps", "2", "--mass-conserving"},
      {"enumerate", "--species", "3", "--steps", "1", "--census"},
      {"analyze", "--mechanism", "X <=> Y; 2 X <=> X + Y"},
      {"simulate", "--mechanism", "X <=> Y", "--rates", "k1=1,km1=2", "--init", "X=1,Y=0", "-o", sim.string()},
      {"fit", "--mechanism", "X -> Y; Y -> Z", "--data", "fixture:salicylic"},
      {"screen", "--species", "2", "--steps", "2", "--data", "fixture:sim-m2r2", "--mass-conserving",
       "--db-constrained"},
  };
  for (auto args : cmds) {
    args.push_back("--json");
    const auto r = run(args);
    INFO(args[0]);
    CHECK(r.code == 0);
    CHECK_NOTHROW((void)nlohmann::json::parse(r.out));
  }
}

TEST_CASE("config files and flags are interchangeable") {
  const EnvGuard env;
  struct Case {
    std::string command;
    std::vector<std::pair<std::string, std::string>> settings;  // empty value: switch
  };
  const auto data = scratch("cfg-data.csv");
  REQUIRE(run({"simulate", "--mechanism", "X -> Y; Y -> Z", "--rates", "k1=0.5,k2=0.2", "--init", "X=1,Y=0,Z=0",
               "--dt", "0.5", "-o", data.string()})
              .code == 0);
  const std::vector<Case> cases{
      {"count", {{"species", "3"}, {"steps", "2"}}},
      {"enumerate",
       {{"species", "2"}, {"steps", "2"}, {"exact-species", ""}, {"mass-conserving", ""}, {"db-class", "cdb"},
        {"limit", "5"}, {"cap", "100"}}},
      {"enumerate", {{"species", "3"}, {"steps", "2"}, {"census", ""}, {"workers", "2"}}},
      {"analyze", {{"mechanism", "X <=> Y; Y <=> Z; Z <=> X"}}},
      {"simulate",
       {{"mechanism", "X <=> Y; 2 X <=> X + Y"}, {"rates", "k1=0.1,km1=0.1,k2=1"}, {"db-complete", ""},
        {"init", "X=2,Y=3"}, {"t-end", "2"}, {"dt", "0.5"}, {"noise", "0.02"}, {"seed", "5"}, {"rtol", "1e-9"},
        {"atol", "1e-12"}}},
      {"fit",
       {{"mechanism", "X -> Y; Y -> Z"}, {"data", data.string()}, {"weights", "relative"}, {"start", "k1=0.3"},
        {"starts", "2"}, {"seed", "9"}, {"fit-init", ""}, {"init", "Y=0,Z=0"}, {"rtol", "1e-10"},
        {"atol", "1e-13"}, {"max-iterations", "50"}, {"allow-negative", ""}}},
      {"screen",
       {{"species", "2"}, {"steps", "2"}, {"data", "fixture:sim-m2r2"}, {"mass-conserving", ""},
        {"db-constrained", ""}, {"criterion", "bic"}, {"top", "2"}, {"workers", "2"}, {"cap", "50"},
        {"family", "all"}}},
  };
  for (const auto& c : cases) {
    std::vector<std::string> flags{c.command, "--json"};
    std::string config;
    for (const auto& [k, v] : c.settings) {
      flags.push_back("--" + k);
      if (!v.empty()) flags.push_back(v);
      config += k + " = " + (v.empty() ? "true" : v) + "\n";
    }
    const auto cfg = write_file(c.command + ".cfg", "# generated\n" + config);
    INFO(c.command);
    const auto a = run(flags);
    const auto b = run({c.command, "--json", "--config", cfg.string()});
    CHECK(a.code == 0);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("flags override config values; unknown keys are rejected") {
  const auto cfg = write_file("override.cfg", "species = 2\nsteps = 1\n");
  const auto a = run({"count", "--json", "--config", cfg.string(), "--species", "3"});
  CHECK(nlohmann::json::parse(a.out)["species"] == 3);
  const auto bad = write_file("bad.cfg", "species = 2\nnoise = 0.1\n");
  const auto r = run({"count", "--config", bad.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("noise") != std::string::npos);
  const auto dup = write_file("dup.cfg", "species = 2\nspecies = 3\n");
  CHECK(run({"count", "--config", dup.string()}).code == 1);
}

TEST_CASE("seed resolution and printing") {
  const EnvGuard env;
  const std::vector<std::string> sim{"simulate", "--mechanism", "X <=> Y", "--rates", "k1=1,km1=1",
                                     "--init",   "X=1,Y=0",     "--t-end",   "1"};
  // No noise: no randomness, no seed line.
  CHECK(run(sim).err.find("seed") == std::string::npos);

  auto noisy = sim;
  noisy.insert(noisy.end(), {"--noise", "0.05"});
  auto with_seed = noisy;
  with_seed.insert(with_seed.end(), {"--seed", "11"});
  const auto a = run(with_seed);
  CHECK(a.err.find("seed: 11") != std::string::npos);
  CHECK(a.out == run(with_seed).out);

  setenv("CRN_SEED", "11", 1);
  const auto b = run(noisy);
  CHECK(b.out == a.out);
  CHECK(b.err.find("seed: 11") != std::string::npos);
  unsetenv("CRN_SEED");

  const auto c = run(noisy);
  CHECK(c.err.find("(generated)") != std::string::npos);

  setenv("CRN_SEED", "abc", 1);
  CHECK(run(noisy).code == 1);
}

TEST_CASE("exit codes") {
  const EnvGuard env;
  CHECK(run({}).code != 0);
  CHECK(run({"count", "--species", "x"}).code == 1);
  CHECK(run({"analyze", "--mechanism", "X <=> "}).code == 1);
  CHECK(run({"screen", "--species", "2", "--steps", "2", "--data", "fixture:sim-m2r2", "--mass-conserving",
             "--db-class", "udb"})
            .code == 2);
  CHECK(run({"screen", "--species", "2", "--steps", "2", "--data", "fixture:sim-m2r2", "--cap", "3"}).code == 3);
  CHECK(run({"enumerate", "--species", "3", "--steps", "3", "--cap", "10"}).code == 3);
  CHECK(run({"fit", "--mechanism", "X -> Y", "--data", "fixture:salicylic"}).code == 1);
  CHECK(run({"rank", "-i", scratch("missing.jsonl").string()}).code == 1);
}

TEST_CASE("screen then rank with plot data") {
  const EnvGuard env;
  const auto results = scratch("screen.jsonl");
  fs::remove(results);
  const auto s = run({"screen", "--species", "3", "--family", "consecutive", "--data", "fixture:salicylic", "-o",
                      results.string(), "--criterion", "rss"});
  REQUIRE(s.code == 0);
  const auto plots = scratch("plots");
  fs::remove_all(plots);
  const auto r = run({"rank", "-i", results.string(), "--criterion", "rss", "--top", "2", "--plots", plots.string(),
                      "--json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["ranking"].size() == 2);
  CHECK(j["ranking"][0]["mechanism"] == "X -> Y; Y -> Z");
  const std::string id = j["ranking"][0]["id"];
  CHECK(fs::exists(plots / ("1-" + id) / "X.csv"));
  CHECK(fs::exists(plots / ("1-" + id) / "Z.csv"));
}

TEST_CASE("simulate writes csv to standard output") {
  const auto r = run({"simulate", "--mechanism", "X -> Y", "--rates", "k1=1", "--init", "X=1", "--t-end", "1",
                      "--dt", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,X,Y\n0,1,0\n0.5,", 0) == 0);
}
