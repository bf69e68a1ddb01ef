#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "grasswalk/cli.hpp"
#include "grasswalk/trace_io.hpp"

namespace fs = std::filesystem;
using grasswalk::read_file;

namespace {
struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = grasswalk::cli::run(args, o, e);
  return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "grasswalk_cli_test" / name;
  fs::create_directories(p.parent_path());
  return p;
}
}  // namespace

TEST_CASE("run writes a trace and a manifest") {
  const fs::path out = scratch("q.jsonl");
  const Run r = cli({"run", "--problem", "quadratic", "--dim", "10", "--k", "2", "--T", "1",
                     "--seed", "7", "--solver", "exact", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto rounds = grasswalk::parse_trace_jsonl(read_file(out));
  CHECK(rounds.size() >= 1);
  CHECK(rounds.size() <= 2);
  CHECK(rounds.back().loss == 0.0);
  const auto manifest = nlohmann::json::parse(read_file(out.string() + ".manifest.json"));
  CHECK(manifest["seed"] == 7);
  CHECK(manifest["result"]["termination"] == "converged_exact");
}

TEST_CASE("same seed gives byte-identical traces") {
  const fs::path a = scratch("a.jsonl"), b = scratch("b.jsonl"), c = scratch("c.jsonl");
  std::vector<std::string> args{"run", "--problem", "rastrigin", "--dim", "8", "--center", "0.3",
                                "--k", "3", "--T", "3", "--max-rounds", "25", "--seed", "11",
                                "--emit-iterates", "--out"};
  auto with = [&](const fs::path& p, const std::string& threads) {
    auto v = args;
    v.push_back(p.string());
    v.push_back("--threads");
    v.push_back(threads);
    return cli(v).code;
  };
  REQUIRE(with(a, "1") == 0);
  REQUIRE(with(b, "1") == 0);
  REQUIRE(with(c, "3") == 0);
  CHECK(read_file(a) == read_file(b));
  CHECK(read_file(a) == read_file(c));
}

TEST_CASE("config file with sections, flags override") {
  const fs::path cfg = scratch("cfg.toml");
  {
    std::ofstream f(cfg);
    f << "# walk setup\n[problem]\nproblem = \"thomson\"\nN = 3\n[walk]\nk = 2\nmax-rounds = 7\n"
         "[solver]\nm = 6\nr = 2\n";
  }
  const fs::path out = scratch("cfg.jsonl");
  const Run r = cli({"run", "--config", cfg.string(), "--max-rounds", "4", "--epsilon", "1e-300",
                     "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto rounds = grasswalk::parse_trace_jsonl(read_file(out));
  CHECK(rounds.size() == 4);
  CHECK(read_file(out.string() + ".manifest.json").find("N=3") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(cli({"run", "--k", "0", "--out", scratch("x.jsonl").string()}).code == 2);
  CHECK(cli({"run", "--no-such-flag"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"run", "--config", "/nonexistent/file.toml"}).code == 2);
  CHECK(cli({"predict", "--delta", "0.1", "--out", scratch("p.json").string()}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  // phi of |x|^2 is identically zero: delta undefined
  CHECK(cli({"gap", "--problem", "quadratic", "--dim", "4", "--solver", "exact", "--samples", "50",
             "--out", scratch("g.json").string()})
            .code == 1);
}

TEST_CASE("predict reproduces the hand-derived iteration count") {
  const Run r = cli({"predict", "--delta", "0", "--theta", "0.14142135623730951", "--range", "1",
                     "--epsilon", "1e-3", "--out", scratch("pred.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("predicted_iterations=67") != std::string::npos);
}

TEST_CASE("verify on the circle holds") {
  const fs::path out = scratch("v.json");
  const Run r = cli({"verify", "--case", "sin-circle", "--samples", "100000", "--trials", "5000",
                     "--out", out.string()});
  CHECK(r.code == 0);
  const auto rep = nlohmann::json::parse(read_file(out));
  const double delta = rep["level_set"][0]["delta"];
  CHECK(std::abs(delta - 0.25) < 0.01);
  CHECK(rep["violated"] == false);
}

TEST_CASE("study writes summary files") {
  const fs::path dir = scratch("study");
  fs::remove_all(dir);
  const Run r = cli({"study", "--preset", "thomson-n2", "--trials", "4", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "traces" / "trial_0003.jsonl"));
  const auto s = nlohmann::json::parse(read_file(dir / "summary.json"));
  CHECK(s["success_rate"] == 1.0);
}

TEST_CASE("manifest config reruns to the same trace") {
  const fs::path first = scratch("m1.jsonl"), second = scratch("m2.jsonl");
  REQUIRE(cli({"run", "--problem", "ackley", "--dim", "6", "--center", "0.123456789012345678",
               "--k", "2", "--T", "2", "--max-rounds", "20", "--start", "gaussian",
               "--anchored-start", "--seed", "21", "--out", first.string()})
              .code == 0);
  const auto manifest = nlohmann::json::parse(read_file(first.string() + ".manifest.json"));
  std::string config = manifest["config"];
  config.replace(config.find("m1.jsonl"), 8, "m2.jsonl");
  const fs::path cfg = scratch("m.toml");
  {
    std::ofstream f(cfg);
    f << config;
  }
  REQUIRE(cli({"run", "--config", cfg.string()}).code == 0);
  CHECK(read_file(first) == read_file(second));
}
