#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <unistd.h>

#include "cli.hpp"
#include "splinelab/error.hpp"

using namespace splinelab;
using namespace splinelab::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = fs::temp_directory_path() /
             ("splinelab_cli_" + std::to_string(::getpid()) + "_" + tag + "_" +
              std::to_string(counter++));
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string usage_message(const std::vector<std::string>& args) {
  try {
    parse_config(args);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UsageError);
    return e.what();
  }
  FAIL("expected a usage error");
  return {};
}

RunResult run_args(std::vector<std::string> args, const fs::path& dir) {
  args.push_back("--out");
  args.push_back(dir.string());
  std::ostringstream log;
  return run(parse_config(args), log);
}

}  // namespace

TEST_CASE("parse_config rejects bad values and names the flag") {
  CHECK(usage_message({"decay", "--k", "0"}).find("--k") != std::string::npos);
  CHECK(usage_message({"--k", "0", "decay"}).find("--k") != std::string::npos);
  CHECK(usage_message({"decay", "--frobnicate", "1"}).find("--frobnicate") != std::string::npos);
  CHECK(usage_message({"decay", "--mesh", "hexagonal"}).find("hexagonal") != std::string::npos);
  CHECK(usage_message({"nosuch"}).find("nosuch") != std::string::npos);
  CHECK(usage_message({"saks", "--orders", "2"}).find("--orders") != std::string::npos);
  CHECK(usage_message({"remez", "--rho", "1.5"}).find("--rho") != std::string::npos);
  CHECK(usage_message({"dominate", "--f", "sin2pi"}).find("--function") != std::string::npos);
  CHECK(usage_message({"decay", "--n", "1000"}).find("--n") != std::string::npos);
}

TEST_CASE("config file values are overridden by flags; unknown keys rejected") {
  const auto dir = fresh_dir("config");
  fs::create_directories(dir);
  const auto file = dir / "run.json";
  std::ofstream(file) << R"({"command": "converge", "seed": 3, "k": 3, "n": [10, 20]})";

  const auto a = parse_config({"--config", file.string(), "--seed", "7"});
  CHECK(a.seed == 7);
  CHECK(a.command == "converge");
  CHECK(a.k == std::vector<int>{3});
  CHECK(a.n == std::vector<std::size_t>{10, 20});

  const auto b = parse_config({"--config", file.string(), "--n", "40"});
  CHECK(b.seed == 3);
  CHECK(b.n == std::vector<std::size_t>{40});

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << R"({"command": "decay", "sead": 3})";
  CHECK(usage_message({"--config", bad.string()}).find("sead") != std::string::npos);
  const auto typed = dir / "typed.json";
  std::ofstream(typed) << R"({"command": "decay", "seed": -1})";
  CHECK(usage_message({"--config", typed.string()}).find("seed") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("defaults and output directory from the environment") {
  const auto dir = fresh_dir("env");
  ::setenv("SPLINELAB_OUT_DIR", dir.string().c_str(), 1);
  const auto c = parse_config({"dominate"});
  ::unsetenv("SPLINELAB_OUT_DIR");
  CHECK(c.out == dir.string());
  CHECK(c.function == "step");
  CHECK(c.dim == 2);
  CHECK(c.k == std::vector<int>{2, 2});
  CHECK(parse_config({"decay", "--out", "elsewhere"}).out == "elsewhere");
  CHECK(parse_config({"remez"}).k == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("main_entry exit codes") {
  const auto dir = fresh_dir("exit");
  std::ostringstream out, err;
  CHECK(main_entry({"decay", "--k", "0"}, out, err) == 2);
  CHECK(err.str().find("--k") != std::string::npos);
  CHECK(main_entry({"--help"}, out, err) == 0);
  CHECK(main_entry({"decay", "--k", "2", "--n", "100", "--out", dir.string()}, out, err) == 0);
  CHECK(slurp(dir / "decay.csv").rfind("n,draw,k,K,gamma\n", 0) == 0);

  // cells of ratio 100 underflow long before n = 200
  std::ostringstream err2;
  CHECK(main_entry({"decay", "--mesh", "geometric", "--ratio", "100", "--k", "4", "--n", "200",
                    "--out", dir.string()},
                   out, err2) == 1);
  const auto record = nlohmann::json::parse(slurp(dir / "failure.json"));
  CHECK(record["error"]["code"] == "InfeasibleSize");
  CHECK(record["command"] == "decay");
  CHECK(err2.str().find("InfeasibleSize") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("converge: sup error strictly decreasing") {
  const auto dir = fresh_dir("converge");
  const auto r = run_args({"converge", "--k", "2", "--f", "sin2pi", "--n", "10,20,40"}, dir);
  CHECK(r.exit_code == 0);
  const auto rows = read_csv(dir / "converge.csv");
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][2] < rows[i - 1][2]);
  fs::remove_all(dir);
}

TEST_CASE("bohr: decomposition and all-pass report") {
  const auto dir = fresh_dir("bohr");
  CHECK(run_args({"bohr", "--alpha", "5"}, dir).exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "bohr.json"));
  CHECK(j["report"]["all_pass"] == true);
  CHECK(j["report"]["route"] == "direct");
  CHECK(j["report"]["first_union_fraction"] == "137/300");
  CHECK(j["decomposition"]["N"] == 5);
  CHECK(j["decomposition"]["rectangles"][0]["exact"][0][1] == "1/5");

  CHECK(run_args({"bohr", "--alpha", "20"}, dir).exit_code == 0);
  const auto k = nlohmann::json::parse(slurp(dir / "bohr.json"));
  CHECK(k["report"]["route"] == "class");
  CHECK(k["report"]["all_pass"] == true);
  fs::remove_all(dir);
}

TEST_CASE("saks: median growth increasing") {
  const auto dir = fresh_dir("saks");
  CHECK(run_args({"saks", "--levels", "3", "--orders", "2,2"}, dir).exit_code == 0);
  const auto rows = read_csv(dir / "saks.csv");
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] > rows[i - 1][3]);
  for (const auto& r : rows) CHECK(r[2] > 0.0);
  fs::remove_all(dir);
}

TEST_CASE("every subcommand is byte-identical across runs with the same seed") {
  const std::vector<std::vector<std::string>> cases{
      {"decay", "--mesh", "random", "--meshes", "3", "--n", "20,40"},
      {"lebesgue", "--mesh", "random", "--meshes", "3", "--k", "3"},
      {"project", "--k", "2,3", "--n", "12"},
      {"converge", "--mesh", "random", "--n", "10,20"},
      {"dominate", "--mesh", "random", "--meshes", "2", "--samples", "50", "--n", "8,12"},
      {"weaktype", "--resolution", "32"},
      {"bohr", "--alpha", "4"},
      {"saks", "--levels", "2", "--points", "16"},
      {"remez", "--k", "2,3", "--trials", "400"}};
  for (const auto& args : cases) {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    const auto ra = run_args(args, a);
    const auto rb = run_args(args, b);
    CHECK(ra.exit_code == 0);
    CHECK(rb.exit_code == 0);
    REQUIRE(ra.files.size() == rb.files.size());
    CHECK(!ra.files.empty());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
      CHECK(fs::path(ra.files[i]).filename() == fs::path(rb.files[i]).filename());
      CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
  // a different seed changes randomized output
  const auto a = fresh_dir("seed_a");
  const auto b = fresh_dir("seed_b");
  run_args({"decay", "--mesh", "random", "--seed", "1"}, a);
  run_args({"decay", "--mesh", "random", "--seed", "2"}, b);
  CHECK(slurp(a / "decay.csv") != slurp(b / "decay.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("step functions from file") {
  const auto dir = fresh_dir("step");
  fs::create_directories(dir);
  const auto file = dir / "f.json";
  std::ofstream(file) << R"({"breaks": [[0, 0.5, 1], [0, 0.25, 1]], "values": [1, 0, 0, 2]})";
  CHECK(run_args({"weaktype", "--step-file", file.string(), "--lambdas", "0.5,1"}, dir)
            .exit_code == 0);
  CHECK(read_csv(dir / "weaktype.csv").size() == 2);
  CHECK(run_args({"dominate", "--step-file", file.string(), "--k", "1", "--samples", "40"}, dir)
            .exit_code == 0);
  std::ofstream(dir / "g.json") << R"({"breaks": [[0, 1]], "values": [1]})";
  CHECK(usage_message({"weaktype", "--step-file", (dir / "g.json").string()})
            .find("--step-file") != std::string::npos);
  fs::remove_all(dir);
}
