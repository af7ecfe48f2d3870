// End-to-end runs of the piag binary.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kWork = fs::path(PIAG_TEST_WORK_DIR) / "cli";

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

Result piag(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt", err = kWork / "stderr.txt";
  const std::string cmd = std::string("cd '") + kWork.string() + "' && '" + PIAG_CLI_PATH +
                          "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

const char* kBoxProblem = R"({
  "dimension": 1,
  "components": [{"A": [-1.0], "b": [0.0]}],
  "nonsmooth": {"kind": "box", "lo": [-1.0], "hi": [1.0]}
})";

}  // namespace

TEST_CASE("solve the one-dimensional box instance") {
  spit(kWork / "box/problem.json", kBoxProblem);
  spit(kWork / "box/config.json", R"({"alpha": "auto_lemma2", "x0": [0.3]})");
  const Result r = piag("--out box/run solve --problem box/problem.json --config box/config.json");
  CHECK(r.code == 0);
  const Json s = Json::parse(slurp(kWork / "box/run/summary.json"));
  CHECK(s["termination"] == "converged");
  CHECK(s["final_F"].get<double>() == doctest::Approx(-0.5));
  CHECK(fs::exists(kWork / "box/run/trace.csv"));
}

TEST_CASE("large stepsize never crashes") {
  piag("--seed 4 --out big generate --family quadratic_box -n 4 --dim 3 --negative-curvature 1.0");
  const Json meta = Json::parse(slurp(kWork / "big/problem.meta.json"));
  const double L = meta["L"].get<double>();
  spit(kWork / "big/config.json",
       "{\"alpha\": " + std::to_string(10.0 / L) + ", \"x0\": [0.1, 0.1, 0.1], \"max_iters\": 2000}");
  const Result r = piag("--out big/run solve --problem big/problem.json --config big/config.json");
  CHECK((r.code == 0 || r.code == 2 || r.code == 3));
  CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("zero delay matches the forward-backward reference byte for byte") {
  piag("--seed 9 --out fbs generate --family quadratic_l1 -n 5 --dim 6 --lambda 0.2");
  spit(kWork / "fbs/config.json", R"({"schedule": {"kind": "cyclic", "tau": 3}})");
  CHECK(piag("--out fbs/piag solve --problem fbs/problem.json --config fbs/config.json --tau 0").code == 0);
  CHECK(piag("--out fbs/ref solve --problem fbs/problem.json --config fbs/config.json --fbs").code == 0);
  CHECK(slurp(kWork / "fbs/piag/trace.csv") == slurp(kWork / "fbs/ref/trace.csv"));
}

TEST_CASE("verify") {
  piag("--seed 2 --out ver generate --family quadratic_box -n 4 --dim 2");
  spit(kWork / "ver/config.json", R"({"schedule": {"kind": "adversarial_max", "tau": 3}})");
  REQUIRE(piag("--out ver/run solve --problem ver/problem.json --config ver/config.json --full-log").code == 0);

  SUBCASE("clean run passes") {
    const Result r = piag("verify --run ver/run");
    CHECK(r.code == 0);
    CHECK(r.out.find("sufficient_descent") != std::string::npos);
    const Json v = Json::parse(slurp(kWork / "ver/run/verify.json"));
    CHECK(v["passed"] == true);
  }
  SUBCASE("corrupted trace is caught with its k") {
    fs::create_directories(kWork / "ver/bad");
    for (const char* f : {"summary.json", "iterates.csv"})
      fs::copy_file(kWork / "ver/run" / f, kWork / "ver/bad" / f, fs::copy_options::overwrite_existing);
    std::stringstream in(slurp(kWork / "ver/run/trace.csv"));
    std::string line, out;
    for (int i = 0; std::getline(in, line); ++i) {
      if (i == 6) {  // record k = 5
        const auto a = line.find(','), b = line.find(',', a + 1);
        line = line.substr(0, a) + ",1000" + line.substr(b);
      }
      out += line + "\n";
    }
    spit(kWork / "ver/bad/trace.csv", out);
    const Result r = piag("verify --run ver/bad");
    CHECK(r.code == 4);
    CHECK(r.err.find("k=4") != std::string::npos);
  }
  SUBCASE("empty trace") {
    fs::create_directories(kWork / "ver/empty");
    for (const char* f : {"summary.json", "iterates.csv"})
      fs::copy_file(kWork / "ver/run" / f, kWork / "ver/empty" / f, fs::copy_options::overwrite_existing);
    spit(kWork / "ver/empty/trace.csv", "k,F,step_norm,prox_residual,max_staleness,delta_k\n");
    const Result r = piag("verify --run ver/empty");
    CHECK(r.code == 1);
    CHECK(r.err.rfind("error code=", 0) == 0);
  }
  SUBCASE("missing iterate log") {
    REQUIRE(piag("--out ver/short solve --problem ver/problem.json --config ver/config.json").code == 0);
    const Result r = piag("verify --run ver/short");
    CHECK(r.code == 1);
    CHECK(r.err.find("missing_iterate_log") != std::string::npos);
  }
}

TEST_CASE("rate") {
  piag("--seed 3 --out rt generate --family quadratic_l1 -n 4 --dim 5");
  spit(kWork / "rt/config.json", R"({"tau": 2, "full_log": true})");
  REQUIRE(piag("--out rt/run solve --problem rt/problem.json --config rt/config.json").code == 0);
  CHECK(piag("rate --run rt/run").code == 0);
  const Json f = Json::parse(slurp(kWork / "rt/run/rate.json"));
  CHECK(f["rate"].get<double>() < 1.0);
  CHECK(piag("rate --run rt/run --series iterate").code == 0);
  CHECK(piag("rate --run rt/run --series velocity").code == 1);
}

TEST_CASE("compare-delays") {
  piag("--seed 5 --out cmp generate --family quadratic_l1 -n 8 --dim 10");
  const Result r = piag("--out cmp/delays compare-delays --problem cmp/problem.json --taus 0,2,5,10");
  CHECK(r.code == 0);
  std::stringstream table(slurp(kWork / "cmp/delays/compare_delays.csv"));
  std::string line;
  std::getline(table, line);
  CHECK(line == "tau,alpha,iters_to_tol,fitted_rate");
  int rows = 0;
  while (std::getline(table, line)) {
    ++rows;
    CHECK(line.find("NA") == std::string::npos);
    CHECK(line.find("diverged") == std::string::npos);
  }
  CHECK(rows == 4);

  spit(kWork / "cmp/none.json", R"({"schedule": {"kind": "none"}})");
  REQUIRE(piag("--out cmp/solo solve --problem cmp/problem.json --config cmp/none.json").code == 0);
  CHECK(slurp(kWork / "cmp/solo/trace.csv") == slurp(kWork / "cmp/delays/tau_0/trace.csv"));
}

TEST_CASE("outputs are deterministic") {
  for (const char* dir : {"det1", "det2"}) {
    const std::string d(dir);
    piag("--seed 11 --out " + d + " generate --family quadratic_box -n 3 --dim 2");
    spit(kWork / d / "config.json", R"({"schedule": {"kind": "uniform_random", "tau": 2, "seed": 5}})");
    piag("--out " + d + "/run solve --problem " + d + "/problem.json --config " + d + "/config.json --full-log");
  }
  for (const char* f : {"problem.json", "problem.meta.json", "run/trace.csv", "run/summary.json",
                        "run/iterates.csv"}) {
    CHECK_MESSAGE(slurp(kWork / "det1" / f) == slurp(kWork / "det2" / f), f);
  }
}

TEST_CASE("input errors are one machine-readable line") {
  spit(kWork / "err/problem.json", kBoxProblem);
  spit(kWork / "err/config.json", "{\n  \"alpha\": 0.1,\n  \"stepsize\": 2\n}\n");
  Result r = piag("--out err/run solve --problem err/problem.json --config err/config.json");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error code=parse_error line=3", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  r = piag("--out err/run solve --problem err/nothing.json");
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error code=missing_file", 0) == 0);

  r = piag("generate --family cubic");
  CHECK(r.code == 1);
  r = piag("frobnicate");
  CHECK(r.code == 1);
}
