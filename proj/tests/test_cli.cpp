// Runs the mcast executable as a subprocess.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kTool = MCAST_TOOL_PATH;
const fs::path kConfigs = MCAST_CONFIG_DIR;

struct Run {
  int exit_code;
  std::string out;
  std::string err;
};

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("mcast_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const fs::path out = workdir() / "stdout.txt";
  const fs::path err = workdir() / "stderr.txt";
  const std::string cmd = kTool.string() + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return Run{WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string cfg(const std::string& name) { return (kConfigs / name).string(); }
std::string tmp(const std::string& name) { return (workdir() / name).string(); }

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

}  // namespace

TEST_CASE("train then eval twice gives byte-identical files") {
  for (int i = 0; i < 2; ++i) {
    const std::string n = std::to_string(i);
    REQUIRE(run("train --quiet --no-timing --config " + cfg("smoke_bp.json") + " --out " + tmp("bp" + n + ".json"))
                .exit_code == 0);
    REQUIRE(run("eval --checkpoint " + tmp("bp" + n + ".json") + " --realizations 3 --seed 11 --out " +
                tmp("eval" + n + ".csv"))
                .exit_code == 0);
  }
  CHECK(slurp(tmp("bp0.json")) == slurp(tmp("bp1.json")));
  CHECK(slurp(tmp("bp0.json.log.csv")) == slurp(tmp("bp1.json.log.csv")));
  CHECK(slurp(tmp("eval0.csv")) == slurp(tmp("eval1.csv")));

  const std::vector<std::string> rows = lines(slurp(tmp("eval0.csv")));
  REQUIRE(rows.size() == 2 + 3 * 5);
  CHECK(rows[0].rfind("# mcast ", 0) == 0);
  CHECK(rows[0].find("config_sha256=") != std::string::npos);
  CHECK(rows[0].find("seed=11") != std::string::npos);
  CHECK(rows[1] == "realization,iteration,feasibility_loss,min_snr_db");
  CHECK(rows[2].rfind("0,1,", 0) == 0);
  CHECK(rows.back().rfind("2,5,", 0) == 0);

  const std::vector<std::string> log = lines(slurp(tmp("bp0.json.log.csv")));
  REQUIRE(log.size() == 2 + 5 * 4);
  CHECK(log[1] == "depth,batch_index,mean_loss,wall_time_ms");
}

TEST_CASE("worker count does not change outputs") {
  REQUIRE(run("train --quiet --no-timing --workers 3 --config " + cfg("smoke_bp.json") + " --out " + tmp("bpw.json"))
              .exit_code == 0);
  REQUIRE(run("train --quiet --no-timing --config " + cfg("smoke_bp.json") + " --out " + tmp("bp1w.json")).exit_code ==
          0);
  CHECK(slurp(tmp("bpw.json")) == slurp(tmp("bp1w.json")));
  REQUIRE(run("eval --workers 4 --checkpoint " + tmp("bpw.json") + " --realizations 5 --seed 2 --out " +
              tmp("ew4.csv"))
              .exit_code == 0);
  REQUIRE(run("eval --checkpoint " + tmp("bpw.json") + " --realizations 5 --seed 2 --out " + tmp("ew1.csv"))
              .exit_code == 0);
  CHECK(slurp(tmp("ew4.csv")) == slurp(tmp("ew1.csv")));
}

TEST_CASE("show prints one row per iteration") {
  REQUIRE(run("train --quiet --config " + cfg("smoke_pocs.json") + " --out " + tmp("pocs.json")).exit_code == 0);
  const Run r = run("show --checkpoint " + tmp("pocs.json"));
  REQUIRE(r.exit_code == 0);
  const std::vector<std::string> rows = lines(r.out);
  REQUIRE(rows.size() == 2 + 20);
  CHECK(rows[1] == "t,lambda,beta");
  CHECK(rows[2].rfind("1,", 0) == 0);
  CHECK(rows.back().rfind("20,", 0) == 0);
}

TEST_CASE("compare emits one bound row per realization") {
  REQUIRE(run("train --quiet --config " + cfg("smoke_bp.json") + " --out " + tmp("cmp.json")).exit_code == 0);
  const Run r = run("compare --config " + cfg("smoke_bp.json") + " --checkpoint " + tmp("cmp.json") +
                    " --realizations 3 --iterations 8 --rand-samples 50 --out " + tmp("cmp.csv"));
  REQUIRE(r.exit_code == 0);
  const std::vector<std::string> rows = lines(slurp(tmp("cmp.csv")));
  REQUIRE(rows.size() > 2);
  CHECK(rows[0].find("bound_tol=") != std::string::npos);
  CHECK(rows[1] == "realization,iteration,method,value_db");
  int bounds = 0, rand_rows = 0;
  std::vector<std::string> methods;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i].find(",sdp_bound,") != std::string::npos) ++bounds;
    if (rows[i].find(",rand_a_sdp,") != std::string::npos) ++rand_rows;
  }
  CHECK(bounds == 3);
  CHECK(rand_rows == 3);
  for (const char* m : {",trained_du_pocs_bp,", ",pocs_bp_reference,", ",pocs_fixed_1.9,", ",pocs_fixed_1.0,"}) {
    int count = 0;
    for (const std::string& row : rows) count += row.find(m) != std::string::npos;
    CHECK(count == 3 * 8);
  }
  // Rows are sorted by (realization, iteration, method).
  CHECK(rows[2].rfind("0,0,rand_a_sdp,", 0) == 0);
  CHECK(rows[3].rfind("0,0,sdp_bound,", 0) == 0);
  CHECK(rows[4].rfind("0,1,pocs_bp_reference,", 0) == 0);
}

TEST_CASE("sweep-beta retrains per weight") {
  const Run r = run("sweep-beta --config " + cfg("smoke_bp.json") + " --betas 3,0 --realizations 2 --out " +
                    tmp("sweep.csv"));
  REQUIRE(r.exit_code == 0);
  const std::vector<std::string> rows = lines(slurp(tmp("sweep.csv")));
  REQUIRE(rows.size() == 2 + 4);
  CHECK(rows[1] == "softmin_beta,realization,min_snr_db");
  CHECK(rows[2].rfind("0,0,", 0) == 0);
  CHECK(rows[5].rfind("3,1,", 0) == 0);
}

TEST_CASE("errors have distinct exit codes and one-line messages") {
  write(tmp("unknown_key.json"), R"({"algorithm": "du_pocs_bp", "n_antennas": 4, "n_users": 2, "depth": 2, "x": 1})");
  REQUIRE(run("train --quiet --config " + cfg("smoke_bp.json") + " --out " + tmp("good.json")).exit_code == 0);
  std::string bad = slurp(tmp("good.json"));
  bad[bad.find("\"lambda\": [") + 14] ^= 1;
  write(tmp("corrupt.json"), bad);

  struct Case {
    std::string args;
    int code;
    std::string name;
  };
  const std::vector<Case> cases = {
      {"train --config " + cfg("smoke_bp.json") + " --out " + tmp("x.json") + " --bogus", 2, "usage"},
      {"frobnicate", 2, "usage"},
      {"train --config " + tmp("missing.json") + " --out " + tmp("x.json"), 3, "config_unreadable"},
      {"train --config " + tmp("unknown_key.json") + " --out " + tmp("x.json"), 4, "config_schema"},
      {"show --checkpoint " + tmp("missing.json"), 5, "checkpoint_unreadable"},
      {"show --checkpoint " + tmp("corrupt.json"), 6, "checkpoint_invalid"},
      {"eval --checkpoint " + tmp("good.json") + " --realizations 1 --seed 1 --out /nonexistent-dir/e.csv", 7,
       "output_unwritable"},
      {"sweep-beta --config " + cfg("smoke_pocs.json") + " --betas 1 --out " + tmp("s.csv"), 9,
       "incompatible_inputs"},
  };
  for (const Case& c : cases) {
    CAPTURE(c.args);
    const Run r = run(c.args);
    CHECK(r.exit_code == c.code);
    const std::vector<std::string> err = lines(r.err);
    REQUIRE(err.size() == 1);
    CHECK(err[0].rfind("error code=" + c.name + " exit=" + std::to_string(c.code) + " message=\"", 0) == 0);
    CHECK(err[0].back() == '"');
  }
}

TEST_CASE("version and help succeed") {
  CHECK(run("--version").exit_code == 0);
  CHECK(run("--help").exit_code == 0);
  CHECK(run("train --help").exit_code == 0);
}
