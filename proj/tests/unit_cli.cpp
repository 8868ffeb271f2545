#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fitzflow/config.hpp"
#include "fitzflow/csv.hpp"
#include "fitzflow/descriptors.hpp"

using namespace fitzflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fitzflow_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(FITZFLOW_CLI_PATH) + " " + args +
                    " >/dev/null 2>/dev/null";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config parsing: sections, types, lists, errors") {
  Config c = Config::parse_string(
      "[run]\nseed = 5 # comment\n[solve]\nN = 64\nT = 1.5\n"
      "init = 1, 2.5, -3\n");
  CHECK(c.require_int("run", "seed") == 5);
  CHECK(c.require_num("solve", "T") == doctest::Approx(1.5));
  CHECK(c.get_num_list("solve", "init").size() == 3);
  CHECK(c.get("solve", "missing", "x") == "x");
  CHECK_THROWS_AS(c.require("solve", "missing"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("[oops\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse_string("novalue\n"), ConfigError);
  try {
    c.require_num("run", "missing_field");
  } catch (const ConfigError& e) {
    CHECK(e.field == "run.missing_field");  // error names the field
  }
}

TEST_CASE("config hash is order- and whitespace-invariant") {
  Config a = Config::parse_string("[s]\nx = 1\ny = 2\n");
  Config b = Config::parse_string("[s]\n  y =   2\nx = 1  # note\n");
  Config c = Config::parse_string("[s]\nx = 1\ny = 3\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("numeric formatting is canonical") {
  CHECK(format_num(0.0) == "0");
  CHECK(format_num(-0.0) == "0");
  CHECK(format_num(0.5) == "0.5");
  CHECK(format_num(1e300) == "1e+300");
}

TEST_CASE("descriptor parsing and dispatch") {
  CHECK(make_convex("quadratic(1)").eval1(2.0).value() == doctest::Approx(4.0));
  CHECK(make_convex("scaled(halfnormsq(), 2)").eval1(2.0).value() ==
        doctest::Approx(4.0));
  CHECK(make_operator("sign1d").dim() == 1);
  CHECK(make_operator("subdiff(abspower(3))").maximal());
  CHECK(make_rep("fb(0.5)").dim() == 1);
  CHECK(make_rep("infconv(fb(0.5), 1)").dim() == 1);
  Vec v(1), w(1);
  v[0] = 1.0;
  w[0] = 1.0;
  CHECK(make_rep("fitzidentity").eval(v, w).value() == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_convex("bogus(1)"), ConfigError);
  CHECK_THROWS_AS(make_operator("quadratic(1,"), ConfigError);
}

TEST_CASE("csv writer: header comment and atomic write") {
  TempDir tmp;
  CsvWriter csv({"a", "b"});
  csv.add_row({1.0, 2.5});
  std::string body = csv.body(0xabcULL, 7);
  CHECK(body.find("# config=0000000000000abc seed=7\n") == 0);
  CHECK(body.find("a,b\n1,2.5\n") != std::string::npos);
  csv.write((tmp.path / "x.csv").string(), 0xabcULL, 7);
  CHECK(read_file(tmp.path / "x.csv") == body);
  CHECK(!fs::exists(tmp.path / "x.csv.tmp"));
}

TEST_CASE("cli: solve runs and produces deterministic artifacts") {
  TempDir tmp;
  write_file(tmp.path / "cfg.ini",
             "[run]\nseed = 3\n[solve]\nkind = mm\noperator = identity\n"
             "representative = fitzidentity\nT = 1\nN = 32\ninit = 1\n");
  std::string cfg = (tmp.path / "cfg.ini").string();
  CHECK(run_cli("solve --config " + cfg + " --out " + (tmp.path / "a").string() +
                " --quiet") == 0);
  CHECK(run_cli("solve --config " + cfg + " --out " + (tmp.path / "b").string() +
                " --quiet") == 0);
  for (const char* f : {"reference.csv", "nullmin.csv", "gaps.csv",
                        "summary.csv"}) {
    std::string a = read_file(tmp.path / "a" / f);
    CHECK(!a.empty());
    CHECK(a == read_file(tmp.path / "b" / f));  // byte-identical bodies
    CHECK(a.find("# config=") == 0);
    CHECK(a.find("seed=3") != std::string::npos);
  }
  CHECK(fs::exists(tmp.path / "a" / "manifest.json"));
}

TEST_CASE("cli: conjugate artifact matches the closed form") {
  TempDir tmp;
  write_file(tmp.path / "cfg.ini",
             "[conjugate]\nfunction = quadratic(1)\nlo = -2\nhi = 2\n"
             "samples = 5\n");
  CHECK(run_cli("conjugate --config " + (tmp.path / "cfg.ini").string() +
                " --out " + (tmp.path / "o").string() + " --quiet") == 0);
  std::string body = read_file(tmp.path / "o" / "conjugate.csv");
  // y = 2 row: value y^2/4 = 1
  CHECK(body.find("\n2,1\n") != std::string::npos);
  CHECK(body.find("\n-2,1\n") != std::string::npos);
  std::string sum = read_file(tmp.path / "o" / "summary.csv");
  CHECK(sum.find("biconjugate_deviation,0\n") != std::string::npos);
}

TEST_CASE("cli: malformed descriptor exits 2 with a field-named error") {
  TempDir tmp;
  write_file(tmp.path / "bad.ini", "[conjugate]\nfunction = bogus(1)\n");
  CHECK(run_cli("conjugate --config " + (tmp.path / "bad.ini").string() +
                " --out " + (tmp.path / "o").string()) == 2);
  write_file(tmp.path / "bad2.ini", "[solve]\nkind = mm\n");
  CHECK(run_cli("solve --config " + (tmp.path / "bad2.ini").string() +
                " --out " + (tmp.path / "o").string()) == 2);
  CHECK(run_cli("solve --config /nonexistent.ini --out " +
                (tmp.path / "o").string()) == 2);
}

TEST_CASE("cli: fitz and gamma and stability commands") {
  TempDir tmp;
  write_file(tmp.path / "fitz.ini",
             "[fitz]\noperator = identity\nrepresentative = fb(0.5)\n");
  CHECK(run_cli("fitz --config " + (tmp.path / "fitz.ini").string() +
                " --out " + (tmp.path / "f").string() + " --quiet") == 0);
  std::string rep = read_file(tmp.path / "f" / "representation.csv");
  CHECK(rep.find("represents,1") != std::string::npos);

  write_file(tmp.path / "gamma.ini",
             "[gamma]\nfamily = fb_perturbed\nn_max = 64\n");
  CHECK(run_cli("gamma --config " + (tmp.path / "gamma.ini").string() +
                " --out " + (tmp.path / "g").string() + " --quiet") == 0);
  std::string verdict = read_file(tmp.path / "g" / "verdict.csv");
  CHECK(verdict.find("liminf_ok,1") != std::string::npos);
  CHECK(verdict.find("kuratowski_graphs_converge,0") != std::string::npos);

  write_file(tmp.path / "stab.ini",
             "[stability]\nkind = mm\nN = 32\ninit = 1\nn_list = 2,4,8,16\n");
  CHECK(run_cli("stability --config " + (tmp.path / "stab.ini").string() +
                " --out " + (tmp.path / "s").string() + " --quiet") == 0);
  CHECK(fs::exists(tmp.path / "s" / "distances.dat"));
  CHECK(fs::exists(tmp.path / "s" / "report.csv"));
}
