#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"
#include "latdeconv/common.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "latdeconv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = latdeconv::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  latdeconv::set_thread_count(0);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("latdeconv_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({"green"}).code == 2);  // --dim missing
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"cdelta", "--delta", "abc"}).code == 2);
}

TEST_CASE("green rejects d = 2") {
  const Run r = cli({"green", "--dim", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("d > 2 required") != std::string::npos);
}

TEST_CASE("green summary and CSV") {
  const fs::path dir = scratch("green");
  const Run r = cli({"green", "--dim", "3", "--radius", "8", "--out", (dir / "c.csv").string(), "--manifest",
                     (dir / "m.json").string()});
  REQUIRE(r.code == 0);
  const json s = json::parse(r.out);
  CHECK(s["asymptotics"]["amplitude_ratio"].get<double>() == doctest::Approx(1.0).epsilon(0.05));
  // C(0) for d = 3 is the Watson integral 1.5163860592
  CHECK(s["C0"].get<double>() == doctest::Approx(1.5163860592).epsilon(1e-3));
  std::istringstream csv(slurp(dir / "c.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x1,x2,x3,r,C,asymptote,scaled_residual");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 165);  // orbit representatives 8 >= x1 >= x2 >= x3 >= 0
  const json m = json::parse(slurp(dir / "m.json"));
  CHECK(m["command"] == "green");
  CHECK(m["grid"]["M"] == 32);
}

TEST_CASE("green walk method reports the spectral cross check") {
  const Run r = cli({"green", "--dim", "3", "--mu", "0.5", "--radius", "4", "--method", "walk"});
  REQUIRE(r.code == 0);
  const json s = json::parse(r.out);
  CHECK_FALSE(s.contains("asymptotics"));
  CHECK(s["cross_method"]["max_delta"].get<double>() < 1e-10);
  CHECK(s["cross_method"]["within_tail_bound"] == true);
}

TEST_CASE("cell cap refuses large grids") {
  const Run r = cli({"--cell-cap", "100", "green", "--dim", "3", "--radius", "8"});
  CHECK(r.code == 2);
  CHECK(r.err.find("above the cap") != std::string::npos);
  latdeconv::set_cell_cap(std::size_t{1} << 29);
}

TEST_CASE("exponents") {
  SUBCASE("below the dimension limit") {
    CHECK(cli({"exponents", "--dim", "9", "--rho", "0.4"}).code == 2);
    CHECK(cli({"exponents", "--dim", "12", "--rho", "0.1"}).code == 2);
    const Run r = cli({"exponents", "--dim", "9", "--rho", "0.4", "--exploratory"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["in_range"] == false);
  }
  SUBCASE("in range") {
    const Run r = cli({"exponents", "--dim", "5", "--rho", "2"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["s_sup"] == "2");
    CHECK(j["n_d"] == 4);
  }
  SUBCASE("table") {
    const Run r = cli({"exponents", "--table"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("name,d_min,", 0) == 0);
    CHECK(r.out.find("percolation") != std::string::npos);
  }
  CHECK(cli({"exponents", "--dim", "5"}).code == 2);
}

TEST_CASE("cdelta prints the closed form") {
  const Run r = cli({"cdelta", "--delta", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(std::stod(r.out) == doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  CHECK(cli({"cdelta", "--delta", "1.5"}).code == 2);
}

TEST_CASE("deconv writes result, CSVs and manifest, independent of the thread count") {
  const fs::path dir = scratch("deconv");
  write_file(dir / "run.json", R"({"model": "perturbed", "d": 5, "rho": 2, "epsilon": 0.05,
      "tail_radius": 4, "seed": 3, "R": 8, "M": 32, "annulus": [2, 4]})");
  const Run r1 = cli({"--threads", "1", "deconv", "--config", (dir / "run.json").string(), "--out-dir",
                      (dir / "t1").string()});
  const Run r4 = cli({"--threads", "4", "deconv", "--config", (dir / "run.json").string(), "--out-dir",
                      (dir / "t4").string()});
  REQUIRE(r1.code == 0);
  REQUIRE(r4.code == 0);
  for (const char* f : {"result.json", "G.csv", "f.csv", "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / "t1" / f));
    CHECK(slurp(dir / "t1" / f) == slurp(dir / "t4" / f));
  }
  const json res = json::parse(slurp(dir / "t1" / "result.json"));
  CHECK(res["constants"]["critical"] == true);
  CHECK(res["torus_residual"]["sup"].get<double>() < 1e-12);
  CHECK(res["assumptions"]["pass"] == true);
  const json m = json::parse(slurp(dir / "t1" / "manifest.json"));
  CHECK(m["outputs"] == json::array({"result.json", "G.csv", "f.csv"}));
  CHECK(m["box"] == 8);
}

TEST_CASE("deconv range gate") {
  const fs::path dir = scratch("gate");
  write_file(dir / "run.json", R"({"model": "perturbed", "d": 12, "rho": 0.1, "epsilon": 0.01,
      "tail_radius": 2, "R": 2, "M": 8})");
  CHECK(cli({"deconv", "--config", (dir / "run.json").string(), "--out-dir", dir.string()}).code == 2);
  CHECK(cli({"deconv", "--config", (dir / "missing.json").string()}).code == 2);
  write_file(dir / "broken.json", "{");
  CHECK(cli({"deconv", "--config", (dir / "broken.json").string()}).code == 2);
}

TEST_CASE("fracnorm and verify-assumptions") {
  const fs::path dir = scratch("frac");
  write_file(dir / "m.json", R"({"model": "perturbed", "d": 5, "rho": 2, "epsilon": 0.05, "tail_radius": 4})");
  const Run r = cli({"fracnorm", "--model", (dir / "m.json").string(), "--alpha", "1,0,0,0,0", "--grid", "32"});
  REQUIRE(r.code == 0);
  std::istringstream csv(r.out);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "u,norm,ratio");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 5);  // u = 2 pi j / 32 up to 1
  CHECK(cli({"fracnorm", "--model", (dir / "m.json").string(), "--alpha", "1,0"}).code == 2);
  CHECK(cli({"fracnorm", "--model", (dir / "m.json").string(), "--alpha", "0,1,0,0,0"}).code == 2);

  CHECK(cli({"verify-assumptions", "--model", (dir / "m.json").string()}).code == 0);
  write_file(dir / "bad.json", R"({"model": "perturbed", "d": 9, "rho": 0.4, "epsilon": 0.05, "tail_radius": 4})");
  const Run bad = cli({"verify-assumptions", "--model", (dir / "bad.json").string()});
  CHECK(bad.code == 2);
  CHECK(json::parse(bad.out)["pass"] == false);
}
