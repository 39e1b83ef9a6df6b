#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(RICCIFLOW_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe))
    res.output.append(buf, n);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "ricciflow_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ','))
    out.push_back(f);
  if (!line.empty() && line.back() == ',')
    out.push_back("");
  return out;
}

} // namespace

TEST_CASE("simulate writes a trajectory and a summary") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "su2.csv";
  const fs::path sum = dir / "su2.json";
  const CliResult res = run_cli("simulate --class su2 --initial 2,1.6,1.25 --out " +
                                csv.string() + " --summary " + sum.string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("su2") != std::string::npos);
  CHECK(res.output.find("BlowupCeiling") != std::string::npos);

  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == "t,A,B,C,K23,K31,K12,R,product_drift");
  const auto first = fields_of(rows[1]);
  REQUIRE(first.size() == 9);
  CHECK(first[0] == "0");
  CHECK(std::stod(first[1]) == 2.0);
  CHECK(std::stod(first[2]) == 1.6);
  CHECK(std::stod(first[3]) == 1.25);

  const json j = json::parse(slurp(sum));
  CHECK(j.at("schema") == 1);
  CHECK(j.at("class") == "su2");
  CHECK(j.at("direction") == "positive");
  CHECK(j.at("case") == "generic");
  CHECK(j.at("terminal") == "BlowupCeiling");
  CHECK(j.at("lambda").get<double>() == Catch::Approx(1.0));
  CHECK(j.at("permutation") == json::array({0, 1, 2}));
  CHECK(j.at("t_plus").get<double>() == Catch::Approx(0.181758294).margin(1e-7));
  CHECK(j.at("exponents").at("A").get<double>() == Catch::Approx(-0.5).margin(2e-3));
  CHECK(j.at("exponents").at("B").get<double>() == Catch::Approx(0.25).margin(2e-3));
  CHECK(j.at("eta").at("eta1").get<double>() == Catch::Approx(2.8360).margin(3e-3));
  CHECK(j.at("invariants_pass") == true);
  CHECK_FALSE(j.contains("sl2r_label"));
}

TEST_CASE("simulate output is deterministic") {
  const fs::path dir = work_dir();
  const std::string base = "simulate --class sl2r --initial 2,2,1 ";
  const fs::path a = dir / "det_a.json", b = dir / "det_b.json";
  REQUIRE(run_cli(base + "--summary " + a.string()).exit_code == 0);
  REQUIRE(run_cli(base + "--summary " + b.string()).exit_code == 0);
  CHECK(slurp(a) == slurp(b));
  const json j = json::parse(slurp(a));
  CHECK(j.at("sl2r_label") == "Q1");
  CHECK(j.at("case") == "q1");
}

TEST_CASE("canonicalization is reported for permuted input") {
  const fs::path dir = work_dir();
  const fs::path sum = dir / "perm.json";
  const CliResult res =
      run_cli("simulate --class su2 --initial 1.25,1.6,2 --summary " + sum.string());
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(slurp(sum));
  CHECK(j.at("permutation") == json::array({2, 1, 0}));
  CHECK(j.at("initial") == json::array({1.25, 1.6, 2.0}));
  const fs::path strict = dir / "perm2.json";
  const CliResult res2 =
      run_cli("simulate --class su2 --initial 1.25,1.6,2 --no-swap --summary " + strict.string());
  CHECK(res2.exit_code == 2);
}

TEST_CASE("verify passes and the sign-flip hook breaks it") {
  const CliResult good = run_cli("verify");
  INFO(good.output);
  CHECK(good.exit_code == 0);
  CHECK(good.output.find("rhs matches curvature assembly") != std::string::npos);
  CHECK(good.output.find("verification passed") != std::string::npos);

  const CliResult bad = run_cli("verify --negate-rhs");
  INFO(bad.output);
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("FAILED") != std::string::npos);
}

TEST_CASE("classify grid labels a family of starts") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "grid.csv";
  const CliResult res = run_cli("classify --grid 2,2,1:0.5,4,2:3 --out " + csv.string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "A0,B0,C0,label,trigger_time,margin");
  const auto r0 = fields_of(rows[1]);
  const auto r1 = fields_of(rows[2]);
  const auto r2 = fields_of(rows[3]);
  REQUIRE(r0.size() == 6);
  CHECK(std::stod(r0[0]) == 2.0);
  CHECK(r0[3] == "Q1");
  CHECK(r1[3] == "Q2");
  CHECK(r2[3] == "Q2");
  CHECK(std::stod(r0[4]) == 0.0);
  CHECK(std::stod(r0[5]) > 0.0);
}

TEST_CASE("classify bisect reports a narrow bracket") {
  const fs::path dir = work_dir();
  const fs::path sum = dir / "bisect.json";
  const CliResult res =
      run_cli("classify --bisect 0.5,4,2:2,2,1:1e-4 --summary " + sum.string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(slurp(sum));
  CHECK(j.at("label_lo") == "Q2");
  CHECK(j.at("label_hi") == "Q1");
  const double lo = j.at("x_lo").get<double>();
  const double hi = j.at("x_hi").get<double>();
  CHECK(hi - lo <= 1e-4);
  CHECK(lo <= 1.6388462);
  CHECK(hi >= 1.6388461);
  REQUIRE(j.at("initial_lo").is_array());
  CHECK(j.at("initial_lo").size() == 3);
}

TEST_CASE("sweep covers a grid and reports laws per point") {
  const fs::path dir = work_dir();
  const fs::path csv = dir / "sweep.csv";
  const CliResult res =
      run_cli("sweep --class su2 --grid A=1.8:2.2:2,B=1.5:1.7:2 --out " + csv.string());
  INFO(res.output);
  REQUIRE(res.exit_code == 0);
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] ==
        "A0,B0,C0,case,terminal,t_plus,exp_A,exp_B,exp_C,pre_A,pre_B,pre_C,eta1,eta2,"
        "sl2r_label,error");
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields_of(rows[i]);
    REQUIRE(f.size() == 16);
    CHECK(f[3] == "generic");
    CHECK(f[4] == "BlowupCeiling");
    CHECK(std::stod(f[5]) > 0.0);
    CHECK(std::stod(f[6]) == Catch::Approx(-0.5).margin(0.01));
    CHECK(f[14].empty());
    CHECK(f[15].empty());
  }
}

TEST_CASE("config files feed defaults that flags override") {
  const fs::path dir = work_dir();
  const fs::path cfg = dir / "run.json";
  {
    std::ofstream out(cfg);
    out << R"({"class":"nil","direction":"forward","initial":[1,2,2],"horizon":0.2})" << "\n";
  }
  const fs::path a = dir / "cfg_a.csv";
  const CliResult r1 = run_cli("simulate --config " + cfg.string() + " --out " + a.string());
  INFO(r1.output);
  REQUIRE(r1.exit_code == 0);
  const auto rows_a = lines_of(slurp(a));
  CHECK(std::stod(fields_of(rows_a.back())[0]) == Catch::Approx(0.2).margin(1e-12));

  const fs::path b = dir / "cfg_b.csv";
  const CliResult r2 = run_cli("simulate --config " + cfg.string() + " --horizon 0.1 --out " +
                               b.string());
  REQUIRE(r2.exit_code == 0);
  const auto rows_b = lines_of(slurp(b));
  CHECK(std::stod(fields_of(rows_b.back())[0]) == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("bad invocations exit with the usage code") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("simulate --class what --initial 1,2,2").exit_code == 2);
  CHECK(run_cli("simulate --class su2").exit_code == 2);
  CHECK(run_cli("simulate --class su2 --initial 2,-1,2").exit_code == 2);
  CHECK(run_cli("sweep --class su2 --grid A=1:2:2,A=1:2:2").exit_code == 2);

  const fs::path dir = work_dir();
  const fs::path cfg = dir / "bad.json";
  {
    std::ofstream out(cfg);
    out << R"({"klass":"su2"})" << "\n";
  }
  CHECK(run_cli("simulate --config " + cfg.string()).exit_code == 2);
}
