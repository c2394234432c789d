#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dnmr/cli.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dnmr::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dnmr_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("no arguments prints usage and exits 2", "[cli]") {
  const auto r = run({});
  CHECK(r.code == 2);
  CHECK_THAT(r.out, ContainsSubstring("sensitivity"));
  CHECK_THAT(r.out, ContainsSubstring("figure"));
}

TEST_CASE("help and version exit 0", "[cli]") {
  CHECK(run({"--help"}).code == 0);
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK_THAT(v.out, ContainsSubstring(dnmr::cli::tool_version));
}

TEST_CASE("usage errors exit 2", "[cli]") {
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"figure", "9z"}).code == 2);
  CHECK(run({"figure"}).code == 2);
  CHECK(run({"sensitivity", "--threads", "many"}).code == 2);
  CHECK(run({"snr", "--system", "no_such_preset"}).code == 2);
}

TEST_CASE("a missing config is a runtime error naming the file", "[cli]") {
  const auto r = run({"sensitivity", "--config", "missing.cfg", "--out", fresh_dir("missing").string()});
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("file not found"));
  CHECK_THAT(r.err, ContainsSubstring("missing.cfg"));
}

TEST_CASE("an invalid config names the violated invariant", "[cli]") {
  const auto dir = fresh_dir("invalid");
  fs::create_directories(dir);
  dnmr::write_text(dir / "bad.cfg", "system = single_nv\nt2_echo_us = -1\n");
  const auto r = run({"sensitivity", "--config", (dir / "bad.cfg").string(), "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK_THAT(r.err, ContainsSubstring("t2_echo"));
}

TEST_CASE("figure 3a has a frequency column plus five systems over the default grid", "[cli]") {
  const auto dir = fresh_dir("fig3a");
  REQUIRE(run({"figure", "3a", "--out", dir.string(), "--threads", "2"}).code == 0);
  const auto lines = lines_of(slurp(dir / "fig3a.csv"));
  REQUIRE(lines.size() == 201);
  CHECK(lines[0] ==
        "frequency_hz,eta_vol_vb_gao_T_um1p5_per_rtHz,eta_vol_vb_aggregated_T_um1p5_per_rtHz,"
        "eta_vol_single_nv_T_um1p5_per_rtHz,eta_vol_shallow_nv_T_um1p5_per_rtHz,eta_vol_bulk_nv_T_um1p5_per_rtHz");
  CHECK(lines[1].rfind("1.00000000e+04,", 0) == 0);
  CHECK(lines[200].rfind("1.00000000e+08,", 0) == 0);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("the manifest records the run", "[cli]") {
  const auto dir = fresh_dir("manifest");
  REQUIRE(run({"geometry", "--out", dir.string(), "--seed", "7", "--threads", "1"}).code == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["subcommand"] == "geometry");
  CHECK(m["tool_version"] == dnmr::cli::tool_version);
  CHECK(m["seed"] == 7);
  CHECK(m["threads"] == 1);
  CHECK(m["wall_clock_s"].get<double>() >= 0.0);
  CHECK(m["config"].get<std::string>().find("system = vb_aggregated") != std::string::npos);
  REQUIRE(m["outputs"].size() == 1);
  CHECK(fs::path(m["outputs"][0].get<std::string>()).filename() == "geometry.csv");
}

TEST_CASE("re-running from the manifest snapshot reproduces outputs bit-exactly", "[cli]") {
  const auto first = fresh_dir("replay_a"), second = fresh_dir("replay_b");
  for (const char* sub : {"sensitivity", "snr", "lineshape"}) {
    REQUIRE(run({sub, "--system", "shallow_nv", "--out", first.string()}).code == 0);
    const auto m = nlohmann::json::parse(slurp(first / "manifest.json"));
    fs::create_directories(second);
    dnmr::write_text(second / "snapshot.cfg", m["config"].get<std::string>());
    REQUIRE(run({sub, "--config", (second / "snapshot.cfg").string(), "--out", second.string(), "--threads", "3"}).code == 0);
    for (const auto& out : m["outputs"]) {
      const auto name = fs::path(out.get<std::string>()).filename();
      CHECK(slurp(first / name) == slurp(second / name));
    }
  }
}

TEST_CASE("snr output columns", "[cli]") {
  const auto dir = fresh_dir("snr");
  REQUIRE(run({"snr", "--system", "single_nv", "--out", dir.string()}).code == 0);
  const auto lines = lines_of(slurp(dir / "snr.csv"));
  CHECK(lines[0] == "frequency_hz,eta,b_rms_T,snr,geometry,depth_m");
  CHECK(lines.size() == 201);
}

TEST_CASE("back-action subcommand writes a spectrum and summary", "[cli]") {
  const auto dir = fresh_dir("backaction");
  fs::create_directories(dir);
  dnmr::write_text(dir / "ba.cfg",
                   "system = single_nv\nbackaction_depth_nm = 2\nbackaction_sites = 20000\n");
  REQUIRE(run({"backaction", "--config", (dir / "ba.cfg").string(), "--out", dir.string()}).code == 0);
  CHECK(lines_of(slurp(dir / "backaction_spectrum.csv")).size() == 2002);
  CHECK(fs::exists(dir / "backaction_summary.csv"));
}

TEST_CASE("SVG plots are written only on request", "[cli]") {
  const auto plain = fresh_dir("nosvg"), plotted = fresh_dir("svg");
  REQUIRE(run({"figure", "s6", "--out", plain.string()}).code == 0);
  REQUIRE(run({"figure", "s6", "--out", plotted.string(), "--svg"}).code == 0);
  bool any_plain = false, any_plotted = false;
  for (const auto& e : fs::directory_iterator(plain)) any_plain = any_plain || e.path().extension() == ".svg";
  for (const auto& e : fs::directory_iterator(plotted)) any_plotted = any_plotted || e.path().extension() == ".svg";
  CHECK_FALSE(any_plain);
  CHECK(any_plotted);
}

TEST_CASE("the installed binary reports exit codes", "[cli]") {
  const std::string exe = DNMR_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status(exe) == 2);
  CHECK(status(exe + " --version") == 0);
  CHECK(status(exe + " sensitivity --config missing.cfg --out " + fresh_dir("bin").string()) == 1);
}
