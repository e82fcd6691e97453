#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "masolve/cli.hpp"
#include "masolve/envelope.hpp"
#include "masolve/errors.hpp"
#include "masolve/solver.hpp"

using namespace masolve;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("masolve_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const auto path = dir / "config.json";
  std::ofstream(path) << text;
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kDisk = R"({
  "domain": {"kind": "disk", "radius": 1.0},
  "boundary_data": {"kind": "constant", "value": 0.5},
  "slope_density": {"kind": "constant", "value": 1.0},
  "source": {"density": {"kind": "constant", "value": 1.0}},
  "mesh": {"n_boundary": 16, "spacing": 0.4},
  "solve": {"mass_tol": 1e-12, "bisection_tol": 1e-13},
  "delta_schedule": {"start": 0.4, "levels": 3},
  "verify": {"monte_carlo_samples": 100000},
  "seed": 5
})";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = cli::parse_config(kDisk);
  CHECK(cfg.n_boundary == 16);
  CHECK(cfg.solve.mass_tol == 1e-12);
  CHECK(cfg.delta_schedule.size() == 3);
  CHECK(cfg.seed == 5);
  CHECK(cfg.mu.density().value == 1.0);
  CHECK(cfg.profile.d == 2);
}

TEST_CASE("config diagnostics name the offending field") {
  try {
    cli::parse_config(R"({"domain": {"kind": "disk", "radius": 1.0, "radus": 2}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("config.domain.radus: unknown field") != std::string::npos);
  }
  try {
    cli::parse_config("{\n  \"domain\": {\"kind\": \"disk\",,}\n}");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::parse_config(R"({"domain": {"kind": "disk"}, "solve": {"sweep_order": "random"}})"),
                  ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"domain": {"kind": "disk", "radius": -1}})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"domain": {"kind": "disk"}, "delta_schedule": [0.1, 0.2]})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"domain": {"kind": "polygon", "vertices": [[0,0],[1,0],[0,1]]}})"),
                  DegenerateDomain);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  std::ostringstream log;
  CHECK(cli::run("solve", (dir / "missing.json").string(), (dir / "o").string(), {}, log) == cli::kBadConfig);
  CHECK(cli::run("bogus", write_config(dir, kDisk), (dir / "o").string(), {}, log) == cli::kBadConfig);
  const auto gap = write_config(dir, R"({"domain": {"kind": "disk"},
    "slope_density": {"kind": "gauss_curvature", "q": 2},
    "source": {"density": {"kind": "constant", "value": 1.0}}})");
  std::ostringstream gap_log;
  CHECK(cli::run("solve", gap, (dir / "o").string(), {}, gap_log) == cli::kAssumptionViolation);
  CHECK(gap_log.str().find("source mass is not below the total slope-density mass") != std::string::npos);
  const auto poly = write_config(dir, R"({"domain": {"kind": "polygon", "vertices": [[0,0],[1,0],[1,1],[0,1]]}})");
  CHECK(cli::run("solve", poly, (dir / "o").string(), {}, log) == cli::kAssumptionViolation);
  const auto stuck = write_config(dir, R"({"domain": {"kind": "disk"},
    "source": {"density": {"kind": "constant", "value": 1.0}},
    "mesh": {"n_boundary": 16, "spacing": 0.4}, "solve": {"max_sweeps": 1, "mass_tol": 1e-14}})");
  CHECK(cli::run("solve", stuck, (dir / "o").string(), {}, log) == cli::kToleranceFailure);
}

TEST_CASE("solve writes artifacts that round-trip") {
  const auto dir = scratch("solve");
  std::ostringstream log;
  const auto cfg = write_config(dir, kDisk);
  REQUIRE(cli::run("solve", cfg, (dir / "out").string(), {}, log) == cli::kOk);
  for (const char* f : {"report.json", "mesh_vertices.csv", "mesh_triangles.csv", "envelope_vertices.csv",
                        "envelope_facets.csv"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["converged"].get<bool>());
  const auto pc = cli::load_config(cfg);
  const Mesh mesh = build_mesh(pc.domain, pc.n_boundary, pc.spacing);
  const HeightField hf = cli::read_vertex_heights(slurp(dir / "out" / "envelope_vertices.csv"), mesh);
  const auto heights = report["heights"].get<std::vector<double>>();
  REQUIRE(heights.size() == hf.interior.size());
  for (std::size_t i = 0; i < heights.size(); ++i) CHECK(hf.interior[i] == doctest::Approx(heights[i]).epsilon(1e-11));
  CHECK(report["max_residual"].get<double>() <= report["mass_tol"].get<double>());
  // Reloaded heights reproduce the reported masses.
  const ConvexEnvelope env = build_envelope(mesh, hf);
  const auto masses = report["masses"].get<std::vector<double>>();
  REQUIRE(masses.size() == heights.size());
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const Integral m = vertex_mass(env, static_cast<int>(i), pc.R, pc.solve.quad);
    CHECK(std::abs(m.value - masses[i]) <= 1e-9);
  }
  const std::string verts = slurp(dir / "out" / "envelope_vertices.csv");
  CHECK(verts.rfind("vertex_id,x,y,height,active,cell_area\n", 0) == 0);
  CHECK(verts.find(",inf\n") != std::string::npos);
}

TEST_CASE("runs are byte-for-byte deterministic") {
  const auto dir = scratch("determinism");
  std::ostringstream log;
  const auto cfg = write_config(dir, kDisk);
  for (const char* cmd : {"solve", "solve-weak", "verify"}) {
    REQUIRE(cli::run(cmd, cfg, (dir / "a").string(), {}, log) == cli::kOk);
    REQUIRE(cli::run(cmd, cfg, (dir / "b").string(), {}, log) == cli::kOk);
  }
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
    ++compared;
  }
  CHECK(compared >= 10);
  // A different seed changes the Monte-Carlo estimate only.
  REQUIRE(cli::run("verify", cfg, (dir / "c").string(), 99, log) == cli::kOk);
  const auto vb = nlohmann::json::parse(slurp(dir / "b" / "verify.json"));
  const auto vc = nlohmann::json::parse(slurp(dir / "c" / "verify.json"));
  CHECK(vc["monte_carlo"]["seed"].get<int>() == 99);
  CHECK(vb["monte_carlo"]["estimate"] != vc["monte_carlo"]["estimate"]);
}

TEST_CASE("study writes one row per mesh with decreasing h") {
  const auto dir = scratch("study");
  std::ostringstream log;
  const auto cfg = write_config(dir, R"({
    "domain": {"kind": "disk"},
    "boundary_data": {"kind": "constant", "value": 0.5},
    "source": {"density": {"kind": "constant", "value": 1.0}},
    "solve": {"mass_tol": 1e-12, "bisection_tol": 1e-13},
    "study": {"n_boundary": [16, 32, 64], "delta": 0.2, "grid": 101}
  })");
  REQUIRE(cli::run("study", cfg, (dir / "out").string(), {}, log) == cli::kOk);
  std::istringstream csv(slurp(dir / "out" / "convergence.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "h,n_boundary,spacing,linf_error,border_gap,runtime_ms");
  std::vector<double> hs;
  while (std::getline(csv, line)) hs.push_back(std::stod(line.substr(0, line.find(','))));
  REQUIRE(hs.size() == 3);
  CHECK(hs[0] > hs[1]);
  CHECK(hs[1] > hs[2]);
  const auto js = nlohmann::json::parse(slurp(dir / "out" / "study.json"));
  CHECK(js["errors_decreasing"].get<bool>());
}
