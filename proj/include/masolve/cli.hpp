#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "masolve/domain.hpp"
#include "masolve/measures.hpp"
#include "masolve/mesh.hpp"
#include "masolve/solver.hpp"
#include "masolve/verify.hpp"

namespace masolve::cli {

enum ExitCode : int {
  kOk = 0,
  kBadConfig = 1,
  kAssumptionViolation = 2,
  kToleranceFailure = 3,
};

struct StudyConfig {
  std::vector<int> n_boundary{16, 32, 64};
  std::vector<double> spacing;  // empty: 2 pi r / n per mesh
  double delta = 0.2;
  bool exact = true;  // compare with the radial exact solution
  int grid = 201;
};

struct VerifyConfig {
  long monte_carlo_samples = 1000000;
  double comparison_scale = 2.0;  // targets_high = scale * targets_low
};

struct ProblemConfig {
  ConvexDomain domain;
  SlopeDensity R = SlopeDensity::constant(1.0);
  SourceMeasure mu;
  int n_boundary = 32;
  double spacing = 0.2;
  SolveConfig solve;
  /// Profile with every field the config leaves out derived from the data.
  AssumptionProfile profile;
  std::vector<double> delta_schedule;
  StudyConfig study;
  VerifyConfig verify;
  std::uint64_t seed = 0;
};

/// Parses a JSON document. Throws ConfigError naming the offending field, or
/// the line and column of a syntax error. Relative paths (tabulated R) are
/// resolved against base_dir. Unknown fields are rejected.
ProblemConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ProblemConfig load_config(const std::string& path);

/// Runs one command and writes its artifacts into out_dir. Returns the exit
/// status; diagnostics go to `log`.
int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, std::ostream& log);

/// Writes `content` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

/// %.12e formatting used by every CSV.
std::string fmt(double v);

std::string mesh_vertices_csv(const Mesh& mesh);
std::string mesh_triangles_csv(const Mesh& mesh);
/// `vertex_id,x,y,height,active,cell_area`; boundary cell_area is inf.
std::string envelope_vertices_csv(const ConvexEnvelope& env);
std::string envelope_facets_csv(const ConvexEnvelope& env);
std::string convergence_csv(const ConvergenceTable& table);

/// Reads an envelope vertex CSV back into a height field for `mesh`.
HeightField read_vertex_heights(const std::string& csv_text, const Mesh& mesh);

}  // namespace masolve::cli
