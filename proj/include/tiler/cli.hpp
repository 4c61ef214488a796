#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tiler/generators.hpp"
#include "tiler/report.hpp"
#include "tiler/suite.hpp"
#include "tiler/svg.hpp"

namespace tiler {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitAuditFailed = 2 };

struct RunConfig {
  std::string command;  // tile | verify | walk | boundary | render
  std::string input;    // graph file; empty selects the built-in family
  FamilySpec family;
  std::uint64_t seed = 1;
  std::int64_t trials = 100000;
  std::int64_t step_cap = 1000000;
  Tolerances tol;
  double level = 0.0;
  int max_atoms = 64;
  int flux_darts = 10;
  int meridians = 5;
  int arcs = 8;
  std::int64_t alternation_cap = 400;
  std::vector<std::pair<double, double>> sharp_arcs;
  bool exact = false;  // also tile and audit with rational arithmetic
  bool verify_tiling = true, verify_walk = true, verify_boundary = true;
  SvgOptions svg;
  std::string format = "json";  // json | csv | svg
  std::string render;           // extra SVG path written by `tile`

  // Not part of the echo: they do not change any result.
  std::filesystem::path out = ".";
  int threads = 0;

  void validate() const;
};

Json config_to_json(const RunConfig& c);
RunConfig config_from_json(const Json& j);

struct Artifact {
  std::string name;  // file name under the output directory, or a path
  std::string schema;
  std::string format;
  std::string body;  // what reproduction compares
  std::string text;  // the file contents
};

struct RunResult {
  std::vector<Artifact> artifacts;
  std::vector<Finding> findings;
  bool passed() const { return all_passed(findings); }
};

/// Runs one command in memory. Throws InputError / SolverError.
RunResult execute(const RunConfig& c);

/// Runs, writes the artifacts and prints one line per finding.
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

/// Re-runs the configuration embedded in an artifact and compares bodies.
int reproduce(const std::filesystem::path& report, int threads, std::ostream& out, std::ostream& err);

/// argv[0] is the program name.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tiler
