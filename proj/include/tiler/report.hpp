#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tiler/boundary.hpp"
#include "tiler/graph_io.hpp"
#include "tiler/tiling.hpp"
#include "tiler/walk.hpp"

namespace tiler {

inline constexpr const char* kToolVersion = "tiler 0.1.0";

inline constexpr const char* kProfileSchema = "tiler-profile/1";
inline constexpr const char* kTilingSchema = "tiler-tiling/1";
inline constexpr const char* kStatsSchema = "tiler-stats/1";
inline constexpr const char* kSharpSchema = "tiler-sharp/1";
inline constexpr const char* kAuditSchema = "tiler-audit/1";
inline constexpr const char* kRenderSchema = "tiler-render/1";

/// Schemas this tool writes and reads back, graph included.
const std::vector<std::string>& known_schemas();

/// Throws InputError with a version diagnostic unless `schema` is one of ours.
void check_schema(const std::string& schema);

struct CsvRow {
  std::string identity;
  std::string key;
  double observed = 0.0;
  double expected = 0.0;
  double sigma = 0.0;
};

/// One pass/fail entry of a stats or audit report.
struct Finding {
  CriterionCheck check;
  std::uint64_t seed = 0;
  Json data = Json::object();
  std::vector<CsvRow> rows;

  bool passed() const { return check.status == CheckStatus::kPass; }
};

Finding make_finding(std::string name, bool passed, double value, double tolerance, std::string detail = {});

Json to_json(const ArcSet& a);
ArcSet arc_from_json(const Json& j);
Json to_json(const CriterionCheck& c);
Json to_json(const Finding& f);

Json profile_json(const PlanarGraph& g, const HarmonicProfile<double>& p);
Json audit_json(const TilingAudit& a);
Json tiling_json(const Tiling<double>& t, const TilingAudit& audit);
std::string tiling_csv(const Tiling<double>& t);

Json to_json(const ExitStats& s, const PlanarGraph& g);
Json to_json(const FluxStats& s, const PlanarGraph& g);
Json to_json(const MeridianStats& s, const PlanarGraph& g);
Json to_json(const TrajectoryStats& s);

Json to_json(const SharpFunction& s);
Json to_json(const SharpnessReport& r, const PlanarGraph& g);
Json to_json(const AdeReport& r, const PlanarGraph& g);
Json to_json(const AlternationReport& r);
Json to_json(const LevelSetDrift& d);
Json to_json(const FaithfulnessReport& r);
Json to_json(const LayeredReport& r);

Json findings_json(const std::vector<Finding>& findings);
std::string findings_csv(const std::vector<Finding>& findings);

/// {schema, tool, seed, config}; documents add "results".
Json artifact_header(std::string_view schema, std::uint64_t seed, const Json& config);
Json make_document(std::string_view schema, std::uint64_t seed, const Json& config, Json results);

/// CSV text preceded by '#'-comment lines carrying the header as JSON.
std::string with_csv_header(const Json& header, const std::string& body);
/// SVG text with the header in a <metadata> element after the opening tag.
std::string with_svg_header(const Json& header, const std::string& body);

/// Splits an artifact file into its header and the body that reproduction
/// compares: the dumped "results" for JSON, the table for CSV, the drawing
/// without metadata for SVG.
struct ParsedArtifact {
  std::string format;  // json | csv | svg
  Json header;
  std::string body;
};

ParsedArtifact parse_artifact(const std::string& text);

}  // namespace tiler
