#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tiler/graph.hpp"

namespace tiler {

using Json = nlohmann::ordered_json;

inline constexpr const char* kGraphSchema = "tiler-graph/1";

/// Parses a "tiler-graph/1" document. Rotation entries name edges by id; the
/// dart meant is the one leaving the listed vertex ("id+"/"id-" pick the
/// forward/backward dart explicitly, which loops require).
PlanarGraph graph_from_json(const Json& doc);
Json graph_to_json(const PlanarGraph& g);

PlanarGraph read_graph_file(const std::filesystem::path& path);

/// Reads a whole file; InputError names the path on failure.
std::string read_text_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tiler
