#include "tiler/graph_io.hpp"

#include <fstream>
#include <sstream>

namespace tiler {

namespace {

std::string vertex_key(const Json& v, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InputError(field + ": vertex ids must be strings or integers");
}

const Json& require(const Json& doc, const char* key, const std::string& prefix = "") {
  auto it = doc.find(key);
  if (it == doc.end()) throw InputError(prefix + key + ": required field is missing");
  return *it;
}

}  // namespace

PlanarGraph graph_from_json(const Json& doc) {
  if (!doc.is_object()) throw InputError("document: expected a JSON object");
  if (auto it = doc.find("schema"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>() != kGraphSchema) {
      throw InputError("schema: expected \"" + std::string(kGraphSchema) + "\", got " + it->dump());
    }
  }
  GraphBuilder b;
  std::unordered_map<std::string, VertexId> vertex;
  const Json& vertices = require(doc, "vertices");
  if (!vertices.is_array() || vertices.empty()) throw InputError("vertices: expected a non-empty array");
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const std::string key = vertex_key(vertices[i], "vertices[" + std::to_string(i) + "]");
    if (vertex.count(key)) throw InputError("vertices[" + std::to_string(i) + "]: duplicate vertex id '" + key + "'");
    vertex.emplace(key, b.add_vertex(key));
  }
  auto lookup = [&](const Json& v, const std::string& field) {
    const std::string key = vertex_key(v, field);
    auto it = vertex.find(key);
    if (it == vertex.end()) throw InputError(field + ": unknown vertex '" + key + "'");
    return it->second;
  };

  const Json& edges = require(doc, "edges");
  if (!edges.is_array()) throw InputError("edges: expected an array");
  std::unordered_map<std::string, EdgeId> edge_id;
  std::vector<std::pair<VertexId, VertexId>> ends;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string field = "edges[" + std::to_string(i) + "]";
    const Json& e = edges[i];
    if (!e.is_object()) throw InputError(field + ": expected an object");
    std::string id = e.contains("id") ? vertex_key(e["id"], field + ".id") : std::to_string(i);
    if (edge_id.count(id)) throw InputError(field + ".id: duplicate edge id '" + id + "'");
    const VertexId u = lookup(require(e, "u", field + "."), field + ".u");
    const VertexId v = lookup(require(e, "v", field + "."), field + ".v");
    double c = 1.0;
    if (e.contains("conductance")) {
      if (!e["conductance"].is_number()) throw InputError(field + ".conductance: expected a number");
      c = e["conductance"].get<double>();
    }
    if (!(c > 0.0)) {
      throw InputError(field + ".conductance: must be positive, got " + e["conductance"].dump());
    }
    EdgeId k;
    if (e.contains("conductance_exact")) {
      Rational q;
      try {
        q = Rational(e["conductance_exact"].get<std::string>());
        q.canonicalize();
      } catch (const std::exception&) {
        throw InputError(field + ".conductance_exact: expected a rational \"p/q\"");
      }
      if (q <= 0) throw InputError(field + ".conductance_exact: must be positive");
      k = b.add_edge_exact(u, v, q, id);
    } else {
      k = b.add_edge(u, v, c, id);
    }
    edge_id.emplace(id, k);
    ends.emplace_back(u, v);
  }

  if (auto it = doc.find("rotation"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw InputError("rotation: expected an object keyed by vertex id");
    for (const auto& [key, list] : it->items()) {
      const std::string field = "rotation[" + key + "]";
      auto vit = vertex.find(key);
      if (vit == vertex.end()) throw InputError(field + ": unknown vertex '" + key + "'");
      const VertexId x = vit->second;
      if (!list.is_array()) throw InputError(field + ": expected an array of dart ids");
      std::vector<DartId> darts;
      for (const Json& entry : list) {
        std::string name = vertex_key(entry, field);
        int direction = 0;
        if (!edge_id.count(name) && !name.empty() && (name.back() == '+' || name.back() == '-')) {
          direction = name.back() == '+' ? 1 : -1;
          name.pop_back();
        }
        auto eit = edge_id.find(name);
        if (eit == edge_id.end()) throw InputError(field + ": unknown dart '" + vertex_key(entry, field) + "'");
        const EdgeId e = eit->second;
        const auto [u, v] = ends[e];
        DartId d;
        if (direction > 0) {
          d = forward_dart(e);
        } else if (direction < 0) {
          d = backward_dart(e);
        } else if (u == x) {
          d = forward_dart(e);
        } else if (v == x) {
          d = backward_dart(e);
        } else {
          throw InputError(field + ": edge '" + name + "' is not incident to the vertex");
        }
        if ((d == forward_dart(e) ? u : v) != x) {
          throw InputError(field + ": dart '" + vertex_key(entry, field) + "' does not leave the vertex");
        }
        darts.push_back(d);
      }
      b.set_rotation(x, std::move(darts));
    }
  }

  b.set_root(lookup(require(doc, "root"), "root"));
  if (auto it = doc.find("sinks"); it != doc.end()) {
    if (!it->is_array()) throw InputError("sinks: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      b.add_sink(lookup((*it)[i], "sinks[" + std::to_string(i) + "]"));
    }
  }
  if (auto it = doc.find("kind"); it != doc.end()) {
    const std::string kind = it->is_string() ? it->get<std::string>() : "";
    if (kind == "finite-with-sinks") {
      b.set_kind(GraphKind::kFiniteWithSinks);
    } else if (kind == "exhaustion-level") {
      b.set_kind(GraphKind::kExhaustionLevel);
    } else {
      throw InputError("kind: expected \"finite-with-sinks\" or \"exhaustion-level\"");
    }
  }
  return std::move(b).build();
}

Json graph_to_json(const PlanarGraph& g) {
  Json doc;
  doc["schema"] = kGraphSchema;
  Json vertices = Json::array();
  for (VertexId v = 0; v < g.num_vertices(); ++v) vertices.push_back(g.label(v));
  doc["vertices"] = std::move(vertices);
  Json edges = Json::array();
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    Json entry{{"id", edge.id}, {"u", g.label(edge.u)}, {"v", g.label(edge.v)}, {"conductance", edge.conductance}};
    const Rational exact = g.exact_conductance(e);
    if (exact != Rational(edge.conductance)) entry["conductance_exact"] = exact.get_str();
    edges.push_back(std::move(entry));
  }
  doc["edges"] = std::move(edges);
  Json rotation = Json::object();
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    Json list = Json::array();
    for (DartId d : g.rotation(v)) {
      const Edge& edge = g.edge(edge_of(d));
      if (edge.u == edge.v) {
        list.push_back(edge.id + ((d & 1) ? "-" : "+"));
      } else {
        list.push_back(edge.id);
      }
    }
    rotation[g.label(v)] = std::move(list);
  }
  doc["rotation"] = std::move(rotation);
  doc["root"] = g.label(g.root());
  Json sinks = Json::array();
  for (VertexId s : g.sinks()) sinks.push_back(g.label(s));
  doc["sinks"] = std::move(sinks);
  doc["kind"] = g.kind() == GraphKind::kFiniteWithSinks ? "finite-with-sinks" : "exhaustion-level";
  return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": not valid JSON (" + e.what() + ")");
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write file");
  out << text;
}

PlanarGraph read_graph_file(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return graph_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace tiler
