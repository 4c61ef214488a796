#include "tiler/report.hpp"

#include <cstdio>
#include <sstream>

namespace tiler {

namespace {

std::string dart_name(const PlanarGraph& g, DartId d) { return g.label(g.tail(d)) + "->" + g.label(g.head(d)); }

Json labels(const PlanarGraph& g, std::span<const VertexId> vs) {
  Json out = Json::array();
  for (VertexId v : vs) out.push_back(v == kNoVertex ? std::string() : g.label(v));
  return out;
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

constexpr std::string_view kSvgMetaOpen = "<metadata><![CDATA[";
constexpr std::string_view kSvgMetaClose = "]]></metadata>\n";

}  // namespace

const std::vector<std::string>& known_schemas() {
  static const std::vector<std::string> schemas{kGraphSchema,  kProfileSchema, kTilingSchema, kStatsSchema,
                                                kSharpSchema, kAuditSchema,   kRenderSchema};
  return schemas;
}

void check_schema(const std::string& schema) {
  for (const auto& s : known_schemas()) {
    if (s == schema) return;
  }
  const auto slash = schema.rfind('/');
  const std::string family = schema.substr(0, slash);
  for (const auto& s : known_schemas()) {
    if (s.substr(0, s.rfind('/')) == family && slash != std::string::npos) {
      throw InputError("schema: version mismatch, report is \"" + schema + "\" but " + kToolVersion + " reads \"" +
                       s + "\"");
    }
  }
  throw InputError("schema: unknown schema \"" + schema + "\"");
}

Finding make_finding(std::string name, bool passed, double value, double tolerance, std::string detail) {
  Finding f;
  f.check.name = std::move(name);
  f.check.status = passed ? CheckStatus::kPass : CheckStatus::kFail;
  f.check.value = value;
  f.check.tolerance = tolerance;
  f.check.detail = std::move(detail);
  return f;
}

Json to_json(const ArcSet& a) {
  Json out = Json::array();
  for (auto [lo, hi] : a.pieces()) out.push_back(Json::array({lo, hi}));
  return out;
}

ArcSet arc_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("arc: expected an array of [start, end] pairs");
  ArcSet out;
  for (const Json& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw InputError("arc: expected [start, end] pairs of numbers");
    }
    out = out.unite(ArcSet::arc(p[0].get<double>(), p[1].get<double>()));
  }
  return out;
}

Json to_json(const CriterionCheck& c) {
  Json out;
  out["name"] = c.name;
  out["status"] = to_string(c.status);
  out["passed"] = c.status == CheckStatus::kPass;
  out["value"] = c.value;
  out["tolerance"] = c.tolerance;
  if (!c.detail.empty()) out["detail"] = c.detail;
  return out;
}

Json to_json(const Finding& f) {
  Json out = to_json(f.check);
  out["seed"] = f.seed;
  if (!f.data.empty()) out["data"] = f.data;
  return out;
}

Json profile_json(const PlanarGraph& g, const HarmonicProfile<double>& p) {
  Json out;
  out["root"] = g.label(g.root());
  Json h = Json::object();
  for (VertexId v = 0; v < g.num_vertices(); ++v) h[g.label(v)] = p.h[v];
  out["h"] = std::move(h);
  Json flow = Json::array();
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    flow.push_back({{"edge", g.edge(e).id}, {"u", g.label(g.edge(e).u)}, {"v", g.label(g.edge(e).v)},
                    {"flow", p.flow[forward_dart(e)]}});
  }
  out["flow"] = std::move(flow);
  out["eta"] = p.eta;
  out["scale"] = p.scale;
  out["residual"] = p.residual;
  out["max_interior_divergence"] = max_interior_divergence(p, g);
  out["energy"] = dirichlet_energy(p, g);
  return out;
}

Json audit_json(const TilingAudit& a) {
  Json out;
  out["passed"] = a.passed();
  out["tolerance"] = a.tolerance;
  out["max_aspect_deviation"] = a.max_aspect_deviation;
  out["total_area"] = a.total_area;
  out["energy"] = a.energy;
  out["max_band_sum_error"] = a.max_band_sum_error;
  out["max_overlap"] = a.max_overlap;
  out["max_gap"] = a.max_gap;
  out["bands"] = a.bands;
  out["tangency_failures"] = a.tangency_failures;
  out["max_kirchhoff"] = a.max_kirchhoff;
  out["max_cycle_defect"] = a.max_cycle_defect;
  out["degenerate"] = a.degenerate;
  out["squares"] = a.squares;
  out["rects"] = a.rects;
  out["checks"] = {{"aspect", a.aspect_ok},     {"area", a.area_ok},         {"energy", a.energy_ok},
                   {"overlap", a.overlap_ok},   {"coverage", a.coverage_ok}, {"tangency", a.tangency_ok},
                   {"kirchhoff", a.kirchhoff_ok}};
  Json bands = Json::array();
  for (const auto& b : a.vertex_width_bands) {
    bands.push_back({{"band", b.band}, {"max_width", b.max_width}, {"vertices", b.vertices}});
  }
  out["vertex_width_bands"] = std::move(bands);
  return out;
}

Json tiling_json(const Tiling<double>& t, const TilingAudit& audit) {
  const PlanarGraph& g = *t.graph;
  Json out;
  out["zeta"] = t.zeta;
  out["max_cycle_defect"] = t.max_cycle_defect;
  Json rects = Json::array();
  for (EdgeId e = 0; e < static_cast<EdgeId>(t.rects.size()); ++e) {
    const auto& r = t.rects[e];
    rects.push_back({{"edge", g.edge(e).id},
                     {"u", g.label(g.edge(e).u)},
                     {"v", g.label(g.edge(e).v)},
                     {"w_start", r.w_start},
                     {"width", r.width},
                     {"h_low", r.h_low},
                     {"h_high", r.h_high},
                     {"degenerate", r.degenerate}});
  }
  out["rects"] = std::move(rects);
  Json intervals = Json::array();
  for (VertexId v = 0; v < static_cast<VertexId>(t.intervals.size()); ++v) {
    const auto& iv = t.intervals[v];
    intervals.push_back({{"vertex", g.label(v)},
                         {"w_start", iv.w_start},
                         {"width", iv.width},
                         {"height", iv.height},
                         {"full_circle", iv.full_circle}});
  }
  out["intervals"] = std::move(intervals);
  out["audit"] = audit_json(audit);
  return out;
}

std::string tiling_csv(const Tiling<double>& t) {
  const PlanarGraph& g = *t.graph;
  std::ostringstream out;
  out << "edge,u,v,w_start,width,h_low,h_high,degenerate\n";
  for (EdgeId e = 0; e < static_cast<EdgeId>(t.rects.size()); ++e) {
    const auto& r = t.rects[e];
    out << csv_field(g.edge(e).id) << ',' << csv_field(g.label(g.edge(e).u)) << ','
        << csv_field(g.label(g.edge(e).v)) << ',' << number(r.w_start) << ',' << number(r.width) << ','
        << number(r.h_low) << ',' << number(r.h_high) << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
  return out.str();
}

Json to_json(const ExitStats& s, const PlanarGraph& g) {
  Json out;
  out["trials"] = s.trials;
  out["completed"] = s.completed;
  out["censored"] = s.censored;
  out["missed"] = s.missed;
  out["steps"] = s.steps;
  out["atoms"] = labels(g, s.atoms);
  out["counts"] = s.counts;
  out["expected"] = s.expected;
  out["tv"] = s.tv;
  out["tv_bound"] = s.tv_bound;
  return out;
}

Json to_json(const FluxStats& s, const PlanarGraph& g) {
  Json out;
  out["trials"] = s.trials;
  out["completed"] = s.completed;
  out["censored"] = s.censored;
  out["interior_subwalks"] = s.interior_subwalks;
  Json darts = Json::array();
  for (std::size_t i = 0; i < s.darts.size(); ++i) {
    Json d;
    d["dart"] = dart_name(g, s.darts[i]);
    d["total_mean"] = s.mean(s.total[i]);
    d["total_sigma"] = s.sigma(s.total[i], s.total_sq[i]);
    if (i < s.expected.size()) d["flow"] = s.expected[i];
    d["interior_mean"] = s.mean(s.interior[i]);
    d["interior_sigma"] = s.sigma(s.interior[i], s.interior_sq[i]);
    darts.push_back(std::move(d));
  }
  out["darts"] = std::move(darts);
  return out;
}

Json to_json(const MeridianStats& s, const PlanarGraph& g) {
  Json out;
  out["meridian"] = s.meridian;
  out["trials"] = s.trials;
  out["completed"] = s.completed;
  out["censored"] = s.censored;
  Json spans = Json::array();
  for (std::size_t i = 0; i < s.vertices.size(); ++i) {
    spans.push_back({{"vertex", g.label(s.vertices[i])},
                     {"left_to_right", s.left_to_right[i]},
                     {"right_to_left", s.right_to_left[i]},
                     {"sigma", s.sigma(i)}});
  }
  out["spans"] = std::move(spans);
  out["net_total"] = s.net_total;
  out["sigma_total"] = s.sigma_total();
  return out;
}

Json to_json(const TrajectoryStats& s) {
  Json out;
  out["trials"] = s.trials;
  out["completed"] = s.completed;
  out["censored"] = s.censored;
  out["mean_diameter"] = s.mean_diameter();
  Json pairs = Json::array();
  for (std::size_t p = 0; p < s.meridian_pairs.size(); ++p) {
    pairs.push_back({{"meridians", {s.meridian_pairs[p].first, s.meridian_pairs[p].second}},
                     {"mean_alternations", s.mean_alternations(p)},
                     {"sigma", s.alternation_sigma(p)}});
  }
  out["alternations"] = std::move(pairs);
  Json heights = Json::array();
  for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
    heights.push_back({{"step", s.checkpoints[k]}, {"mean_h", s.mean_height(k)}, {"sigma", s.height_sigma(k)}});
  }
  out["height"] = std::move(heights);
  return out;
}

Json to_json(const SharpFunction& s) {
  const PlanarGraph& g = *s.graph;
  Json out;
  out["expression"] = s.expression;
  out["arc"] = to_json(s.arc);
  out["measure"] = s.arc.measure();
  out["root_value"] = s.values.empty() ? 0.0 : s.values[g.root()];
  out["probes"] = labels(g, s.probes);
  out["levels"] = s.levels;
  Json rows = Json::array();
  for (const auto& r : s.probe_values) {
    Json row = Json::array();
    for (double x : r) row.push_back(x);
    rows.push_back(std::move(row));
  }
  out["probe_values"] = std::move(rows);
  out["gap"] = s.gap;
  out["converged"] = s.converged;
  out["harmonic_residual"] = s.harmonic_residual;
  return out;
}

Json to_json(const SharpnessReport& r, const PlanarGraph& g) {
  Json out;
  out["start"] = g.label(r.start);
  out["value"] = r.value;
  out["trials"] = r.trials;
  out["completed"] = r.completed;
  out["censored"] = r.censored;
  out["limit_one"] = r.fraction(r.one);
  out["limit_zero"] = r.fraction(r.zero);
  out["middle"] = r.fraction(r.middle);
  out["path_window"] = {{"one", r.fraction(r.path_one)},
                        {"zero", r.fraction(r.path_zero)},
                        {"middle", r.fraction(r.path_middle)}};
  out["value_ok"] = r.value_ok();
  out["sharp_ok"] = r.sharp_ok();
  return out;
}

Json to_json(const AdeReport& r, const PlanarGraph& g) {
  Json out;
  out["side"] = r.upper ? "upper" : "lower";
  out["epsilon"] = r.epsilon;
  out["delta"] = r.delta;
  out["start"] = r.start == kNoVertex ? std::string() : g.label(r.start);
  out["start_value"] = r.start_value;
  out["completed"] = r.completed;
  out["censored"] = r.censored;
  out["rate"] = r.rate();
  out["sigma"] = r.sigma();
  out["bound"] = r.bound();
  return out;
}

Json to_json(const AlternationReport& r) {
  Json out;
  out["r"] = r.r;
  out["completed"] = r.completed;
  out["censored"] = r.censored;
  Json ks = Json::array();
  for (int k = 1; k <= static_cast<int>(r.at_least.size()); ++k) {
    ks.push_back({{"k", k}, {"rate", r.rate(k)}, {"sigma", r.sigma(k)}, {"envelope", r.envelope(k)}});
  }
  out["alternations"] = std::move(ks);
  return out;
}

Json to_json(const LevelSetDrift& d) {
  Json out;
  Json levels = Json::array();
  for (const auto& l : d.levels) {
    levels.push_back({{"level", l.level}, {"upper", l.upper.measure()}, {"f_minus_x", l.f_minus_x}});
  }
  out["levels"] = std::move(levels);
  Json steps = Json::array();
  for (const auto& s : d.steps) {
    steps.push_back({{"m", s.m}, {"n", s.n}, {"symmetric_difference", s.symmetric_difference},
                     {"impurity", s.impurity}});
  }
  out["steps"] = std::move(steps);
  out["to_deepest"] = d.to_deepest;
  out["terminal"] = d.terminal;
  out["monotone"] = d.monotone;
  out["sufficient"] = d.sufficient;
  return out;
}

Json to_json(const FaithfulnessReport& r) {
  Json out;
  out["estimate"] = to_json(r.estimate);
  out["completed"] = r.completed;
  out["censored"] = r.censored;
  out["mismatches"] = r.mismatches;
  out["rate"] = r.rate();
  out["sigma"] = r.sigma();
  return out;
}

Json to_json(const LayeredReport& r) {
  Json out = Json::array();
  for (const auto& c : r.checks) out.push_back(to_json(c));
  return out;
}

Json findings_json(const std::vector<Finding>& findings) {
  Json out;
  Json checks = Json::array();
  bool all = true;
  for (const auto& f : findings) {
    checks.push_back(to_json(f));
    all = all && f.passed();
  }
  out["passed"] = all;
  out["checks"] = std::move(checks);
  return out;
}

std::string findings_csv(const std::vector<Finding>& findings) {
  std::ostringstream out;
  out << "identity,key,observed,expected,sigma\n";
  for (const auto& f : findings) {
    out << csv_field(f.check.name) << ",status," << (f.passed() ? 1 : 0) << ",1,0\n";
    for (const auto& r : f.rows) {
      out << csv_field(r.identity.empty() ? f.check.name : r.identity) << ',' << csv_field(r.key) << ','
          << number(r.observed) << ',' << number(r.expected) << ',' << number(r.sigma) << '\n';
    }
  }
  return out.str();
}

Json artifact_header(std::string_view schema, std::uint64_t seed, const Json& config) {
  Json out;
  out["schema"] = schema;
  out["tool"] = kToolVersion;
  out["seed"] = seed;
  out["config"] = config;
  return out;
}

Json make_document(std::string_view schema, std::uint64_t seed, const Json& config, Json results) {
  Json out = artifact_header(schema, seed, config);
  out["results"] = std::move(results);
  return out;
}

std::string with_csv_header(const Json& header, const std::string& body) {
  return "# " + header.dump() + "\n" + body;
}

std::string with_svg_header(const Json& header, const std::string& body) {
  const auto close = body.find(">\n");
  if (close == std::string::npos) throw InputError("svg: no opening tag");
  return body.substr(0, close + 2) + std::string(kSvgMetaOpen) + header.dump() + std::string(kSvgMetaClose) +
         body.substr(close + 2);
}

ParsedArtifact parse_artifact(const std::string& text) {
  ParsedArtifact out;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw InputError("report: empty file");
  auto parse_header = [](const std::string& s) {
    Json j = Json::parse(s, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw InputError("report: header is not a JSON object");
    return j;
  };
  if (text[first] == '{') {
    out.format = "json";
    Json doc = parse_header(text);
    if (!doc.contains("results")) throw InputError("results: required field is missing");
    out.body = doc["results"].dump();
    doc.erase("results");
    out.header = std::move(doc);
  } else if (text[first] == '#') {
    out.format = "csv";
    const auto eol = text.find('\n', first);
    if (eol == std::string::npos) throw InputError("report: CSV header line has no table after it");
    out.header = parse_header(text.substr(first + 1, eol - first - 1));
    out.body = text.substr(eol + 1);
  } else if (text[first] == '<') {
    out.format = "svg";
    const auto open = text.find(kSvgMetaOpen);
    const auto close = text.find(kSvgMetaClose);
    if (open == std::string::npos || close == std::string::npos || close < open) {
      throw InputError("config: SVG carries no metadata");
    }
    out.header = parse_header(text.substr(open + kSvgMetaOpen.size(), close - open - kSvgMetaOpen.size()));
    out.body = text.substr(0, open) + text.substr(close + kSvgMetaClose.size());
  } else {
    throw InputError("report: unrecognized format");
  }
  if (!out.header.contains("schema") || !out.header["schema"].is_string()) {
    throw InputError("schema: required field is missing");
  }
  return out;
}

}  // namespace tiler
