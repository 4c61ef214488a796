#include "tiler/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tiler/graph_io.hpp"

namespace tiler {

namespace {

const char* const kCommands[] = {"tile", "verify", "walk", "boundary", "render"};

template <class T>
T field(const Json& j, const char* key, const T& fallback, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw InputError(path + "." + key + ": unexpected type " + std::string(it->type_name()));
  }
}

Json tolerances_json(const Tolerances& t) {
  return {{"solver", t.solver},           {"geometry", t.geometry},
          {"tv", t.tv},                   {"sigma", t.sigma},
          {"arc_mass", t.arc_mass},       {"diameter", t.diameter},
          {"sharp_value", t.sharp_value}, {"middle", t.middle},
          {"convergence", t.convergence}, {"drift", t.drift},
          {"faithfulness", t.faithfulness}, {"censor", t.censor}};
}

double* tolerance_slot(Tolerances& t, const std::string& key) {
  if (key == "solver") return &t.solver;
  if (key == "geometry") return &t.geometry;
  if (key == "tv") return &t.tv;
  if (key == "sigma") return &t.sigma;
  if (key == "arc_mass" || key == "arc-mass") return &t.arc_mass;
  if (key == "diameter") return &t.diameter;
  if (key == "sharp_value" || key == "sharp-value" || key == "sharp") return &t.sharp_value;
  if (key == "middle") return &t.middle;
  if (key == "convergence") return &t.convergence;
  if (key == "drift") return &t.drift;
  if (key == "faithfulness") return &t.faithfulness;
  if (key == "censor") return &t.censor;
  return nullptr;
}

Tolerances tolerances_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config.tolerances: expected an object");
  Tolerances t;
  for (auto it = j.begin(); it != j.end(); ++it) {
    double* slot = tolerance_slot(t, it.key());
    if (!slot) throw InputError("config.tolerances." + it.key() + ": unknown tolerance");
    if (!it->is_number()) throw InputError("config.tolerances." + it.key() + ": expected a number");
    *slot = it->get<double>();
  }
  return t;
}

PlanarGraph load_graph(const RunConfig& c) {
  return c.input.empty() ? build_family(c.family) : read_graph_file(c.input);
}

Artifact json_artifact(std::string name, std::string_view schema, const RunConfig& c, Json results) {
  Artifact a;
  a.name = std::move(name);
  a.schema = schema;
  a.format = "json";
  a.body = results.dump();
  a.text = make_document(schema, c.seed, config_to_json(c), std::move(results)).dump(2) + "\n";
  return a;
}

Artifact csv_artifact(std::string name, std::string_view schema, const RunConfig& c, std::string body) {
  Artifact a;
  a.name = std::move(name);
  a.schema = schema;
  a.format = "csv";
  a.text = with_csv_header(artifact_header(schema, c.seed, config_to_json(c)), body);
  a.body = std::move(body);
  return a;
}

Artifact svg_artifact(std::string name, const RunConfig& c, const Tiling<double>& t) {
  Artifact a;
  a.name = std::move(name);
  a.schema = kRenderSchema;
  a.format = "svg";
  a.body = render_svg(t, c.svg);
  a.text = with_svg_header(artifact_header(kRenderSchema, c.seed, config_to_json(c)), a.body);
  return a;
}

Json graph_summary(const PlanarGraph& g) {
  return {{"vertices", g.num_vertices()}, {"edges", g.num_edges()}, {"sinks", g.sinks().size()},
          {"root", g.label(g.root())}};
}

Json findings_results(const PlanarGraph& g, const std::vector<Finding>& findings) {
  Json r;
  r["graph"] = graph_summary(g);
  Json f = findings_json(findings);
  r["passed"] = f["passed"];
  r["checks"] = std::move(f["checks"]);
  return r;
}

std::string sharp_csv(const std::vector<SharpFunction>& sharp) {
  std::ostringstream out;
  out << "function,vertex,value\n";
  out.precision(17);
  for (const auto& s : sharp) {
    for (VertexId v = 0; v < static_cast<VertexId>(s.values.size()); ++v) {
      out << '"' << s.expression << "\"," << s.graph->label(v) << ',' << s.values[v] << '\n';
    }
  }
  return out.str();
}

SuiteOptions suite_options(const RunConfig& c) {
  SuiteOptions s;
  s.walk.seed = c.seed;
  s.walk.trials = c.trials;
  s.walk.step_cap = c.step_cap;
  s.walk.threads = c.threads;
  s.tol = c.tol;
  s.level = c.level;
  s.max_atoms = c.max_atoms;
  s.flux_darts = c.flux_darts;
  s.meridians = c.meridians;
  s.arcs = c.arcs;
  s.alternation_cap = c.alternation_cap;
  for (auto [a, b] : c.sharp_arcs) s.sharp_arcs.push_back(ArcSet::arc(a, b));
  return s;
}

void append(std::vector<Finding>& to, std::vector<Finding> from) {
  for (auto& f : from) to.push_back(std::move(f));
}

std::string describe(const CriterionCheck& c) {
  std::ostringstream out;
  out << (c.status == CheckStatus::kPass ? "PASS" : c.status == CheckStatus::kFail ? "FAIL" : "SKIP") << "  "
      << c.name << "  value=" << c.value << " tolerance=" << c.tolerance;
  if (!c.detail.empty()) out << "  (" << c.detail << ")";
  return out.str();
}

}  // namespace

void RunConfig::validate() const {
  bool known = false;
  for (const char* k : kCommands) known = known || command == k;
  if (!known) throw InputError("command: unknown command '" + command + "'");
  if (trials <= 0) throw InputError("trials: must be positive");
  if (step_cap <= 0) throw InputError("step_cap: must be positive");
  if (alternation_cap <= 0) throw InputError("alternation_cap: must be positive");
  if (format != "json" && format != "csv" && format != "svg") {
    throw InputError("format: expected json, csv or svg, got '" + format + "'");
  }
  if (format == "svg" && command != "tile" && command != "render") {
    throw InputError("format: svg output is only available for tile and render");
  }
  const Json t = tolerances_json(tol);
  for (auto it = t.begin(); it != t.end(); ++it) {
    if (it.key() == "tv") {
      if (it->get<double>() < 0) throw InputError("tolerances.tv: must be positive (0 selects the default)");
    } else if (!(it->get<double>() > 0)) {
      throw InputError("tolerances." + it.key() + ": must be positive");
    }
  }
  if (level < 0 || level >= 1) throw InputError("level: must lie in (0, 1), or 0 for automatic");
  if (max_atoms < 1) throw InputError("max_atoms: must be positive");
  if (!(svg.width > 0 && svg.height > 0)) throw InputError("svg: width and height must be positive");
  if (input.empty() && family.depth < 1) throw InputError("depth: must be at least 1");
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  if (!c.input.empty()) {
    j["input"] = c.input;
  } else {
    j["family"] = {{"name", c.family.name},   {"depth", c.family.depth},
                   {"branching", c.family.branching}, {"p", c.family.p},
                   {"q", c.family.q},         {"perturb_seed", c.family.perturb_seed},
                   {"ground_tail", c.family.ground_tail}};
  }
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["step_cap"] = c.step_cap;
  j["tolerances"] = tolerances_json(c.tol);
  j["walk"] = {{"level", c.level},         {"max_atoms", c.max_atoms},
               {"flux_darts", c.flux_darts}, {"meridians", c.meridians},
               {"arcs", c.arcs},           {"alternation_cap", c.alternation_cap}};
  Json arcs = Json::array();
  for (auto [a, b] : c.sharp_arcs) arcs.push_back({a, b});
  j["sharp_arcs"] = std::move(arcs);
  j["exact"] = c.exact;
  j["verify"] = {{"tiling", c.verify_tiling}, {"walk", c.verify_walk}, {"boundary", c.verify_boundary}};
  j["svg"] = {{"width", c.svg.width}, {"height", c.svg.height}, {"stroke", c.svg.stroke}};
  j["format"] = c.format;
  j["render"] = c.render;
  return j;
}

RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("config: expected an object");
  RunConfig c;
  const std::string p = "config";
  if (!j.contains("command")) throw InputError("config.command: required field is missing");
  c.command = field<std::string>(j, "command", "", p);
  c.input = field<std::string>(j, "input", "", p);
  if (auto it = j.find("family"); it != j.end()) {
    const std::string fp = p + ".family";
    c.family.name = field<std::string>(*it, "name", c.family.name, fp);
    c.family.depth = field<int>(*it, "depth", c.family.depth, fp);
    c.family.branching = field<int>(*it, "branching", c.family.branching, fp);
    c.family.p = field<int>(*it, "p", c.family.p, fp);
    c.family.q = field<int>(*it, "q", c.family.q, fp);
    c.family.perturb_seed = field<std::uint64_t>(*it, "perturb_seed", c.family.perturb_seed, fp);
    c.family.ground_tail = field<bool>(*it, "ground_tail", c.family.ground_tail, fp);
  }
  if (!j.contains("seed")) throw InputError("config.seed: required field is missing");
  c.seed = field<std::uint64_t>(j, "seed", c.seed, p);
  c.trials = field<std::int64_t>(j, "trials", c.trials, p);
  c.step_cap = field<std::int64_t>(j, "step_cap", c.step_cap, p);
  if (auto it = j.find("tolerances"); it != j.end()) c.tol = tolerances_from_json(*it);
  if (auto it = j.find("walk"); it != j.end()) {
    const std::string wp = p + ".walk";
    c.level = field<double>(*it, "level", c.level, wp);
    c.max_atoms = field<int>(*it, "max_atoms", c.max_atoms, wp);
    c.flux_darts = field<int>(*it, "flux_darts", c.flux_darts, wp);
    c.meridians = field<int>(*it, "meridians", c.meridians, wp);
    c.arcs = field<int>(*it, "arcs", c.arcs, wp);
    c.alternation_cap = field<std::int64_t>(*it, "alternation_cap", c.alternation_cap, wp);
  }
  if (auto it = j.find("sharp_arcs"); it != j.end()) {
    if (!it->is_array()) throw InputError("config.sharp_arcs: expected an array");
    for (const Json& a : *it) {
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
        throw InputError("config.sharp_arcs: expected [start, end] pairs");
      }
      c.sharp_arcs.emplace_back(a[0].get<double>(), a[1].get<double>());
    }
  }
  c.exact = field<bool>(j, "exact", c.exact, p);
  if (auto it = j.find("verify"); it != j.end()) {
    c.verify_tiling = field<bool>(*it, "tiling", true, p + ".verify");
    c.verify_walk = field<bool>(*it, "walk", true, p + ".verify");
    c.verify_boundary = field<bool>(*it, "boundary", true, p + ".verify");
  }
  if (auto it = j.find("svg"); it != j.end()) {
    c.svg.width = field<double>(*it, "width", c.svg.width, p + ".svg");
    c.svg.height = field<double>(*it, "height", c.svg.height, p + ".svg");
    c.svg.stroke = field<double>(*it, "stroke", c.svg.stroke, p + ".svg");
  }
  c.format = field<std::string>(j, "format", c.format, p);
  c.render = field<std::string>(j, "render", c.render, p);
  c.validate();
  return c;
}

RunResult execute(const RunConfig& c) {
  c.validate();
  const PlanarGraph g = load_graph(c);
  TileOptions topts;
  topts.solver.tolerance = c.tol.solver;
  const Tiling<double> t = tile_killed<double>(g, topts);
  const SuiteOptions opts = suite_options(c);
  RunResult r;

  auto exact_findings = [&] {
    if (!c.exact) return std::vector<Finding>{};
    return exact_tiling_findings(tile_killed<Rational>(g));
  };

  if (c.command == "tile") {
    r.findings = tiling_findings(t, c.tol);
    append(r.findings, exact_findings());
    r.artifacts.push_back(json_artifact("profile.json", kProfileSchema, c, profile_json(*t.graph, t.profile)));
    if (c.format == "json") {
      r.artifacts.push_back(json_artifact("tiling.json", kTilingSchema, c, tiling_json(t, audit_tiling(t, c.tol.geometry))));
    } else if (c.format == "csv") {
      r.artifacts.push_back(csv_artifact("tiling.csv", kTilingSchema, c, tiling_csv(t)));
    } else {
      r.artifacts.push_back(svg_artifact("tiling.svg", c, t));
    }
    if (!c.render.empty()) r.artifacts.push_back(svg_artifact(c.render, c, t));
  } else if (c.command == "render") {
    r.artifacts.push_back(svg_artifact(c.render.empty() ? "tiling.svg" : c.render, c, t));
  } else if (c.command == "walk") {
    r.findings = walk_findings(t, opts);
    if (c.format == "csv") {
      r.artifacts.push_back(csv_artifact("stats.csv", kStatsSchema, c, findings_csv(r.findings)));
    } else {
      r.artifacts.push_back(json_artifact("stats.json", kStatsSchema, c, findings_results(g, r.findings)));
    }
  } else if (c.command == "boundary") {
    BoundaryRun b = boundary_findings(t, opts);
    r.findings = std::move(b.findings);
    if (c.format == "csv") {
      r.artifacts.push_back(csv_artifact("sharp.csv", kSharpSchema, c, sharp_csv(b.sharp)));
      r.artifacts.push_back(csv_artifact("audit.csv", kAuditSchema, c, findings_csv(r.findings)));
    } else {
      Json functions = Json::array();
      for (const auto& s : b.sharp) functions.push_back(to_json(s));
      r.artifacts.push_back(json_artifact("sharp.json", kSharpSchema, c, {{"functions", std::move(functions)}}));
      r.artifacts.push_back(json_artifact("audit.json", kAuditSchema, c, findings_results(g, r.findings)));
    }
  } else if (c.command == "verify") {
    if (c.verify_tiling) {
      append(r.findings, tiling_findings(t, c.tol));
      append(r.findings, exact_findings());
    }
    if (c.verify_walk) append(r.findings, walk_findings(t, opts));
    if (c.verify_boundary) append(r.findings, boundary_findings(t, opts).findings);
    if (c.format == "csv") {
      r.artifacts.push_back(csv_artifact("audit.csv", kAuditSchema, c, findings_csv(r.findings)));
    } else {
      r.artifacts.push_back(json_artifact("audit.json", kAuditSchema, c, findings_results(g, r.findings)));
    }
  }
  return r;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    const RunResult r = execute(c);
    std::filesystem::create_directories(c.out);
    for (const Artifact& a : r.artifacts) {
      const std::filesystem::path name(a.name);
      const std::filesystem::path path = name.has_parent_path() || name.is_absolute() ? name : c.out / name;
      write_text_file(path, a.text);
      out << "wrote " << path.string() << " (" << a.schema << ")\n";
    }
    for (const Finding& f : r.findings) out << describe(f.check) << "\n";
    if (r.findings.empty()) return kExitOk;
    const bool ok = r.passed();
    out << (ok ? "all audits passed" : "audit failure") << "\n";
    return ok ? kExitOk : kExitAuditFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int reproduce(const std::filesystem::path& report, int threads, std::ostream& out, std::ostream& err) {
  ParsedArtifact parsed;
  RunConfig c;
  try {
    parsed = parse_artifact(read_text_file(report));
    const std::string schema = parsed.header["schema"].get<std::string>();
    check_schema(schema);
    if (schema == kGraphSchema) throw InputError("schema: a graph document carries no results to reproduce");
    if (!parsed.header.contains("config")) throw InputError("config: missing config echo");
    c = config_from_json(parsed.header["config"]);
  } catch (const std::exception& e) {
    err << "error: " << report.string() << ": " << e.what() << "\n";
    return kExitError;
  }
  if (parsed.header.value("tool", std::string()) != kToolVersion) {
    err << "note: written by " << parsed.header.value("tool", std::string("an unknown tool")) << ", reproducing with "
        << kToolVersion << "\n";
  }
  const Json seed = parsed.header.value("seed", Json());
  if (!seed.is_number_unsigned() || seed.get<std::uint64_t>() != c.seed) {
    out << "mismatch: seed " << seed.dump() << " differs from the config echo (" << c.seed << ")\n";
    return kExitAuditFailed;
  }
  c.threads = threads;
  RunResult r;
  try {
    r = execute(c);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  const std::string schema = parsed.header["schema"].get<std::string>();
  for (const Artifact& a : r.artifacts) {
    if (a.schema != schema || a.format != parsed.format) continue;
    if (a.body == parsed.body) {
      out << "reproduced " << report.string() << ": identical " << schema << " " << a.format << "\n";
      return kExitOk;
    }
    std::size_t i = 0;
    while (i < a.body.size() && i < parsed.body.size() && a.body[i] == parsed.body[i]) ++i;
    out << "mismatch: " << report.string() << " differs from the re-run at byte " << i << "\n";
    return kExitAuditFailed;
  }
  err << "error: the '" << c.command << "' command emits no " << schema << " " << parsed.format << " artifact\n";
  return kExitError;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Square tilings of planar networks and random-walk audits", "tiler"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  RunConfig c;
  std::vector<std::string> tolerances;
  std::vector<std::string> arcs;
  bool all = false, only_tiling = false, only_walk = false, only_boundary = false;
  std::string out_dir = ".";
  std::string report;
  int threads = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--input", c.input, "graph file (tiler-graph/1)");
    sub->add_option("--family", c.family.name, "binary-tree, bary-tree, perturbed-tree, hyperbolic or grid");
    sub->add_option("--depth", c.family.depth, "family depth (tree depth, rings or box radius)");
    sub->add_option("--branching", c.family.branching, "bary-tree branching");
    sub->add_option("--p", c.family.p, "hyperbolic face size");
    sub->add_option("--q", c.family.q, "hyperbolic vertex degree");
    sub->add_option("--perturb-seed", c.family.perturb_seed, "conductance seed of perturbed-tree");
    sub->add_flag("--ground-tail", c.family.ground_tail, "pendant sinks carrying the truncated subtree");
    sub->add_option("--seed", c.seed, "top-level seed");
    sub->add_option("--trials", c.trials, "walks per check");
    sub->add_option("--step-cap", c.step_cap, "steps before a walk is censored");
    sub->add_option("--threads", threads, "worker threads (0: all cores)");
    sub->add_option("--tolerance", tolerances, "override as name=value, e.g. tv=0.01");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--format", c.format, "json, csv or svg")->check(CLI::IsMember({"json", "csv", "svg"}));
    sub->add_flag("--exact", c.exact, "also tile and audit in rational arithmetic");
  };
  auto walk_options = [&](CLI::App* sub) {
    sub->add_option("--level", c.level, "level of the exit checks (default: deepest with <= max-atoms atoms)");
    sub->add_option("--max-atoms", c.max_atoms, "atom budget of automatic levels");
    sub->add_option("--flux-darts", c.flux_darts, "darts sampled for the flux check");
    sub->add_option("--meridians", c.meridians, "meridians sampled for the crossing check");
    sub->add_option("--arcs", c.arcs, "arcs sampled for the boundary-mass check");
    sub->add_option("--alternation-cap", c.alternation_cap, "step cap of the alternation stability check");
  };
  auto boundary_options = [&](CLI::App* sub) {
    sub->add_option("--arc", arcs, "arc a:b defining a sharp function (repeatable)");
  };

  CLI::App* tile = app.add_subcommand("tile", "solve, tile and audit; write profile and tiling");
  common(tile);
  tile->add_option("--render", c.render, "also write the tiling as SVG to this path");
  tile->add_option("--width", c.svg.width, "SVG width in user units");
  tile->add_option("--height", c.svg.height, "SVG height in user units");

  CLI::App* render = app.add_subcommand("render", "write the tiling as SVG");
  common(render);
  render->add_option("--width", c.svg.width, "SVG width in user units");
  render->add_option("--height", c.svg.height, "SVG height in user units");
  render->add_option("--stroke", c.svg.stroke, "stroke width");
  render->add_option("--render", c.render, "output path (default: tiling.svg under --out)");

  CLI::App* walk = app.add_subcommand("walk", "random-walk identities of the tiling");
  common(walk);
  walk_options(walk);

  CLI::App* boundary = app.add_subcommand("boundary", "sharp harmonic functions of arcs and their audits");
  common(boundary);
  walk_options(boundary);
  boundary_options(boundary);

  CLI::App* verify = app.add_subcommand("verify", "tiling, walk and boundary audits in one report");
  common(verify);
  walk_options(verify);
  boundary_options(verify);
  verify->add_flag("--all", all, "every audit (default)");
  verify->add_flag("--tiling", only_tiling, "tiling audits");
  verify->add_flag("--walk", only_walk, "walk identities");
  verify->add_flag("--boundary", only_boundary, "boundary audits");

  CLI::App* repro = app.add_subcommand("reproduce", "re-run an artifact's embedded config and compare");
  repro->add_option("report", report, "artifact to reproduce")->required();
  repro->add_option("--threads", threads, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  if (repro->parsed()) return reproduce(report, threads, out, err);

  try {
    c.command = app.get_subcommands().front()->get_name();
    c.out = out_dir;
    c.threads = threads;
    if (c.command == "render") c.format = "svg";
    for (const std::string& t : tolerances) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw InputError("tolerance: expected name=value, got '" + t + "'");
      double* slot = tolerance_slot(c.tol, t.substr(0, eq));
      if (!slot) throw InputError("tolerance: unknown tolerance '" + t.substr(0, eq) + "'");
      try {
        *slot = std::stod(t.substr(eq + 1));
      } catch (const std::exception&) {
        throw InputError("tolerance: '" + t + "' has no numeric value");
      }
    }
    for (const std::string& a : arcs) {
      const auto colon = a.find(':');
      if (colon == std::string::npos) throw InputError("arc: expected a:b, got '" + a + "'");
      try {
        c.sharp_arcs.emplace_back(std::stod(a.substr(0, colon)), std::stod(a.substr(colon + 1)));
      } catch (const std::exception&) {
        throw InputError("arc: '" + a + "' is not a pair of numbers");
      }
    }
    if (c.command == "verify" && !all && (only_tiling || only_walk || only_boundary)) {
      c.verify_tiling = only_tiling;
      c.verify_walk = only_walk;
      c.verify_boundary = only_boundary;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return run(c, out, err);
}

}  // namespace tiler
