#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "tiler/cli.hpp"
#include "tiler/graph_io.hpp"

using namespace tiler;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tiler");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tiler-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string path(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("tile writes profile, tiling and SVG that all reproduce") {
  const fs::path dir = scratch("tile");
  const Outcome r = cli({"tile", "--family", "binary-tree", "--depth", "10", "--out", path(dir), "--render",
                         path(dir / "out.svg")});
  CHECK(r.code == kExitOk);
  for (const char* name : {"profile.json", "tiling.json", "out.svg"}) {
    REQUIRE(fs::exists(dir / name));
    const Outcome again = cli({"reproduce", path(dir / name)});
    CHECK_MESSAGE(again.code == kExitOk, name, again.out, again.err);
  }
  const Json doc = read_json_file(dir / "tiling.json");
  CHECK(doc["schema"] == "tiler-tiling/1");
  CHECK(doc["tool"] == kToolVersion);
  CHECK(doc["seed"] == 1);
  CHECK(doc["config"]["family"]["depth"] == 10);
  CHECK(doc["results"]["rects"].size() == 2046);
  CHECK(doc["results"]["audit"]["passed"] == true);
  const std::string svg = read_text_file(dir / "out.svg");
  CHECK(svg.find("<metadata>") != std::string::npos);
  CHECK(svg.find("tiler-render/1") != std::string::npos);
}

TEST_CASE("corrupt input names the field and exits 1") {
  const fs::path dir = scratch("corrupt");
  write_text_file(dir / "bad.json",
                  R"({"schema": "tiler-graph/1", "vertices": ["o", "a"],
                      "edges": [{"u": "o", "v": "a", "conductance": -1}], "root": "o", "sinks": ["a"]})");
  const Outcome r = cli({"tile", "--input", path(dir / "bad.json"), "--out", path(dir)});
  CHECK(r.code == kExitError);
  CHECK(r.err.find("edges[0].conductance") != std::string::npos);

  write_text_file(dir / "typo.json", R"({"vertices": ["o", "a"], "edges": [{"u": "o", "w": "a"}], "root": "o"})");
  const Outcome t = cli({"tile", "--input", path(dir / "typo.json"), "--out", path(dir)});
  CHECK(t.code == kExitError);
  CHECK(t.err.find("edges[0].v") != std::string::npos);

  CHECK(cli({"tile", "--input", path(dir / "absent.json")}).code == kExitError);
  CHECK(cli({"walk", "--family", "moebius"}).code == kExitError);
  CHECK(cli({"walk", "--trials", "many"}).code == kExitError);
  CHECK(cli({"walk", "--tolerance", "nonsense=1"}).code == kExitError);
  CHECK(cli({"walk", "--tolerance", "tv=-1"}).code == kExitError);
  CHECK(cli({"walk", "--format", "svg"}).code == kExitError);
}

TEST_CASE("walk statistics reproduce; an altered seed or schema does not") {
  const fs::path dir = scratch("walk");
  const Outcome r = cli({"walk", "--family", "perturbed-tree", "--depth", "8", "--seed", "42", "--trials", "20000",
                         "--out", path(dir)});
  CHECK_MESSAGE(r.code == kExitOk, r.out, r.err);
  const fs::path stats = dir / "stats.json";
  CHECK(cli({"reproduce", path(stats)}).code == kExitOk);
  CHECK(cli({"reproduce", path(stats), "--threads", "3"}).code == kExitOk);

  Json doc = read_json_file(stats);
  CHECK(doc["results"]["checks"].size() == 12);
  doc["seed"] = 43;
  doc["config"]["seed"] = 43;
  write_text_file(dir / "seed.json", doc.dump(2));
  const Outcome seed = cli({"reproduce", path(dir / "seed.json")});
  CHECK(seed.code == kExitAuditFailed);
  CHECK(seed.out.find("mismatch") != std::string::npos);

  doc = read_json_file(stats);
  doc["seed"] = 7;
  write_text_file(dir / "echo.json", doc.dump(2));
  CHECK(cli({"reproduce", path(dir / "echo.json")}).code == kExitAuditFailed);

  doc = read_json_file(stats);
  doc["schema"] = "tiler-stats/2";
  write_text_file(dir / "v2.json", doc.dump(2));
  const Outcome v2 = cli({"reproduce", path(dir / "v2.json")});
  CHECK(v2.code == kExitError);
  CHECK(v2.err.find("version") != std::string::npos);

  doc = read_json_file(stats);
  doc.erase("config");
  write_text_file(dir / "bare.json", doc.dump(2));
  const Outcome bare = cli({"reproduce", path(dir / "bare.json")});
  CHECK(bare.code == kExitError);
  CHECK(bare.err.find("config") != std::string::npos);
}

TEST_CASE("CSV tables carry the header and reproduce") {
  const fs::path dir = scratch("csv");
  CHECK(cli({"walk", "--depth", "7", "--trials", "20000", "--max-atoms", "16", "--format", "csv", "--out", path(dir)}).code == kExitOk);
  const std::string text = read_text_file(dir / "stats.csv");
  CHECK(text.rfind("# {\"schema\":\"tiler-stats/1\"", 0) == 0);
  CHECK(text.find("identity,key,observed,expected,sigma") != std::string::npos);
  CHECK(cli({"reproduce", path(dir / "stats.csv")}).code == kExitOk);

  CHECK(cli({"tile", "--depth", "5", "--format", "csv", "--out", path(dir)}).code == kExitOk);
  CHECK(read_text_file(dir / "tiling.csv").find("edge,u,v,w_start,width,h_low,h_high") != std::string::npos);
  CHECK(cli({"reproduce", path(dir / "tiling.csv")}).code == kExitOk);
}

TEST_CASE("a failed audit exits 2") {
  const fs::path dir = scratch("fail");
  const Outcome r = cli({"walk", "--depth", "6", "--trials", "20000", "--tolerance", "tv=1e-6", "--out", path(dir)});
  CHECK(r.code == kExitAuditFailed);
  CHECK(r.out.find("FAIL  first hit") != std::string::npos);
  CHECK(cli({"reproduce", path(dir / "stats.json")}).code == kExitOk);
}

TEST_CASE("verify and boundary reports") {
  const fs::path dir = scratch("verify");
  const Outcome r = cli({"verify", "--all", "--depth", "9", "--seed", "5", "--trials", "40000", "--out", path(dir)});
  CHECK_MESSAGE(r.code == kExitOk, r.out, r.err);
  const Json audit = read_json_file(dir / "audit.json");
  CHECK(audit["schema"] == "tiler-audit/1");
  CHECK(audit["results"]["passed"] == true);
  for (const Json& c : audit["results"]["checks"]) CHECK(c.contains("seed"));
  CHECK(cli({"reproduce", path(dir / "audit.json")}).code == kExitOk);

  const fs::path b = scratch("boundary");
  CHECK(cli({"boundary", "--depth", "9", "--trials", "20000", "--max-atoms", "16", "--arc", "0.5:1", "--arc", "0.25:0.5", "--out",
             path(b)})
            .code == kExitOk);
  const Json sharp = read_json_file(b / "sharp.json");
  CHECK(sharp["schema"] == "tiler-sharp/1");
  REQUIRE(sharp["results"]["functions"].size() == 2);
  CHECK(sharp["results"]["functions"][0]["root_value"].get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cli({"reproduce", path(b / "sharp.json")}).code == kExitOk);

  const fs::path only = scratch("tiling-only");
  CHECK(cli({"verify", "--tiling", "--family", "hyperbolic", "--depth", "2", "--exact", "--out", path(only)}).code ==
        kExitOk);
  const Json t = read_json_file(only / "audit.json");
  CHECK(t["results"]["checks"].size() == 14);
}
