#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "forge/csv.hpp"
#include "forge/pipeline.hpp"
#include "forge/synthetic.hpp"
#include "json.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

int forge_cli(const std::string& args) {
  const std::string cmd = std::string(FORGE_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("forge_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path small_bundle(const std::string& name) {
  const fs::path dir = scratch(name);
  SyntheticOptions opt;
  opt.per_family = 8;
  opt.non_residential = 4;
  write_synthetic_bundle(dir, opt, 2);
  return dir;
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    CAPTURE(rel.string());
    REQUIRE(fs::exists(b / rel));
    CHECK(read_text(e.path()) == read_text(b / rel));
    ++files;
  }
  CHECK(files > 10);
}

}  // namespace

TEST_CASE("config parsing and hashing") {
  const auto c = parse_config(R"({"inventory":"x.geojson","seed":3,"vq":{"epochs":5},"cluster":{"k":4}})", "/base");
  CHECK(c.resolve(c.inventory) == fs::path("/base/x.geojson"));
  CHECK(c.vq.epochs == 5);
  CHECK(c.fixed_k == 4);
  CHECK(config_hash(c).size() == 16);
  PipelineConfig moved = c;
  moved.out_dir = "elsewhere";
  CHECK(config_hash(moved) == config_hash(c));
  PipelineConfig reseeded = c;
  reseeded.seed = 4;
  CHECK(config_hash(reseeded) != config_hash(c));
  CHECK(stage_seed(c, "train") != stage_seed(c, "cluster"));

  CHECK_THROWS_AS(parse_config("{", "/"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"vq":{"epoch":5}})", "/"), doctest::Contains("vq.epoch"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed":"seven"})", "/"), doctest::Contains("seed"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"land_use_filter":"industrial"})", "/"), ConfigError);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch("exit_codes");
  CHECK(forge_cli("") == 2);
  CHECK(forge_cli("all --config " + (dir / "missing.json").string()) == 2);

  write_text(dir / "broken.json", "{ not json");
  CHECK(forge_cli("ingest --config " + (dir / "broken.json").string()) == 2);

  write_text(dir / "no_inventory.json", R"({"inventory":"nowhere.geojson"})");
  CHECK(forge_cli("ingest --config " + (dir / "no_inventory.json").string()) == 2);

  write_text(dir / "empty.geojson", R"({"type":"FeatureCollection","features":[]})");
  write_text(dir / "empty.json", R"({"inventory":"empty.geojson"})");
  CHECK(forge_cli("ingest --config " + (dir / "empty.json").string()) == 3);

  // a later stage without its prerequisites is a configuration problem
  write_text(dir / "ok.json", R"({"inventory":"empty.geojson"})");
  CHECK(forge_cli("cluster --config " + (dir / "ok.json").string()) == 2);
}

TEST_CASE("published totals through the energy bypass") {
  const fs::path out = scratch("bypass");
  REQUIRE(forge_cli("energy --config " FORGE_DATA_DIR "/published_totals/config.json --out " + out.string()) == 0);
  const auto report = read_csv(out / "energy" / "report.csv");
  const auto& last = report.rows.back();
  CHECK(last[0] == "average");
  CHECK(std::abs(parse_number(last[6], "acc") - 91.36) <= 0.5);
  CHECK(std::abs(parse_number(last[7], "impr") - 25.50) <= 0.5);
}

TEST_CASE("stage-by-stage run equals all, and every artifact carries the hash") {
  const fs::path dir = small_bundle("stages");
  const std::string config = (dir / "config.json").string();
  REQUIRE(forge_cli("all --config " + config + " --out " + (dir / "a").string() + " --k 4") == 0);
  for (const char* stage : {"ingest", "rasterize", "train", "cluster", "archetypes", "energy"}) {
    CAPTURE(stage);
    REQUIRE(forge_cli(std::string(stage) + " --config " + config + " --out " + (dir / "b").string() + " --k 4") == 0);
  }
  expect_same_tree(dir / "a", dir / "b");

  const auto cfg = load_config(config);
  PipelineConfig fixed = cfg;
  fixed.fixed_k = 4;
  const std::string hash = config_hash(fixed);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    CAPTURE(e.path().string());
    CHECK(read_text(e.path()).find(hash) != std::string::npos);
  }
  const auto table = read_csv(dir / "a" / "archetypes" / "archetypes.csv");
  CHECK(table.rows.size() == 4);
  CHECK(fs::exists(dir / "a" / "archetypes" / "contact_sheet.pgm"));
  CHECK(fs::exists(dir / "a" / "cluster" / "scatter.svg"));
  CHECK(fs::exists(dir / "a" / "train" / "reconstruction.pgm"));
}

TEST_CASE("seed override changes the run") {
  const fs::path dir = small_bundle("seeds");
  const std::string config = (dir / "config.json").string();
  REQUIRE(forge_cli("train --config " + config + " --out " + (dir / "a").string()) == 2);  // needs rasterize first
  REQUIRE(forge_cli("all --config " + config + " --out " + (dir / "a").string() + " --seed 1 --k 3") == 0);
  REQUIRE(forge_cli("all --config " + config + " --out " + (dir / "b").string() + " --seed 2 --k 3") == 0);
  CHECK(read_text(dir / "a" / "train" / "model.ckpt") != read_text(dir / "b" / "train" / "model.ckpt"));
}
