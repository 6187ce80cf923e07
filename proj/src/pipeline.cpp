#include "forge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "forge/checkpoint.hpp"
#include "forge/csv.hpp"
#include "forge/energy.hpp"
#include "forge/image_io.hpp"
#include "forge/log.hpp"
#include "forge/rng.hpp"
#include "json.hpp"

namespace forge {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- config

template <typename T>
T field(const json& obj, const char* key, const std::string& where, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + where + key + "' has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError("unknown config field '" + where + key + "'");
    }
  }
}

const json& section(const json& root, const char* key) {
  static const json empty = json::object();
  const auto it = root.find(key);
  if (it == root.end() || it->is_null()) return empty;
  if (!it->is_object()) throw ConfigError(std::string("config field '") + key + "' must be an object");
  return *it;
}

// --------------------------------------------------------------- layout

struct Layout {
  fs::path root;
  fs::path ingest() const { return root / "ingest"; }
  fs::path records() const { return ingest() / "records.geojson"; }
  fs::path summary() const { return ingest() / "summary.json"; }
  fs::path rasterize() const { return root / "rasterize"; }
  fs::path manifest() const { return rasterize() / "manifest.csv"; }
  fs::path heightmaps() const { return rasterize() / "heightmaps"; }
  fs::path train() const { return root / "train"; }
  fs::path checkpoint() const { return train() / "model.ckpt"; }
  fs::path curves() const { return train() / "curves.csv"; }
  fs::path cluster() const { return root / "cluster"; }
  fs::path assignments() const { return cluster() / "assignments.csv"; }
  fs::path wcss() const { return cluster() / "wcss.csv"; }
  fs::path cluster_model() const { return cluster() / "cluster.json"; }
  fs::path archetypes() const { return root / "archetypes"; }
  fs::path archetype_table() const { return archetypes() / "archetypes.csv"; }
  fs::path eui_sampled() const { return archetypes() / "eui_sampled.csv"; }
  fs::path eui_averaged() const { return archetypes() / "eui_averaged.csv"; }
  fs::path energy() const { return root / "energy"; }
};

void require(const fs::path& artifact, std::string_view prerequisite, std::string_view stage) {
  if (!fs::exists(artifact)) {
    throw ConfigError("stage '" + std::string(stage) + "' needs " + artifact.string() + "; run `forge " +
                      std::string(prerequisite) + "` first");
  }
}

void require_input(const PipelineConfig& c, const std::string& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("config field '") + what + "' is required for this stage");
  if (!fs::exists(c.resolve(p))) throw ConfigError(std::string("config field '") + what + "': " + c.resolve(p).string() + " does not exist");
}

std::string hash_comment(const std::string& hash) { return "# config_hash=" + hash + "\n"; }

// --------------------------------------------------------------- loading

std::vector<BuildingRecord> load_records(const PipelineConfig& c, std::string_view stage) {
  const Layout L{c.out()};
  require(L.records(), "ingest", stage);
  IngestOptions opt;
  opt.storey_height_m = c.storey_height_m;
  return parse_inventory(read_text(L.records()), opt).records;
}

struct LoadedDataset {
  std::vector<BuildingRecord> records;  // manifest order
  std::vector<Heightmap> maps;          // aligned with records
  std::vector<bool> is_test;
};

LoadedDataset load_dataset(const PipelineConfig& c, std::string_view stage) {
  const Layout L{c.out()};
  const auto records = load_records(c, stage);
  require(L.manifest(), "rasterize", stage);
  const CsvTable manifest = read_csv(L.manifest());
  const auto id_col = manifest.column("building_id");
  const auto split_col = manifest.column("split");

  std::map<std::string, const BuildingRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  LoadedDataset ds;
  for (const auto& row : manifest.rows) {
    const auto it = by_id.find(row[id_col]);
    if (it == by_id.end()) throw DataError("manifest lists unknown building " + row[id_col]);
    ds.records.push_back(*it->second);
    ds.is_test.push_back(row[split_col] == "test");
  }
  RasterBatch batch = rasterize_all(ds.records, c.grid);
  if (!batch.diagnostics.empty()) throw DataError("manifest building no longer rasterizes: " + batch.diagnostics.front());
  ds.maps = std::move(batch.maps);
  return ds;
}

VqModel load_model(const PipelineConfig& c, std::string_view stage) {
  const Layout L{c.out()};
  require(L.checkpoint(), "train", stage);
  return load_checkpoint(L.checkpoint());
}

PointMatrix cluster_points(const PipelineConfig& c, const VqModel& model, std::span<const Heightmap> maps) {
  std::vector<std::vector<double>> rows;
  if (c.cluster_quantized) {
    for (auto& code : encode_all(maps, model)) rows.push_back(std::move(code.embedding));
  } else {
    rows.resize(maps.size());
    const auto n = static_cast<long>(maps.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) rows[i] = encode(maps[i], model).flatten();
  }
  return PointMatrix::from_rows(rows);
}

std::vector<std::string> ids_of(std::span<const BuildingRecord> records) {
  std::vector<std::string> ids;
  for (const auto& r : records) ids.push_back(r.id);
  return ids;
}

struct LoadedClusters {
  ClusterModel model;
  std::string chosen_by;
};

LoadedClusters load_clusters(const PipelineConfig& c, std::span<const BuildingRecord> records, std::string_view stage) {
  const Layout L{c.out()};
  require(L.cluster_model(), "cluster", stage);
  require(L.assignments(), "cluster", stage);
  const json doc = json::parse(read_text(L.cluster_model()));
  LoadedClusters out;
  out.model.k = doc.at("k").get<int>();
  out.model.wcss = doc.at("wcss").get<double>();
  out.model.seed = doc.at("seed").get<std::uint64_t>();
  out.chosen_by = doc.at("chosen_by").get<std::string>();
  for (const auto& row : doc.at("centroids")) {
    const auto v = row.get<std::vector<double>>();
    out.model.dim = static_cast<int>(v.size());
    out.model.centroids.insert(out.model.centroids.end(), v.begin(), v.end());
  }
  const CsvTable t = read_csv(L.assignments());
  const auto id_col = t.column("building_id");
  const auto cl_col = t.column("cluster");
  std::map<std::string, int> label;
  for (const auto& row : t.rows) label[row[id_col]] = static_cast<int>(parse_number(row[cl_col], "cluster"));
  for (const auto& r : records) {
    const auto it = label.find(r.id);
    if (it == label.end()) throw DataError("building " + r.id + " has no cluster assignment");
    out.model.assignments.push_back(it->second);
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

// ----------------------------------------------------------------- config

fs::path PipelineConfig::resolve(const std::string& p) const {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  reject_unknown(root,
                 {"inventory", "land_use_filter", "storey_height_m", "zone", "eui", "actuals", "energy_bypass", "out",
                  "grid", "vq", "cluster", "test_fraction", "seed", "sheet_samples"},
                 "");

  PipelineConfig c;
  c.base_dir = base_dir;
  c.inventory = field<std::string>(root, "inventory", "", "");
  if (root.contains("land_use_filter")) {
    const auto& f = root["land_use_filter"];
    if (f.is_null()) {
      c.land_use_filter.reset();
    } else if (f.is_string()) {
      c.land_use_filter = parse_land_use(f.get<std::string>());
      if (!c.land_use_filter) throw ConfigError("config field 'land_use_filter' must be residential, other or null");
    } else {
      throw ConfigError("config field 'land_use_filter' has the wrong type");
    }
  }
  c.storey_height_m = field(root, "storey_height_m", "", c.storey_height_m);
  c.zone = field(root, "zone", "", c.zone);
  c.actuals = field<std::string>(root, "actuals", "", "");
  c.energy_bypass = field<std::string>(root, "energy_bypass", "", "");
  c.out_dir = field(root, "out", "", c.out_dir);
  c.test_fraction = field(root, "test_fraction", "", c.test_fraction);
  c.seed = field(root, "seed", "", c.seed);
  c.sheet_samples = field(root, "sheet_samples", "", c.sheet_samples);

  const json& eui = section(root, "eui");
  reject_unknown(eui, {"baseline", "sampled", "averaged"}, "eui.");
  c.baseline_eui = field<std::string>(eui, "baseline", "eui.", "");
  c.sampled_eui = field<std::string>(eui, "sampled", "eui.", "");
  c.averaged_eui = field<std::string>(eui, "averaged", "eui.", "");

  const json& grid = section(root, "grid");
  reject_unknown(grid, {"width_px", "meters_per_px"}, "grid.");
  c.grid.width_px = c.grid.height_px = field(grid, "width_px", "grid.", c.grid.width_px);
  c.grid.meters_per_px = field(grid, "meters_per_px", "grid.", c.grid.meters_per_px);

  const json& vq = section(root, "vq");
  reject_unknown(vq,
                 {"latent_grid", "embed_dim", "codebook_size", "hidden_channels", "beta", "learning_rate", "epochs",
                  "batch_size"},
                 "vq.");
  c.vq.latent_grid = field(vq, "latent_grid", "vq.", c.vq.latent_grid);
  c.vq.embed_dim = field(vq, "embed_dim", "vq.", c.vq.embed_dim);
  c.vq.codebook_size = field(vq, "codebook_size", "vq.", c.vq.codebook_size);
  c.vq.hidden_channels = field(vq, "hidden_channels", "vq.", c.vq.hidden_channels);
  c.vq.beta = field(vq, "beta", "vq.", c.vq.beta);
  c.vq.learning_rate = field(vq, "learning_rate", "vq.", c.vq.learning_rate);
  c.vq.epochs = field(vq, "epochs", "vq.", c.vq.epochs);
  c.vq.batch_size = field(vq, "batch_size", "vq.", c.vq.batch_size);

  const json& cl = section(root, "cluster");
  reject_unknown(cl, {"k", "k_min", "k_max", "restarts", "max_iter", "tol", "quantized"}, "cluster.");
  if (cl.contains("k") && !cl["k"].is_null()) c.fixed_k = field(cl, "k", "cluster.", 0);
  c.k_min = field(cl, "k_min", "cluster.", c.k_min);
  c.k_max = field(cl, "k_max", "cluster.", c.k_max);
  c.restarts = field(cl, "restarts", "cluster.", c.restarts);
  c.max_iter = field(cl, "max_iter", "cluster.", c.max_iter);
  c.tol = field(cl, "tol", "cluster.", c.tol);
  c.cluster_quantized = field(cl, "quantized", "cluster.", c.cluster_quantized);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  return parse_config(read_text(path), fs::absolute(path).parent_path());
}

std::string canonical_config(const PipelineConfig& c) {
  const json doc = {
      {"inventory", c.inventory},
      {"land_use_filter", c.land_use_filter ? json(std::string(to_string(*c.land_use_filter))) : json(nullptr)},
      {"storey_height_m", c.storey_height_m},
      {"zone", c.zone},
      {"eui", {{"baseline", c.baseline_eui}, {"sampled", c.sampled_eui}, {"averaged", c.averaged_eui}}},
      {"actuals", c.actuals},
      {"energy_bypass", c.energy_bypass},
      {"grid", {{"width_px", c.grid.width_px}, {"meters_per_px", c.grid.meters_per_px}}},
      {"vq",
       {{"latent_grid", c.vq.latent_grid},
        {"embed_dim", c.vq.embed_dim},
        {"codebook_size", c.vq.codebook_size},
        {"hidden_channels", c.vq.hidden_channels},
        {"beta", c.vq.beta},
        {"learning_rate", c.vq.learning_rate},
        {"epochs", c.vq.epochs},
        {"batch_size", c.vq.batch_size}}},
      {"cluster",
       {{"k", c.fixed_k ? json(*c.fixed_k) : json(nullptr)},
        {"k_min", c.k_min},
        {"k_max", c.k_max},
        {"restarts", c.restarts},
        {"max_iter", c.max_iter},
        {"tol", c.tol},
        {"quantized", c.cluster_quantized}}},
      {"test_fraction", c.test_fraction},
      {"seed", c.seed},
      {"sheet_samples", c.sheet_samples},
  };
  return doc.dump();
}

std::string config_hash(const PipelineConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_config(c))));
  return buf;
}

std::uint64_t stage_seed(const PipelineConfig& c, std::string_view stage) { return derive_seed(c.seed, stage); }

// ----------------------------------------------------------------- stages

void run_ingest(const PipelineConfig& c) {
  require_input(c, c.inventory, "inventory");
  const Layout L{c.out()};
  fs::create_directories(L.ingest());
  IngestOptions opt{c.land_use_filter, c.storey_height_m};
  const Inventory inv = load_buildings(c.resolve(c.inventory), opt);
  const std::string hash = config_hash(c);

  json records = json::parse(to_geojson(inv.records));
  records["config_hash"] = hash;
  write_text(L.records(), records.dump(1) + "\n");

  const json summary = {{"total_count", inv.summary.total_count},
                        {"residential_count", inv.summary.residential_count},
                        {"residential_fraction", inv.summary.residential_fraction},
                        {"rejected_count", inv.summary.rejected_count},
                        {"retained_count", inv.records.size()},
                        {"config_hash", hash}};
  write_text(L.summary(), summary.dump(2) + "\n");
  log::info("ingest: retained " + std::to_string(inv.records.size()) + " of " +
            std::to_string(inv.summary.total_count) + " buildings (" +
            std::to_string(inv.summary.rejected_count) + " features rejected)");
}

void run_rasterize(const PipelineConfig& c) {
  validate(c.grid);
  const Layout L{c.out()};
  const auto records = load_records(c, "rasterize");
  const Dataset ds = build_dataset(records, c.grid, c.test_fraction, stage_seed(c, "rasterize"));
  for (const auto& d : ds.diagnostics) log::warn(d);

  std::set<std::string> test_ids;
  for (const auto& m : ds.test) test_ids.insert(m.building_id);
  std::map<std::string, const Heightmap*> maps;
  for (const auto* part : {&ds.train, &ds.test}) {
    for (const auto& m : *part) maps[m.building_id] = &m;
  }

  const std::string hash = config_hash(c);
  fs::create_directories(L.heightmaps());
  std::ostringstream manifest;
  manifest << hash_comment(hash) << "building_id,split\n";
  for (const auto& r : records) {
    const auto it = maps.find(r.id);
    if (it == maps.end()) continue;
    manifest << r.id << ',' << (test_ids.count(r.id) ? "test" : "train") << '\n';
    const Heightmap& m = *it->second;
    write_pgm(L.heightmaps() / (r.id + ".pgm"), {m.side, m.side, m.pixels}, "config_hash=" + hash);
  }
  write_text(L.manifest(), manifest.str());
  log::info("rasterize: " + std::to_string(ds.train.size()) + " train / " + std::to_string(ds.test.size()) + " test");
}

void run_train(const PipelineConfig& c) {
  const Layout L{c.out()};
  const LoadedDataset ds = load_dataset(c, "train");
  std::vector<Heightmap> train_set, test_set;
  for (std::size_t i = 0; i < ds.maps.size(); ++i) (ds.is_test[i] ? test_set : train_set).push_back(ds.maps[i]);

  VqConfig vq = c.vq;
  vq.input_side = c.grid.width_px;
  vq.seed = stage_seed(c, "train");
  TrainOptions opt;
  opt.on_epoch = [&](int epoch, double tr, double te) {
    if (epoch == 1 || epoch % 10 == 0 || epoch == vq.epochs) {
      log::info("train: epoch " + std::to_string(epoch) + " train_mse " + fixed(tr, 6) + " test_mse " + fixed(te, 6));
    }
  };
  const TrainResult result = train(train_set, test_set, vq, opt);

  const std::string hash = config_hash(c);
  fs::create_directories(L.train());
  save_checkpoint(L.checkpoint(), result.model, hash);
  std::ostringstream curves;
  curves << hash_comment(hash) << "epoch,train_mse,test_mse\n";
  for (std::size_t e = 0; e < result.curves.train_mse.size(); ++e) {
    curves << e + 1 << ',' << format_double(result.curves.train_mse[e]) << ','
           << format_double(result.curves.test_mse[e]) << '\n';
  }
  write_text(L.curves(), curves.str());

  std::vector<Heightmap> samples;
  for (const auto* part : {&test_set, &train_set}) {
    for (const auto& m : *part) {
      if (static_cast<int>(samples.size()) < c.sheet_samples) samples.push_back(m);
    }
  }
  if (!samples.empty()) {
    emit_reconstruction_sheet(result.model, samples, L.train() / "reconstruction.pgm",
                              L.train() / "reconstruction.json", hash);
  }
}

void run_cluster(const PipelineConfig& c) {
  const Layout L{c.out()};
  const LoadedDataset ds = load_dataset(c, "cluster");
  const VqModel model = load_model(c, "cluster");
  const PointMatrix points = cluster_points(c, model, ds.maps);

  KMeansOptions opt{c.max_iter, c.tol, Exec::Parallel};
  const std::uint64_t seed = stage_seed(c, "cluster");
  std::vector<std::pair<int, double>> curve;
  int elbow = 0;
  const int k_max = std::min(c.k_max, points.n);
  if (k_max >= c.k_min + 2) {
    const ElbowResult e = choose_k_wcss(points, c.k_min, k_max, seed, c.restarts, opt);
    for (std::size_t i = 0; i < e.wcss_curve.size(); ++i) curve.emplace_back(c.k_min + static_cast<int>(i), e.wcss_curve[i]);
    elbow = e.chosen_k;
  } else if (!c.fixed_k) {
    throw ConfigError("cluster.k_max must be at least k_min + 2 (and at most the building count) when cluster.k is unset");
  }
  const int k = c.fixed_k ? *c.fixed_k : elbow;
  const std::string chosen_by = c.fixed_k ? "fixed" : "elbow";
  if (k > points.n) throw ConfigError("cluster.k exceeds the number of buildings");
  const ClusterModel cm = kmeans_restarts(points, k, derive_seed(seed, "k=" + std::to_string(k)), c.restarts, opt);
  if (curve.empty()) curve.emplace_back(k, cm.wcss);

  const std::string hash = config_hash(c);
  fs::create_directories(L.cluster());
  std::ostringstream assign;
  assign << hash_comment(hash) << "building_id,cluster\n";
  for (std::size_t i = 0; i < ds.records.size(); ++i) assign << ds.records[i].id << ',' << cm.assignments[i] << '\n';
  write_text(L.assignments(), assign.str());

  std::ostringstream wcss;
  wcss << hash_comment(hash) << "k,wcss\n";
  for (const auto& [kk, w] : curve) wcss << kk << ',' << format_double(w) << '\n';
  write_text(L.wcss(), wcss.str());

  json centroids = json::array();
  for (int i = 0; i < cm.k; ++i) {
    const auto row = cm.centroid(i);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  const json doc = {{"k", cm.k},
                    {"chosen_by", chosen_by},
                    {"elbow_k", elbow > 0 ? json(elbow) : json(nullptr)},
                    {"wcss", cm.wcss},
                    {"seed", cm.seed},
                    {"sizes", cm.cluster_sizes()},
                    {"embedding", c.cluster_quantized ? "quantized" : "pre_quantization"},
                    {"projection", "pca"},
                    {"projection_note", "2D scatter uses PCA in place of UMAP; visualization only"},
                    {"config_hash", hash},
                    {"centroids", centroids}};
  write_text(L.cluster_model(), doc.dump(1) + "\n");

  const auto xy = project_2d(points);
  const auto ids = ids_of(ds.records);
  const auto marked = sample_archetype_indices(cm, points, ids);
  write_text(L.cluster() / "scatter.svg",
             scatter_svg(xy, cm.assignments, marked, "k-means clusters (k=" + std::to_string(k) + "), PCA projection", hash));
  log::info("cluster: k=" + std::to_string(k) + " (" + chosen_by + "), wcss " + fixed(cm.wcss, 4) +
            (elbow > 0 ? ", elbow rule suggests k=" + std::to_string(elbow) : std::string()));
}

void run_archetypes(const PipelineConfig& c) {
  const Layout L{c.out()};
  const LoadedDataset ds = load_dataset(c, "archetypes");
  const VqModel model = load_model(c, "archetypes");
  const LoadedClusters lc = load_clusters(c, ds.records, "archetypes");
  const PointMatrix points = cluster_points(c, model, ds.maps);
  if (points.dim != lc.model.dim) throw DataError("cluster centroids do not match the embedding length; rerun `forge cluster`");

  const auto ids = ids_of(ds.records);
  std::vector<double> areas;
  for (const auto& r : ds.records) areas.push_back(r.floor_area_m2);
  const auto archetypes = build_archetypes(lc.model, points, ids, areas, model);

  const std::string hash = config_hash(c);
  fs::create_directories(L.archetypes());
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < ids.size(); ++i) index_of[ids[i]] = i;

  std::ostringstream table;
  table << hash_comment(hash) << "cluster,archetype_id,sampled_member_id,member_count,member_total_floor_area_m2\n";
  std::vector<std::vector<double>> top, bottom;
  for (const auto& a : archetypes) {
    table << a.cluster << ',' << archetype_id(a.cluster) << ',' << a.sampled_member_id << ',' << a.member_ids.size()
          << ',' << format_double(a.member_total_floor_area_m2) << '\n';
    const Heightmap& sampled = ds.maps[index_of.at(a.sampled_member_id)];
    const std::string stem = "cluster_" + std::to_string(a.cluster);
    write_pgm(L.archetypes() / (stem + "_sample.pgm"), {sampled.side, sampled.side, sampled.pixels}, "config_hash=" + hash);
    write_pgm(L.archetypes() / (stem + "_avg.pgm"), {a.averaged.side, a.averaged.side, a.averaged.pixels},
              "config_hash=" + hash);
    top.push_back(sampled.pixels);
    bottom.push_back(a.averaged.pixels);
  }
  write_text(L.archetype_table(), table.str());

  std::vector<std::vector<double>> tiles = top;
  tiles.insert(tiles.end(), bottom.begin(), bottom.end());
  write_pgm(L.archetypes() / "contact_sheet.pgm", tile_sheet(tiles, c.grid.width_px, static_cast<int>(top.size())),
            "config_hash=" + hash + " row1=sampled row2=averaged");

  // Stand-in "simulation" when every building carries a measured EUI: the
  // sampled archetype takes its member's EUI, the averaged archetype the
  // cluster mean.
  const bool measured = std::all_of(ds.records.begin(), ds.records.end(),
                                    [](const auto& r) { return r.measured_eui_kwh_m2.has_value(); });
  if (measured) {
    std::vector<EuiRecord> sampled_rows, averaged_rows;
    for (const auto& a : archetypes) {
      double sum = 0.0;
      for (const auto& id : a.member_ids) sum += *ds.records[index_of.at(id)].measured_eui_kwh_m2;
      sampled_rows.push_back({archetype_id(a.cluster), *ds.records[index_of.at(a.sampled_member_id)].measured_eui_kwh_m2, true});
      averaged_rows.push_back({archetype_id(a.cluster), sum / static_cast<double>(a.member_ids.size()), true});
    }
    write_text(L.eui_sampled(), hash_comment(hash) + eui_table_csv(EuiTable(sampled_rows)));
    write_text(L.eui_averaged(), hash_comment(hash) + eui_table_csv(EuiTable(averaged_rows)));
  } else {
    log::warn("archetypes: buildings lack measured EUIs; supply eui.sampled and eui.averaged tables for `energy`");
  }
  log::info("archetypes: " + std::to_string(archetypes.size()) + " clusters");
}

void run_energy(const PipelineConfig& c) {
  const Layout L{c.out()};
  const std::string hash = config_hash(c);
  EnergyReport report;
  if (!c.energy_bypass.empty()) {
    require_input(c, c.energy_bypass, "energy_bypass");
    report = compare_report(read_zone_totals(c.resolve(c.energy_bypass)));
  } else {
    require_input(c, c.baseline_eui, "eui.baseline");
    const auto all_records = load_records(c, "energy");
    require(L.manifest(), "rasterize", "energy");
    const CsvTable manifest = read_csv(L.manifest());
    std::set<std::string> in_manifest;
    for (const auto& row : manifest.rows) in_manifest.insert(row[manifest.column("building_id")]);
    std::vector<BuildingRecord> records;
    for (const auto& r : all_records) {
      if (in_manifest.count(r.id)) records.push_back(r);
    }
    if (records.size() != all_records.size()) {
      log::warn("energy: " + std::to_string(all_records.size() - records.size()) +
                " buildings were not rasterized and carry no archetype; they are excluded");
    }
    const LoadedClusters lc = load_clusters(c, records, "energy");

    auto table_for = [&](const std::string& configured, const fs::path& derived, const char* what) {
      if (!configured.empty()) {
        require_input(c, configured, what);
        return read_eui_table(c.resolve(configured));
      }
      require(derived, "archetypes", "energy");
      return read_eui_table(derived);
    };
    const EuiTable baseline = read_eui_table(c.resolve(c.baseline_eui));
    const EuiTable sampled = table_for(c.sampled_eui, L.eui_sampled(), "eui.sampled");
    const EuiTable averaged = table_for(c.averaged_eui, L.eui_averaged(), "eui.averaged");

    double actual = 0.0;
    if (!c.actuals.empty()) {
      require_input(c, c.actuals, "actuals");
      const auto actuals = read_zone_actuals(c.resolve(c.actuals));
      const auto it = actuals.find(c.zone);
      if (it == actuals.end()) throw DataError("actuals file has no row for zone " + c.zone);
      actual = it->second;
    } else {
      actual = aggregate_measured(records);
    }
    const ZoneInput zone{c.zone, records, lc.model.assignments, &baseline, &sampled, &averaged, actual};
    report = compare_report(std::span(&zone, 1));
  }
  fs::create_directories(L.energy());
  const std::string csv = report_csv(report, hash);
  write_text(L.energy() / "report.csv", csv);
  write_text(L.energy() / "report.json", report_json(report, hash));
  std::cout << csv;
}

void run_all(const PipelineConfig& c) {
  if (!c.energy_bypass.empty()) {
    run_energy(c);
    return;
  }
  run_ingest(c);
  run_rasterize(c);
  run_train(c);
  run_cluster(c);
  run_archetypes(c);
  run_energy(c);
}

void run_stage(std::string_view name, const PipelineConfig& c) {
  if (name == "ingest") return run_ingest(c);
  if (name == "rasterize") return run_rasterize(c);
  if (name == "train") return run_train(c);
  if (name == "cluster") return run_cluster(c);
  if (name == "archetypes") return run_archetypes(c);
  if (name == "energy") return run_energy(c);
  if (name == "all") return run_all(c);
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

// --------------------------------------------------------------- figures

SheetSummary emit_reconstruction_sheet(const VqModel& model, std::span<const Heightmap> samples,
                                       const fs::path& pgm_path, const fs::path& json_path, const std::string& hash) {
  if (samples.empty()) throw DataError("reconstruction sheet needs at least one sample");
  SheetSummary s;
  s.rows = 2;
  s.columns = static_cast<int>(samples.size());
  std::vector<std::vector<double>> tiles(samples.size() * 2);
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Heightmap rec = reconstruct(samples[i], model);
    tiles[i] = samples[i].pixels;
    tiles[samples.size() + i] = rec.pixels;
    double acc = 0.0;
    for (std::size_t p = 0; p < rec.pixels.size(); ++p) acc += (rec.pixels[p] - samples[i].pixels[p]) * (rec.pixels[p] - samples[i].pixels[p]);
    s.ids.push_back(samples[i].building_id);
    s.pair_mse.push_back(acc / static_cast<double>(rec.pixels.size()));
    total += s.pair_mse.back();
  }
  s.mean_mse = total / static_cast<double>(samples.size());
  write_pgm(pgm_path, tile_sheet(tiles, samples.front().side, s.columns),
            hash.empty() ? std::string("row1=input row2=reconstruction") : "config_hash=" + hash + " row1=input row2=reconstruction");
  json doc = {{"rows", s.rows}, {"columns", s.columns}, {"samples", s.ids}, {"pair_mse", s.pair_mse}, {"mean_mse", s.mean_mse}};
  if (!hash.empty()) doc["config_hash"] = hash;
  write_text(json_path, doc.dump(2) + "\n");
  return s;
}

std::string scatter_svg(std::span<const double> xy, std::span<const int> labels, std::span<const std::size_t> marked,
                        const std::string& caption, const std::string& hash) {
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double size = 600.0, margin = 40.0;
  const std::size_t n = labels.size();
  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xy[2 * i], y = xy[2 * i + 1];
    if (i == 0 || x < min_x) min_x = x;
    if (i == 0 || x > max_x) max_x = x;
    if (i == 0 || y < min_y) min_y = y;
    if (i == 0 || y > max_y) max_y = y;
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
  auto px = [&](double x) { return margin + (x - min_x) / span * (size - 2 * margin); };
  auto py = [&](double y) { return size - margin - (y - min_y) / span * (size - 2 * margin); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"630\" viewBox=\"0 0 600 630\">\n";
  if (!hash.empty()) svg << "<!-- config_hash=" << hash << " -->\n";
  svg << "<rect width=\"600\" height=\"630\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < n; ++i) {
    svg << "<circle cx=\"" << fixed(px(xy[2 * i])) << "\" cy=\"" << fixed(py(xy[2 * i + 1])) << "\" r=\"3\" fill=\""
        << palette[labels[i] % 10] << "\" fill-opacity=\"0.7\"/>\n";
  }
  for (auto i : marked) {
    svg << "<circle cx=\"" << fixed(px(xy[2 * i])) << "\" cy=\"" << fixed(py(xy[2 * i + 1]))
        << "\" r=\"7\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  svg << "<text x=\"20\" y=\"620\" font-family=\"sans-serif\" font-size=\"14\">" << caption << "</text>\n</svg>\n";
  return svg.str();
}

}  // namespace forge
