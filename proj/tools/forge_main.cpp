#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "forge/error.hpp"
#include "forge/log.hpp"
#include "forge/pipeline.hpp"
#include "forge/synthetic.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> k;
  std::optional<int> epochs;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Pipeline config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "Override the global seed");
  cmd->add_option("--out", o.out, "Override the output directory");
  cmd->add_option("--k", o.k, "Fix the cluster count instead of using the elbow");
  cmd->add_option("--epochs", o.epochs, "Override the training epochs");
}

forge::PipelineConfig effective(const Overrides& o) {
  forge::PipelineConfig c = forge::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out_dir = std::filesystem::absolute(*o.out).string();
  if (o.k) {
    if (*o.k < 1) throw forge::ConfigError("--k must be at least 1");
    c.fixed_k = *o.k;
  }
  if (o.epochs) c.vq.epochs = *o.epochs;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: building archetypes from footprint heightmaps"};
  app.require_subcommand(1);

  Overrides overrides;
  const char* stages[][2] = {
      {"ingest", "Parse and filter the building inventory"},
      {"rasterize", "Render heightmaps and split train/test"},
      {"train", "Train the vector-quantized autoencoder"},
      {"cluster", "Cluster latent codes and choose k"},
      {"archetypes", "Select sampled and averaged archetypes"},
      {"energy", "Aggregate energy and compare against the baseline"},
      {"all", "Run every stage in order"},
  };
  for (const auto& [name, help] : stages) add_common(app.add_subcommand(name, help), overrides);

  std::string synth_dir;
  int synth_epochs = 15;
  forge::SyntheticOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic district bundle");
  synth_cmd->add_option("--dir", synth_dir, "Destination directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--per-family", synth.per_family, "Buildings per footprint family");
  synth_cmd->add_option("--epochs", synth_epochs, "Training epochs written into config.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth_cmd->parsed()) {
      forge::write_synthetic_bundle(synth_dir, synth, synth_epochs);
      forge::log::info("synth: wrote bundle to " + synth_dir);
      return 0;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    forge::run_stage(name, effective(overrides));
    return 0;
  } catch (const forge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
