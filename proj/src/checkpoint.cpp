#include "forge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace forge {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "FORGEVQ1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::string_view in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

json config_json(const VqConfig& c) {
  return {{"input_side", c.input_side},       {"latent_grid", c.latent_grid},   {"embed_dim", c.embed_dim},
          {"codebook_size", c.codebook_size}, {"hidden_channels", c.hidden_channels}, {"beta", c.beta},
          {"learning_rate", c.learning_rate}, {"epochs", c.epochs},             {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

VqConfig config_from_json(const json& j) {
  VqConfig c;
  c.input_side = j.at("input_side").get<int>();
  c.latent_grid = j.at("latent_grid").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.codebook_size = j.at("codebook_size").get<int>();
  c.hidden_channels = j.at("hidden_channels").get<int>();
  c.beta = j.at("beta").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<std::string> tensor_names(const Parameters& p) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < p.encoder.size(); ++i) {
    names.push_back("encoder." + std::to_string(i) + ".weight");
    names.push_back("encoder." + std::to_string(i) + ".bias");
  }
  for (std::size_t i = 0; i < p.decoder.size(); ++i) {
    names.push_back("decoder." + std::to_string(i) + ".weight");
    names.push_back("decoder." + std::to_string(i) + ".bias");
  }
  names.push_back("codebook");
  return names;
}

}  // namespace

std::string encode_checkpoint(const VqModel& model, const std::string& config_hash) {
  const auto blocks = model.params.blocks();
  const auto names = tensor_names(model.params);
  json tensors = json::array();
  std::uint64_t offset = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    tensors.push_back({{"name", names[b]}, {"count", blocks[b].size()}, {"offset", offset}});
    offset += blocks[b].size() * sizeof(double);
  }
  json header = {{"format", "forge-vqae"}, {"version", 1}, {"config", config_json(model.config)},
                 {"tensors", tensors}, {"data_bytes", offset}};
  if (!config_hash.empty()) header["config_hash"] = config_hash;
  const std::string text = header.dump();

  std::string out(kMagic);
  put_u64(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const auto& block : blocks) {
    for (double v : block) put_f64(out, v);
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const VqModel& model, const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << encode_checkpoint(model, config_hash);
}

VqModel decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 8) != kMagic) throw DataError("not a forge checkpoint");
  const std::uint64_t header_len = get_u64(bytes.substr(8, 8));
  if (bytes.size() < 16 + header_len) throw DataError("truncated checkpoint header");
  json header;
  try {
    header = json::parse(bytes.substr(16, header_len));
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  }
  VqModel model = VqModel::zeros(config_from_json(header.at("config")));
  const std::string_view data = bytes.substr(16 + header_len);
  auto blocks = model.params.blocks();
  const auto& tensors = header.at("tensors");
  if (tensors.size() != blocks.size()) throw DataError("checkpoint tensor count does not match its config");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto count = tensors[b].at("count").get<std::size_t>();
    const auto offset = tensors[b].at("offset").get<std::size_t>();
    if (count != blocks[b].size() || offset + count * 8 > data.size()) {
      throw DataError("checkpoint tensor " + tensors[b].at("name").get<std::string>() + " has the wrong shape");
    }
    for (std::size_t i = 0; i < count; ++i) {
      blocks[b][i] = std::bit_cast<double>(get_u64(data.substr(offset + i * 8, 8)));
    }
  }
  return model;
}

VqModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace forge
