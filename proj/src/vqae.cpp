#include "forge/vqae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "forge/rng.hpp"

namespace forge {

namespace {

constexpr int kKernel = 4;
constexpr int kStride = 2;
constexpr int kPad = 1;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void apply_layer(const ConvLayer& layer, std::span<const double> in, std::span<double> out, Exec exec) {
  if (!layer.transposed) {
    kernels::conv2d_forward(layer.geom, in, layer.weight, layer.bias, out, exec);
    return;
  }
  kernels::conv2d_backward_input(layer.geom, in, layer.weight, out, exec);
  const std::size_t plane = static_cast<std::size_t>(layer.geom.in_h) * layer.geom.in_w;
  for (int c = 0; c < layer.geom.in_ch; ++c) {
    for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] += layer.bias[c];
  }
}

// Accumulates parameter gradients into `grad` and, when `g_in` is non-empty,
// writes the gradient with respect to the layer input.
void layer_backward(const ConvLayer& layer, std::span<const double> in, std::span<const double> g_out,
                    std::span<double> g_in, ConvLayer& grad, Exec exec) {
  if (!layer.transposed) {
    kernels::conv2d_backward_weight(layer.geom, in, g_out, grad.weight, grad.bias, exec);
    if (!g_in.empty()) kernels::conv2d_backward_input(layer.geom, g_out, layer.weight, g_in, exec);
    return;
  }
  kernels::conv2d_backward_weight(layer.geom, g_out, in, grad.weight, {}, exec);
  const std::size_t plane = static_cast<std::size_t>(layer.geom.in_h) * layer.geom.in_w;
  for (int c = 0; c < layer.geom.in_ch; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += g_out[c * plane + i];
    grad.bias[c] += acc;
  }
  if (!g_in.empty()) kernels::conv2d_forward(layer.geom, g_out, layer.weight, {}, g_in, exec);
}

ConvLayer make_layer(int in_ch, int out_ch, int in_grid, bool transposed) {
  ConvLayer layer;
  layer.transposed = transposed;
  if (!transposed) {
    layer.geom = {in_ch, out_ch, in_grid, in_grid, kKernel, kStride, kPad};
    layer.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
  } else {
    // Forward-conv geometry runs from the upsampled output back to the input.
    layer.geom = {out_ch, in_ch, in_grid * kStride, in_grid * kStride, kKernel, kStride, kPad};
    layer.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
  }
  layer.weight.assign(layer.geom.weight_size(), 0.0);
  return layer;
}

Parameters build_architecture(const VqConfig& c) {
  const int n = c.stages();
  Parameters p;
  for (int i = 0; i < n; ++i) {
    const int in_ch = i == 0 ? 1 : c.hidden_channels;
    const int out_ch = i == n - 1 ? c.embed_dim : c.hidden_channels;
    p.encoder.push_back(make_layer(in_ch, out_ch, c.input_side >> i, false));
  }
  for (int j = 0; j < n; ++j) {
    const int in_ch = j == 0 ? c.embed_dim : c.hidden_channels;
    const int out_ch = j == n - 1 ? 1 : c.hidden_channels;
    p.decoder.push_back(make_layer(in_ch, out_ch, c.latent_grid << j, true));
  }
  p.codebook = {c.codebook_size, c.embed_dim,
                std::vector<double>(static_cast<std::size_t>(c.codebook_size) * c.embed_dim, 0.0)};
  return p;
}

void check_input(const Heightmap& x, const VqConfig& c) {
  if (x.side != c.input_side || x.pixels.size() != static_cast<std::size_t>(c.input_side) * c.input_side) {
    throw DataError("heightmap " + x.building_id + " is " + std::to_string(x.side) + "px; model expects " +
                    std::to_string(c.input_side) + "px");
  }
}

void check_latent(const LatentMap& z, const VqConfig& c) {
  if (z.grid != c.latent_grid || z.dim != c.embed_dim ||
      z.values.size() != static_cast<std::size_t>(c.latent_grid) * c.latent_grid * c.embed_dim) {
    throw DataError("latent map shape does not match the model configuration");
  }
}

// Activations kept for the backward pass. enc[0] is the input, enc[i+1] the
// output of encoder layer i after its activation; dec likewise with dec[0]
// the quantized latent and dec.back() the sigmoid output.
struct Trace {
  std::vector<std::vector<double>> enc;
  std::vector<std::vector<double>> dec;
  LatentMap z_e;
  Quantized q;
};

LatentMap run_encoder(const Heightmap& x, const VqModel& model, Exec exec, std::vector<std::vector<double>>* acts) {
  const auto& layers = model.params.encoder;
  std::vector<double> cur = x.pixels;
  if (acts) acts->push_back(cur);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::vector<double> next(layers[i].output_size());
    apply_layer(layers[i], cur, next, exec);
    if (i + 1 < layers.size()) {
      for (auto& v : next) v = std::max(v, 0.0);
    }
    cur = std::move(next);
    if (acts) acts->push_back(cur);
  }
  return {model.config.latent_grid, model.config.embed_dim, std::move(cur)};
}

std::vector<double> run_decoder(const LatentMap& z, const VqModel& model, Exec exec,
                                std::vector<std::vector<double>>* acts) {
  const auto& layers = model.params.decoder;
  std::vector<double> cur = z.values;
  if (acts) acts->push_back(cur);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    std::vector<double> next(layers[i].output_size());
    apply_layer(layers[i], cur, next, exec);
    if (i + 1 < layers.size()) {
      for (auto& v : next) v = std::max(v, 0.0);
    } else {
      for (auto& v : next) v = sigmoid(v);
    }
    cur = std::move(next);
    if (acts) acts->push_back(cur);
  }
  return cur;
}

// Gradient of (scale × per-sample loss) accumulated into `g`.
LossParts sample_gradient(const VqModel& model, const Heightmap& x, double scale, Parameters& g, Exec exec,
                          BoundaryProbe* probe) {
  const VqConfig& c = model.config;
  Trace t;
  t.z_e = run_encoder(x, model, exec, &t.enc);
  t.q = quantize(t.z_e, model.params.codebook);
  run_decoder(t.q.z_q, model, exec, &t.dec);
  const std::vector<double>& x_hat = t.dec.back();
  const LossParts parts = loss(x.pixels, x_hat, t.z_e, t.q.z_q, c.beta);

  // Reconstruction: d mean((x̂ - x)²) through the sigmoid.
  const double pixels = static_cast<double>(x_hat.size());
  std::vector<double> grad(x_hat.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double s = x_hat[i];
    grad[i] = scale * 2.0 * (s - x.pixels[i]) / pixels * s * (1.0 - s);
  }
  const auto& dec = model.params.decoder;
  for (std::size_t li = dec.size(); li-- > 0;) {
    std::vector<double> g_in(dec[li].input_size());
    layer_backward(dec[li], t.dec[li], grad, g_in, g.decoder[li], exec);
    if (li > 0) {
      for (std::size_t i = 0; i < g_in.size(); ++i) {
        if (t.dec[li][i] <= 0.0) g_in[i] = 0.0;
      }
    }
    grad = std::move(g_in);
  }
  // grad is now dL/dz_q. Straight-through: copied unchanged onto z_e.
  if (probe) {
    probe->grad_z_q = grad;
    probe->grad_z_e_recon = grad;
  }

  const std::size_t elems = t.z_e.values.size();
  const int grid2 = c.latent_grid * c.latent_grid;
  const double unit = scale * 2.0 / static_cast<double>(elems);
  for (int d = 0; d < c.embed_dim; ++d) {
    for (int p = 0; p < grid2; ++p) {
      const std::size_t i = static_cast<std::size_t>(d) * grid2 + p;
      const double diff = t.z_e.values[i] - t.q.z_q.values[i];
      grad[i] += c.beta * unit * diff;
      g.codebook.entries[static_cast<std::size_t>(t.q.indices[p]) * c.embed_dim + d] -= unit * diff;
    }
  }

  const auto& enc = model.params.encoder;
  for (std::size_t li = enc.size(); li-- > 0;) {
    std::vector<double> g_in;
    if (li > 0) g_in.resize(enc[li].input_size());
    layer_backward(enc[li], t.enc[li], grad, g_in, g.encoder[li], exec);
    if (li > 0) {
      for (std::size_t i = 0; i < g_in.size(); ++i) {
        if (t.enc[li][i] <= 0.0) g_in[i] = 0.0;
      }
    }
    grad = std::move(g_in);
  }
  return parts;
}

void add_into(Parameters& dst, const Parameters& src) {
  auto d = dst.blocks();
  auto s = src.blocks();
  for (std::size_t b = 0; b < d.size(); ++b) {
    for (std::size_t i = 0; i < d[b].size(); ++i) d[b][i] += s[b][i];
  }
}

}  // namespace

int VqConfig::stages() const {
  if (latent_grid <= 0 || input_side % latent_grid != 0) return -1;
  int ratio = input_side / latent_grid;
  int n = 0;
  while (ratio > 1 && ratio % 2 == 0) {
    ratio /= 2;
    ++n;
  }
  return ratio == 1 ? n : -1;
}

void validate(const VqConfig& c) {
  if (c.codebook_size < 2) throw ConfigError("codebook_size must be >= 2");
  if (c.embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
  if (c.hidden_channels < 1) throw ConfigError("hidden_channels must be >= 1");
  if (c.stages() < 1) {
    throw ConfigError("latent_grid must divide input_side by a power of two >= 2");
  }
  if (c.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(c.beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

std::vector<double> LatentMap::flatten() const {
  const int g2 = grid * grid;
  std::vector<double> flat(values.size());
  for (int p = 0; p < g2; ++p) {
    for (int d = 0; d < dim; ++d) flat[static_cast<std::size_t>(p) * dim + d] = values[static_cast<std::size_t>(d) * g2 + p];
  }
  return flat;
}

LatentMap LatentMap::unflatten(std::span<const double> flat, int grid, int dim) {
  const int g2 = grid * grid;
  if (flat.size() != static_cast<std::size_t>(g2) * dim) throw DataError("embedding length does not match latent shape");
  LatentMap z{grid, dim, std::vector<double>(flat.size())};
  for (int p = 0; p < g2; ++p) {
    for (int d = 0; d < dim; ++d) z.values[static_cast<std::size_t>(d) * g2 + p] = flat[static_cast<std::size_t>(p) * dim + d];
  }
  return z;
}

std::vector<std::span<double>> Parameters::blocks() {
  std::vector<std::span<double>> out;
  for (auto* side : {&encoder, &decoder}) {
    for (auto& l : *side) {
      out.emplace_back(l.weight);
      out.emplace_back(l.bias);
    }
  }
  out.emplace_back(codebook.entries);
  return out;
}

std::vector<std::span<const double>> Parameters::blocks() const {
  std::vector<std::span<const double>> out;
  for (const auto* side : {&encoder, &decoder}) {
    for (const auto& l : *side) {
      out.emplace_back(l.weight);
      out.emplace_back(l.bias);
    }
  }
  out.emplace_back(codebook.entries);
  return out;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for (const auto& b : blocks()) n += b.size();
  return n;
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  for (auto b : z.blocks()) std::fill(b.begin(), b.end(), 0.0);
  return z;
}

VqModel VqModel::zeros(const VqConfig& config) {
  validate(config);
  return {config, build_architecture(config)};
}

VqModel VqModel::initialize(const VqConfig& config) {
  VqModel m = zeros(config);
  Rng rng(derive_seed(config.seed, "vq-init"));
  auto init_layer = [&](ConvLayer& l) {
    const int layer_in = l.transposed ? l.geom.out_ch : l.geom.in_ch;
    double fan_in = static_cast<double>(layer_in) * l.geom.kernel * l.geom.kernel;
    if (l.transposed) fan_in /= static_cast<double>(l.geom.stride * l.geom.stride);
    const double a = std::sqrt(6.0 / fan_in);
    for (auto& w : l.weight) w = rng.uniform(-a, a);
  };
  for (auto& l : m.params.encoder) init_layer(l);
  for (auto& l : m.params.decoder) init_layer(l);
  const double span = 1.0 / config.codebook_size;
  for (auto& e : m.params.codebook.entries) e = rng.uniform(-span, span);
  return m;
}

LatentMap encode(const Heightmap& x, const VqModel& model) {
  check_input(x, model.config);
  return run_encoder(x, model, Exec::Serial, nullptr);
}

Quantized quantize(const LatentMap& z_e, const Codebook& codebook) {
  if (z_e.dim != codebook.dim) throw DataError("latent dimension does not match codebook dimension");
  const int g2 = z_e.grid * z_e.grid;
  Quantized q{{z_e.grid, z_e.dim, std::vector<double>(z_e.values.size())}, std::vector<int>(static_cast<std::size_t>(g2))};
  std::vector<double> v(static_cast<std::size_t>(z_e.dim));
  for (int p = 0; p < g2; ++p) {
    for (int d = 0; d < z_e.dim; ++d) {
      v[d] = z_e.values[static_cast<std::size_t>(d) * g2 + p];
      if (!std::isfinite(v[d])) throw NumericalError("non-finite latent value during quantization");
    }
    const auto best = kernels::nearest_row(v, codebook.entries, codebook.size, codebook.dim);
    q.indices[p] = best.index;
    const auto row = codebook.row(best.index);
    for (int d = 0; d < z_e.dim; ++d) q.z_q.values[static_cast<std::size_t>(d) * g2 + p] = row[d];
  }
  return q;
}

Heightmap decode(const LatentMap& z_q, const VqModel& model) {
  check_latent(z_q, model.config);
  return {"", model.config.input_side, run_decoder(z_q, model, Exec::Serial, nullptr)};
}

LossParts loss(std::span<const double> x, std::span<const double> x_hat, const LatentMap& z_e, const LatentMap& z_q,
               double beta) {
  if (x.size() != x_hat.size() || x.empty()) throw DataError("loss: image shapes differ");
  if (z_e.values.size() != z_q.values.size() || z_e.values.empty()) throw DataError("loss: latent shapes differ");
  LossParts p;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x_hat[i] - x[i];
    p.recon += d * d;
  }
  p.recon /= static_cast<double>(x.size());
  for (std::size_t i = 0; i < z_e.values.size(); ++i) {
    const double d = z_e.values[i] - z_q.values[i];
    p.codebook += d * d;
  }
  p.codebook /= static_cast<double>(z_e.values.size());
  // Forward values coincide; the two terms differ only in where gradients flow.
  p.commit = p.codebook;
  p.total = p.recon + p.codebook + beta * p.commit;
  return p;
}

Gradients compute_gradients(const VqModel& model, std::span<const Heightmap> batch, Exec exec, BoundaryProbe* probe) {
  if (batch.empty()) throw DataError("empty batch");
  for (const auto& x : batch) check_input(x, model.config);
  const auto n = static_cast<long>(batch.size());
  const double scale = 1.0 / static_cast<double>(n);

  std::vector<Parameters> per_sample(batch.size(), model.params.zeros_like());
  std::vector<LossParts> parts(batch.size());
  auto one = [&](long i) {
    parts[i] = sample_gradient(model, batch[i], scale, per_sample[i], Exec::Serial, i == 0 ? probe : nullptr);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }

  Gradients out{model.params.zeros_like(), {}};
  for (long i = 0; i < n; ++i) {
    add_into(out.grads, per_sample[i]);
    out.loss.total += parts[i].total * scale;
    out.loss.recon += parts[i].recon * scale;
    out.loss.codebook += parts[i].codebook * scale;
    out.loss.commit += parts[i].commit * scale;
  }
  return out;
}

LossParts backward_step(VqModel& model, std::span<const Heightmap> batch, double learning_rate, Exec exec,
                        const std::string& where) {
  Gradients g = compute_gradients(model, batch, exec);
  if (!std::isfinite(g.loss.total)) {
    throw NumericalError("non-finite loss" + (where.empty() ? std::string() : " at " + where));
  }
  auto params = model.params.blocks();
  const auto grads = std::as_const(g.grads).blocks();
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b].size(); ++i) params[b][i] -= learning_rate * grads[b][i];
  }
  return g.loss;
}

TrainResult train(std::span<const Heightmap> train_set, std::span<const Heightmap> test_set, const VqConfig& config,
                  const TrainOptions& options) {
  validate(config);
  if (train_set.empty()) throw DataError("empty training set");
  TrainResult result{VqModel::initialize(config), {}};
  VqModel& model = result.model;

  Rng order_rng(derive_seed(config.seed, "vq-batches"));
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<Heightmap> batch;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span(order));
    double recon_sum = 0.0;
    int batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      const std::string where = "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no);
      const LossParts parts = backward_step(model, batch, config.learning_rate, options.exec, where);
      if (parts.total > 1e6) throw NumericalError("training diverged (loss " + std::to_string(parts.total) + ") at " + where);
      recon_sum += parts.recon * static_cast<double>(end - start);
    }
    const double train_mse = recon_sum / static_cast<double>(order.size());
    const double test_mse = test_set.empty() ? 0.0 : reconstruction_error(model, test_set, options.exec);
    if (!std::isfinite(test_mse)) throw NumericalError("non-finite test error at epoch " + std::to_string(epoch));
    result.curves.train_mse.push_back(train_mse);
    result.curves.test_mse.push_back(test_mse);
    if (options.on_epoch) options.on_epoch(epoch, train_mse, test_mse);
  }
  return result;
}

Heightmap reconstruct(const Heightmap& x, const VqModel& model) {
  const Quantized q = quantize(encode(x, model), model.params.codebook);
  Heightmap out = decode(q.z_q, model);
  out.building_id = x.building_id;
  return out;
}

double reconstruction_error(const VqModel& model, std::span<const Heightmap> maps, Exec exec) {
  if (maps.empty()) throw DataError("reconstruction_error: no samples");
  const auto n = static_cast<long>(maps.size());
  std::vector<double> mse(maps.size());
  auto one = [&](long i) {
    const Heightmap r = reconstruct(maps[i], model);
    double acc = 0.0;
    for (std::size_t p = 0; p < r.pixels.size(); ++p) {
      const double d = r.pixels[p] - maps[i].pixels[p];
      acc += d * d;
    }
    mse[i] = acc / static_cast<double>(r.pixels.size());
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }
  double total = 0.0;
  for (double m : mse) total += m;
  return total / static_cast<double>(n);
}

std::vector<LatentCode> encode_all(std::span<const Heightmap> maps, const VqModel& model, Exec exec) {
  const auto n = static_cast<long>(maps.size());
  std::vector<LatentCode> codes(maps.size());
  auto one = [&](long i) {
    const Quantized q = quantize(encode(maps[i], model), model.params.codebook);
    codes[i] = {maps[i].building_id, q.indices, q.z_q.flatten()};
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }
  return codes;
}

}  // namespace forge
