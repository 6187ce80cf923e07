#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "forge/exec.hpp"
#include "forge/kernels.hpp"
#include "forge/raster.hpp"

namespace forge {

struct VqConfig {
  int input_side = 64;
  int latent_grid = 16;
  int embed_dim = 8;        // D
  int codebook_size = 64;   // K
  int hidden_channels = 16;
  double beta = 0.25;
  double learning_rate = 0.5;
  int epochs = 2000;
  int batch_size = 32;
  std::uint64_t seed = 0;

  /// Number of stride-2 stages between input and latent grid.
  int stages() const;
};

void validate(const VqConfig& config);

/// Latent map stored channels-first: values[d][y][x].
struct LatentMap {
  int grid = 0;
  int dim = 0;
  std::vector<double> values;

  double at(int d, int y, int x) const { return values[(static_cast<std::size_t>(d) * grid + y) * grid + x]; }
  /// Spatial-major layout with each D-vector contiguous: [(y*grid+x)*D + d].
  std::vector<double> flatten() const;
  static LatentMap unflatten(std::span<const double> flat, int grid, int dim);
};

struct Codebook {
  int size = 0;  // K
  int dim = 0;   // D
  std::vector<double> entries;

  std::span<const double> row(int k) const { return {entries.data() + static_cast<std::size_t>(k) * dim, static_cast<std::size_t>(dim)}; }
};

/// One convolution layer. `geom` is always the forward-convolution geometry;
/// a transposed layer maps geom's output space back to its input space and
/// stores weights as [layer_in][layer_out][k][k].
struct ConvLayer {
  kernels::ConvGeom geom;
  bool transposed = false;
  std::vector<double> weight;
  std::vector<double> bias;

  std::size_t input_size() const { return transposed ? geom.out_size() : geom.in_size(); }
  std::size_t output_size() const { return transposed ? geom.in_size() : geom.out_size(); }
};

/// All learnable tensors. Also used, zero-filled, as a gradient accumulator.
struct Parameters {
  std::vector<ConvLayer> encoder;
  std::vector<ConvLayer> decoder;
  Codebook codebook;

  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  std::size_t count() const;
  Parameters zeros_like() const;
};

struct VqModel {
  VqConfig config;
  Parameters params;

  /// Seeded He-uniform convolution weights, zero biases, codebook uniform in
  /// ±1/K.
  static VqModel initialize(const VqConfig& config);
  static VqModel zeros(const VqConfig& config);
};

struct Quantized {
  LatentMap z_q;
  std::vector<int> indices;  // grid × grid, row-major
};

struct LossParts {
  double total = 0.0;
  double recon = 0.0;
  double codebook = 0.0;
  double commit = 0.0;
};

struct LatentCode {
  std::string building_id;
  std::vector<int> indices;
  std::vector<double> embedding;  // flattened quantized map
};

LatentMap encode(const Heightmap& x, const VqModel& model);

/// Nearest codebook row per spatial vector (Euclidean, lowest index wins ties).
Quantized quantize(const LatentMap& z_e, const Codebook& codebook);

/// Decoder followed by a sigmoid, so outputs lie in (0, 1).
Heightmap decode(const LatentMap& z_q, const VqModel& model);

/// recon = mean (x - x̂)², codebook = mean (sg(z_e) - z_q)²,
/// commit = mean (z_e - sg(z_q))², total = recon + codebook + beta·commit.
LossParts loss(std::span<const double> x, std::span<const double> x_hat, const LatentMap& z_e,
               const LatentMap& z_q, double beta);

/// Gradients exposed at the quantization boundary for the first batch item.
struct BoundaryProbe {
  std::vector<double> grad_z_q;        // dL/dz_q from the decoder
  std::vector<double> grad_z_e_recon;  // reconstruction part of dL/dz_e
};

struct Gradients {
  Parameters grads;
  LossParts loss;  // mean over the batch
};

/// Reverse-mode gradients of the batch-mean loss. Quantization uses the
/// straight-through estimator.
Gradients compute_gradients(const VqModel& model, std::span<const Heightmap> batch, Exec exec = Exec::Parallel,
                            BoundaryProbe* probe = nullptr);

/// One plain gradient-descent step; throws NumericalError on a non-finite
/// loss. `where` is included in the diagnostic.
LossParts backward_step(VqModel& model, std::span<const Heightmap> batch, double learning_rate,
                        Exec exec = Exec::Parallel, const std::string& where = {});

struct TrainCurves {
  std::vector<double> train_mse;
  std::vector<double> test_mse;
};

struct TrainOptions {
  Exec exec = Exec::Parallel;
  std::function<void(int epoch, double train_mse, double test_mse)> on_epoch;
};

struct TrainResult {
  VqModel model;
  TrainCurves curves;
};

/// Seeded plain gradient descent. train_mse is the mean batch reconstruction
/// error over the epoch; test_mse is evaluated after the epoch.
TrainResult train(std::span<const Heightmap> train_set, std::span<const Heightmap> test_set, const VqConfig& config,
                  const TrainOptions& options = {});

/// Mean per-pixel squared error of encode → quantize → decode.
double reconstruction_error(const VqModel& model, std::span<const Heightmap> maps, Exec exec = Exec::Parallel);

Heightmap reconstruct(const Heightmap& x, const VqModel& model);

std::vector<LatentCode> encode_all(std::span<const Heightmap> maps, const VqModel& model, Exec exec = Exec::Parallel);

}  // namespace forge
