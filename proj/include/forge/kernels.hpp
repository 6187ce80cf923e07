#pragma once

#include <span>

#include "forge/exec.hpp"

namespace forge::kernels {

/// Geometry of a square-kernel 2D convolution over CHW tensors.
struct ConvGeom {
  int in_ch = 1;
  int out_ch = 1;
  int in_h = 1;
  int in_w = 1;
  int kernel = 4;
  int stride = 2;
  int pad = 1;

  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
  std::size_t in_size() const { return static_cast<std::size_t>(in_ch) * in_h * in_w; }
  std::size_t out_size() const { return static_cast<std::size_t>(out_ch) * out_h() * out_w(); }
  std::size_t weight_size() const { return static_cast<std::size_t>(out_ch) * in_ch * kernel * kernel; }
};

// Weights are laid out [out_ch][in_ch][k][k]. Every output element is summed
// in the same order by both variants, so serial and OpenMP results match
// bit for bit.

namespace serial {
/// y = conv(x, w) + b; `b` may be empty.
void conv2d_forward(const ConvGeom& g, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y);
/// gx = conv^T(gy, w), overwriting gx. Also the forward pass of a
/// transposed convolution.
void conv2d_backward_input(const ConvGeom& g, std::span<const double> gy, std::span<const double> w,
                           std::span<double> gx);
/// gw += dL/dw, gb += dL/db (gb may be empty).
void conv2d_backward_weight(const ConvGeom& g, std::span<const double> x, std::span<const double> gy,
                            std::span<double> gw, std::span<double> gb);
}  // namespace serial

namespace omp {
void conv2d_forward(const ConvGeom& g, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y);
void conv2d_backward_input(const ConvGeom& g, std::span<const double> gy, std::span<const double> w,
                           std::span<double> gx);
void conv2d_backward_weight(const ConvGeom& g, std::span<const double> x, std::span<const double> gy,
                            std::span<double> gw, std::span<double> gb);
}  // namespace omp

inline void conv2d_forward(const ConvGeom& g, std::span<const double> x, std::span<const double> w,
                           std::span<const double> b, std::span<double> y, Exec exec) {
  exec == Exec::Parallel ? omp::conv2d_forward(g, x, w, b, y) : serial::conv2d_forward(g, x, w, b, y);
}
inline void conv2d_backward_input(const ConvGeom& g, std::span<const double> gy, std::span<const double> w,
                                  std::span<double> gx, Exec exec) {
  exec == Exec::Parallel ? omp::conv2d_backward_input(g, gy, w, gx) : serial::conv2d_backward_input(g, gy, w, gx);
}
inline void conv2d_backward_weight(const ConvGeom& g, std::span<const double> x, std::span<const double> gy,
                                   std::span<double> gw, std::span<double> gb, Exec exec) {
  exec == Exec::Parallel ? omp::conv2d_backward_weight(g, x, gy, gw, gb)
                         : serial::conv2d_backward_weight(g, x, gy, gw, gb);
}

/// Index of the nearest row of `centers` (rows × dim) to `point`, lowest
/// index on ties, with its squared distance.
struct Nearest {
  int index = 0;
  double dist2 = 0.0;
};
Nearest nearest_row(std::span<const double> point, std::span<const double> centers, int rows, int dim);

/// nearest_row for every point (n × dim).
void assign_nearest(std::span<const double> points, int n, std::span<const double> centers, int rows, int dim,
                    std::span<Nearest> out, Exec exec);

}  // namespace forge::kernels
