#pragma once

// Per-element bodies shared by the serial and OpenMP kernels.

#include <span>

#include "forge/kernels.hpp"

namespace forge::kernels::detail {

inline double conv_output(const ConvGeom& g, std::span<const double> x, std::span<const double> w,
                          std::span<const double> b, int oc, int oy, int ox) {
  const int k = g.kernel;
  double acc = b.empty() ? 0.0 : b[oc];
  for (int ic = 0; ic < g.in_ch; ++ic) {
    const double* xc = x.data() + static_cast<std::size_t>(ic) * g.in_h * g.in_w;
    const double* wc = w.data() + (static_cast<std::size_t>(oc) * g.in_ch + ic) * k * k;
    for (int ky = 0; ky < k; ++ky) {
      const int iy = oy * g.stride - g.pad + ky;
      if (iy < 0 || iy >= g.in_h) continue;
      for (int kx = 0; kx < k; ++kx) {
        const int ix = ox * g.stride - g.pad + kx;
        if (ix < 0 || ix >= g.in_w) continue;
        acc += xc[iy * g.in_w + ix] * wc[ky * k + kx];
      }
    }
  }
  return acc;
}

inline double conv_input_grad(const ConvGeom& g, std::span<const double> gy, std::span<const double> w, int ic,
                              int iy, int ix) {
  const int k = g.kernel;
  const int oh = g.out_h();
  const int ow = g.out_w();
  double acc = 0.0;
  for (int oc = 0; oc < g.out_ch; ++oc) {
    const double* gc = gy.data() + static_cast<std::size_t>(oc) * oh * ow;
    const double* wc = w.data() + (static_cast<std::size_t>(oc) * g.in_ch + ic) * k * k;
    for (int ky = 0; ky < k; ++ky) {
      const int ty = iy + g.pad - ky;
      if (ty < 0 || ty % g.stride != 0) continue;
      const int oy = ty / g.stride;
      if (oy >= oh) continue;
      for (int kx = 0; kx < k; ++kx) {
        const int tx = ix + g.pad - kx;
        if (tx < 0 || tx % g.stride != 0) continue;
        const int ox = tx / g.stride;
        if (ox >= ow) continue;
        acc += gc[oy * ow + ox] * wc[ky * k + kx];
      }
    }
  }
  return acc;
}

inline double conv_weight_grad(const ConvGeom& g, std::span<const double> x, std::span<const double> gy, int oc,
                               int ic, int ky, int kx) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const double* xc = x.data() + static_cast<std::size_t>(ic) * g.in_h * g.in_w;
  const double* gc = gy.data() + static_cast<std::size_t>(oc) * oh * ow;
  double acc = 0.0;
  for (int oy = 0; oy < oh; ++oy) {
    const int iy = oy * g.stride - g.pad + ky;
    if (iy < 0 || iy >= g.in_h) continue;
    for (int ox = 0; ox < ow; ++ox) {
      const int ix = ox * g.stride - g.pad + kx;
      if (ix < 0 || ix >= g.in_w) continue;
      acc += gc[oy * ow + ox] * xc[iy * g.in_w + ix];
    }
  }
  return acc;
}

inline double channel_sum(const ConvGeom& g, std::span<const double> gy, int oc) {
  const std::size_t plane = static_cast<std::size_t>(g.out_h()) * g.out_w();
  double acc = 0.0;
  for (std::size_t i = 0; i < plane; ++i) acc += gy[oc * plane + i];
  return acc;
}

}  // namespace forge::kernels::detail
