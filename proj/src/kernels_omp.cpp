#include "conv_detail.hpp"

namespace forge::kernels::omp {

void conv2d_forward(const ConvGeom& g, std::span<const double> x, std::span<const double> w,
                    std::span<const double> b, std::span<double> y) {
  const int oh = g.out_h();
  const int ow = g.out_w();
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < g.out_ch; ++oc) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        y[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = detail::conv_output(g, x, w, b, oc, oy, ox);
      }
    }
  }
}

void conv2d_backward_input(const ConvGeom& g, std::span<const double> gy, std::span<const double> w,
                           std::span<double> gx) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int ic = 0; ic < g.in_ch; ++ic) {
    for (int iy = 0; iy < g.in_h; ++iy) {
      for (int ix = 0; ix < g.in_w; ++ix) {
        gx[(static_cast<std::size_t>(ic) * g.in_h + iy) * g.in_w + ix] = detail::conv_input_grad(g, gy, w, ic, iy, ix);
      }
    }
  }
}

void conv2d_backward_weight(const ConvGeom& g, std::span<const double> x, std::span<const double> gy,
                            std::span<double> gw, std::span<double> gb) {
  const int k = g.kernel;
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < g.out_ch; ++oc) {
    for (int ic = 0; ic < g.in_ch; ++ic) {
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          gw[((static_cast<std::size_t>(oc) * g.in_ch + ic) * k + ky) * k + kx] +=
              detail::conv_weight_grad(g, x, gy, oc, ic, ky, kx);
        }
      }
    }
  }
  if (!gb.empty()) {
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < g.out_ch; ++oc) gb[oc] += detail::channel_sum(g, gy, oc);
  }
}

}  // namespace forge::kernels::omp
