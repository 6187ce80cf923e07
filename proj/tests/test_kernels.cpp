#include <numeric>

#include "doctest.h"
#include "forge/kernels.hpp"
#include "forge/rng.hpp"
#include "oracles.hpp"

using namespace forge;
using kernels::ConvGeom;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

const ConvGeom kShapes[] = {{1, 3, 8, 8}, {3, 5, 16, 16}, {4, 2, 6, 10}, {2, 2, 4, 4, 3, 1, 1}};

}  // namespace

TEST_CASE("forward convolution matches the direct loop") {
  Rng rng(1);
  for (const auto& g : kShapes) {
    const auto x = random_vec(g.in_size(), rng);
    const auto w = random_vec(g.weight_size(), rng);
    const auto b = random_vec(static_cast<std::size_t>(g.out_ch), rng);
    std::vector<double> y(g.out_size());
    kernels::serial::conv2d_forward(g, x, w, b, y);
    const auto want = oracle::conv2d(x, g.in_ch, g.in_h, g.in_w, w, b, g.out_ch, g.kernel, g.stride, g.pad);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("input gradient is the adjoint and equals the scatter transposed conv") {
  Rng rng(2);
  for (const auto& g : kShapes) {
    const auto x = random_vec(g.in_size(), rng);
    const auto w = random_vec(g.weight_size(), rng);
    const auto gy = random_vec(g.out_size(), rng);
    std::vector<double> y(g.out_size()), gx(g.in_size());
    kernels::serial::conv2d_forward(g, x, w, {}, y);
    kernels::serial::conv2d_backward_input(g, gy, w, gx);
    CHECK(dot(y, gy) == doctest::Approx(dot(x, gx)).epsilon(1e-12));
    if (g.kernel == 4 && g.stride == 2 && g.pad == 1) {
      // weights [out][in] of the forward conv read as [in][out] of the transposed one
      const auto want = oracle::conv2d_transposed(gy, g.out_ch, g.out_h(), g.out_w(), w, {}, g.in_ch, 4, 2, 1);
      for (std::size_t i = 0; i < gx.size(); ++i) CHECK(gx[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("weight gradient satisfies the bilinear identity") {
  Rng rng(3);
  for (const auto& g : kShapes) {
    const auto x = random_vec(g.in_size(), rng);
    const auto dw = random_vec(g.weight_size(), rng);
    const auto gy = random_vec(g.out_size(), rng);
    std::vector<double> gw(g.weight_size(), 0.0), gb(static_cast<std::size_t>(g.out_ch), 0.0);
    kernels::serial::conv2d_backward_weight(g, x, gy, gw, gb);
    const auto y = oracle::conv2d(x, g.in_ch, g.in_h, g.in_w, dw, {}, g.out_ch, g.kernel, g.stride, g.pad);
    CHECK(dot(gw, dw) == doctest::Approx(dot(y, gy)).epsilon(1e-12));
    const std::size_t plane = static_cast<std::size_t>(g.out_h()) * g.out_w();
    for (int o = 0; o < g.out_ch; ++o) {
      const double want = std::accumulate(gy.begin() + o * plane, gy.begin() + (o + 1) * plane, 0.0);
      CHECK(gb[o] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("serial and OpenMP kernels are bit-identical") {
  Rng rng(4);
  for (const auto& g : kShapes) {
    const auto x = random_vec(g.in_size(), rng);
    const auto w = random_vec(g.weight_size(), rng);
    const auto b = random_vec(static_cast<std::size_t>(g.out_ch), rng);
    const auto gy = random_vec(g.out_size(), rng);
    std::vector<double> ys(g.out_size()), yp(g.out_size());
    kernels::conv2d_forward(g, x, w, b, ys, Exec::Serial);
    kernels::conv2d_forward(g, x, w, b, yp, Exec::Parallel);
    CHECK(ys == yp);
    std::vector<double> gxs(g.in_size()), gxp(g.in_size());
    kernels::conv2d_backward_input(g, gy, w, gxs, Exec::Serial);
    kernels::conv2d_backward_input(g, gy, w, gxp, Exec::Parallel);
    CHECK(gxs == gxp);
    std::vector<double> gws(g.weight_size(), 0.5), gwp(g.weight_size(), 0.5);
    std::vector<double> gbs(static_cast<std::size_t>(g.out_ch), 0.0), gbp = gbs;
    kernels::conv2d_backward_weight(g, x, gy, gws, gbs, Exec::Serial);
    kernels::conv2d_backward_weight(g, x, gy, gwp, gbp, Exec::Parallel);
    CHECK(gws == gwp);
    CHECK(gbs == gbp);
  }
}

TEST_CASE("nearest row picks the lowest index on ties") {
  const std::vector<double> centers = {1, 0, -1, 0, 0, 1};
  const std::vector<double> p = {0, 0};
  const auto n = kernels::nearest_row(p, centers, 3, 2);
  CHECK(n.index == 0);
  CHECK(n.dist2 == 1.0);

  Rng rng(5);
  const auto pts = random_vec(200 * 3, rng);
  const auto cs = random_vec(7 * 3, rng);
  std::vector<kernels::Nearest> a(200), b(200);
  kernels::assign_nearest(pts, 200, cs, 7, 3, a, Exec::Serial);
  kernels::assign_nearest(pts, 200, cs, 7, 3, b, Exec::Parallel);
  for (int i = 0; i < 200; ++i) {
    CHECK(a[i].index == b[i].index);
    double best = 1e300;
    for (int c = 0; c < 7; ++c) {
      double d = 0;
      for (int j = 0; j < 3; ++j) d += (pts[i * 3 + j] - cs[c * 3 + j]) * (pts[i * 3 + j] - cs[c * 3 + j]);
      best = std::min(best, d);
    }
    CHECK(a[i].dist2 == doctest::Approx(best));
  }
}
