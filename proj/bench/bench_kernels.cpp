// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "forge/kernels.hpp"
#include "forge/raster.hpp"
#include "forge/rng.hpp"

using namespace forge;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

const kernels::ConvGeom kGeom{16, 16, 64, 64};

void BM_ConvForward(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  const auto x = random_vec(kGeom.in_size(), 1);
  const auto w = random_vec(kGeom.weight_size(), 2);
  const auto b = random_vec(16, 3);
  std::vector<double> y(kGeom.out_size());
  for (auto _ : state) {
    kernels::conv2d_forward(kGeom, x, w, b, y, exec);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_ConvBackwardInput(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  const auto gy = random_vec(kGeom.out_size(), 1);
  const auto w = random_vec(kGeom.weight_size(), 2);
  std::vector<double> gx(kGeom.in_size());
  for (auto _ : state) {
    kernels::conv2d_backward_input(kGeom, gy, w, gx, exec);
    benchmark::DoNotOptimize(gx.data());
  }
}

void BM_ConvBackwardWeight(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  const auto x = random_vec(kGeom.in_size(), 1);
  const auto gy = random_vec(kGeom.out_size(), 2);
  std::vector<double> gw(kGeom.weight_size()), gb(16);
  for (auto _ : state) {
    kernels::conv2d_backward_weight(kGeom, x, gy, gw, gb, exec);
    benchmark::DoNotOptimize(gw.data());
  }
}

void BM_AssignNearest(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  const int n = 2000, k = 8, dim = 2048;
  const auto pts = random_vec(static_cast<std::size_t>(n) * dim, 1);
  const auto cs = random_vec(static_cast<std::size_t>(k) * dim, 2);
  std::vector<kernels::Nearest> out(n);
  for (auto _ : state) {
    kernels::assign_nearest(pts, n, cs, k, dim, out, exec);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_RasterizeBatch(benchmark::State& state) {
  const auto exec = static_cast<Exec>(state.range(0));
  Rng rng(4);
  std::vector<BuildingRecord> recs(500);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const double w = rng.uniform(10, 60), h = rng.uniform(10, 60);
    recs[i].id = std::to_string(i);
    recs[i].footprint.rings.push_back({{0, 0}, {w, 0}, {w, h}, {0, h}, {0, 0}});
    recs[i].height_m = rng.uniform(3, 90);
  }
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_all(recs, GridSpec{}, exec));
}

}  // namespace

// Argument 0 is the serial reference, 1 the OpenMP variant.
BENCHMARK(BM_ConvForward)->Arg(0)->Arg(1);
BENCHMARK(BM_ConvBackwardInput)->Arg(0)->Arg(1);
BENCHMARK(BM_ConvBackwardWeight)->Arg(0)->Arg(1);
BENCHMARK(BM_AssignNearest)->Arg(0)->Arg(1);
BENCHMARK(BM_RasterizeBatch)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
