#include <algorithm>
#include <cmath>
#include <numeric>

#include "criteria.hpp"
#include "doctest.h"
#include "forge/cluster.hpp"
#include "forge/rng.hpp"
#include "oracles.hpp"

using namespace forge;

namespace {

PointMatrix blob_points(int per, std::vector<int>* truth, std::uint64_t seed) {
  Rng rng(seed);
  const double c[3][2] = {{0, 0}, {5, 0}, {0, 5}};
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < per; ++i) {
      rows.push_back({c[k][0] + 0.1 * rng.normal(), c[k][1] + 0.1 * rng.normal()});
      if (truth) truth->push_back(k);
    }
  return PointMatrix::from_rows(rows);
}

}  // namespace

TEST_CASE("clustering oracle suite") {
  const auto o = criteria::clustering_oracle();
  INFO(o.detail);
  CHECK(o.pass);
}

TEST_CASE("k-means invariants") {
  const auto pts = blob_points(30, nullptr, 1);
  const auto m = kmeans(pts, 3, 9);
  CHECK(m.k == 3);
  CHECK(m.assignments.size() == 90u);
  CHECK(m.wcss == doctest::Approx(wcss_of(pts, m.assignments, m.centroids)));
  for (int s : m.cluster_sizes()) CHECK(s > 0);
  // each point sits with its nearest centroid
  for (int i = 0; i < pts.n; ++i) {
    double best = 1e300;
    int arg = -1;
    for (int c = 0; c < 3; ++c) {
      double d = 0;
      for (int j = 0; j < 2; ++j) d += (pts.row(i)[j] - m.centroid(c)[j]) * (pts.row(i)[j] - m.centroid(c)[j]);
      if (d < best) best = d, arg = c;
    }
    CHECK(m.assignments[i] == arg);
  }
  CHECK(kmeans(pts, 3, 9).centroids == m.centroids);
  CHECK(kmeans(pts, 1, 9).wcss >= m.wcss);
  CHECK_THROWS(kmeans(pts, 0, 1));
  CHECK_THROWS(kmeans(pts, 91, 1));
}

TEST_CASE("k equal to n gives zero WCSS and duplicates stay valid") {
  std::vector<std::vector<double>> rows = {{0}, {0}, {0}, {1}};
  const auto pts = PointMatrix::from_rows(rows);
  const auto m = kmeans(pts, 3, 2);
  for (int s : m.cluster_sizes()) CHECK(s > 0);
  const auto all = kmeans(PointMatrix::from_rows(std::vector<std::vector<double>>{{0}, {1}, {2}}), 3, 2);
  CHECK(all.wcss == 0.0);
}

TEST_CASE("wcss curve is non-increasing and the elbow ties go low") {
  const auto pts = blob_points(30, nullptr, 2);
  const auto e = choose_k_wcss(pts, 1, 6, 3);
  CHECK(e.chosen_k == 3);
  for (std::size_t i = 1; i < e.wcss_curve.size(); ++i) CHECK(e.wcss_curve[i] <= e.wcss_curve[i - 1] + 1e-9);
  const std::vector<double> linear = {10, 8, 6, 4, 2};
  CHECK(elbow_k(1, linear) == 2);
}

TEST_CASE("adjusted Rand index agrees with pair counting") {
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> a(40), b(40);
    for (auto& v : a) v = static_cast<int>(rng.index(4));
    for (auto& v : b) v = static_cast<int>(rng.index(3));
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(oracle::ari_pairs(a, b)).epsilon(1e-10));
  }
  const std::vector<int> x = {0, 0, 1, 1, 2}, relabelled = {2, 2, 0, 0, 1};
  CHECK(adjusted_rand_index(x, relabelled) == doctest::Approx(1.0));
}

TEST_CASE("principal projection") {
  Rng rng(5);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 50; ++i) {
    const double t = rng.normal() * 3, s = rng.normal() * 0.5;
    rows.push_back({t, t + s, 0.01 * rng.normal()});
  }
  const auto pts = PointMatrix::from_rows(rows);
  const auto xy = project_2d(pts);
  REQUIRE(xy.size() == 100u);
  double m0 = 0, m1 = 0, v0 = 0, v1 = 0;
  for (int i = 0; i < 50; ++i) m0 += xy[2 * i] / 50, m1 += xy[2 * i + 1] / 50;
  for (int i = 0; i < 50; ++i) v0 += (xy[2 * i] - m0) * (xy[2 * i] - m0), v1 += (xy[2 * i + 1] - m1) * (xy[2 * i + 1] - m1);
  CHECK(std::abs(m0) < 1e-9);
  CHECK(v0 >= v1);
  CHECK(project_2d(pts) == xy);
}

TEST_CASE("sampled archetype is the member nearest the centroid") {
  std::vector<std::vector<double>> rows = {{0}, {1}, {2}, {10}, {11}};
  const auto pts = PointMatrix::from_rows(rows);
  ClusterModel m;
  m.k = 2;
  m.dim = 1;
  m.centroids = {1, 10.5};
  m.assignments = {0, 0, 0, 1, 1};
  const std::vector<std::string> ids = {"a", "b", "c", "z", "y"};
  const auto picks = sample_archetype(m, pts, ids);
  CHECK(picks[0] == "b");
  CHECK(picks[1] == "y");  // equidistant: lexicographically smaller id
  const auto means = cluster_mean_embeddings(m, pts);
  CHECK(means[0][0] == doctest::Approx(1.0));
  CHECK(means[1][0] == doctest::Approx(10.5));
}

TEST_CASE("single cluster is the mean with total variance") {
  const auto pts = blob_points(10, nullptr, 6);
  const auto m = kmeans(pts, 1, 1);
  double mx = 0, my = 0;
  for (int i = 0; i < pts.n; ++i) mx += pts.row(i)[0] / pts.n, my += pts.row(i)[1] / pts.n;
  CHECK(m.centroid(0)[0] == doctest::Approx(mx));
  CHECK(m.centroid(0)[1] == doctest::Approx(my));
  double ss = 0;
  for (int i = 0; i < pts.n; ++i) ss += std::pow(pts.row(i)[0] - mx, 2) + std::pow(pts.row(i)[1] - my, 2);
  CHECK(m.wcss == doctest::Approx(ss));
}

TEST_CASE("projection preserves distances of planar data and ignores duplication") {
  Rng rng(7);
  // orthonormal basis of a tilted plane in 3D
  const double u[3] = {1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0};
  const double v[3] = {1 / std::sqrt(6.0), -1 / std::sqrt(6.0), 2 / std::sqrt(6.0)};
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 30; ++i) {
    const double a = rng.normal() * 3, b = rng.normal();
    rows.push_back({5 + a * u[0] + b * v[0], -2 + a * u[1] + b * v[1], 1 + a * u[2] + b * v[2]});
  }
  const auto xy = project_2d(PointMatrix::from_rows(rows));
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j) {
      double d3 = 0;
      for (int c = 0; c < 3; ++c) d3 += std::pow(rows[i][c] - rows[j][c], 2);
      const double d2 = std::pow(xy[2 * i] - xy[2 * j], 2) + std::pow(xy[2 * i + 1] - xy[2 * j + 1], 2);
      CHECK(std::abs(std::sqrt(d3) - std::sqrt(d2)) < 1e-9);
    }
  auto doubled = rows;
  doubled.insert(doubled.end(), rows.begin(), rows.end());
  const auto xy2 = project_2d(PointMatrix::from_rows(doubled));
  for (int i = 0; i < 60; ++i) CHECK(xy2[i] == doctest::Approx(xy[i]).epsilon(1e-9));
  CHECK_THROWS(project_2d(PointMatrix::from_rows(std::vector<std::vector<double>>{{1, 1}, {1, 1}})));
}

TEST_CASE("sampled archetype ignores point order") {
  Rng rng(8);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> ids;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({rng.normal(), rng.normal()});
    ids.push_back("id" + std::to_string(i));
  }
  const auto pts = PointMatrix::from_rows(rows);
  const auto m = kmeans(pts, 3, 4);
  const auto picks = sample_archetype(m, pts, ids);

  std::vector<std::size_t> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span(perm));
  std::vector<std::vector<double>> prow;
  std::vector<std::string> pids;
  ClusterModel pm = m;
  for (std::size_t i = 0; i < 20; ++i) {
    prow.push_back(rows[perm[i]]);
    pids.push_back(ids[perm[i]]);
    pm.assignments[i] = m.assignments[perm[i]];
  }
  CHECK(sample_archetype(pm, PointMatrix::from_rows(prow), pids) == picks);

  // exhaustive nearest scan
  for (int c = 0; c < 3; ++c) {
    double best = 1e300;
    std::string want;
    for (int i = 0; i < 20; ++i) {
      if (m.assignments[i] != c) continue;
      const double d = std::pow(rows[i][0] - m.centroid(c)[0], 2) + std::pow(rows[i][1] - m.centroid(c)[1], 2);
      if (d < best || (d == best && ids[i] < want)) best = d, want = ids[i];
    }
    CHECK(picks[c] == want);
  }
}

TEST_CASE("averaged archetype decodes the unquantized mean") {
  VqConfig c;
  c.input_side = 16;
  c.latent_grid = 4;
  c.embed_dim = 2;
  c.codebook_size = 4;
  c.hidden_channels = 3;
  const VqModel vq = VqModel::initialize(c);
  Rng rng(9);
  std::vector<double> v(32);
  for (auto& x : v) x = rng.normal();
  std::vector<double> neg = v;
  for (auto& x : neg) x = -x;
  const auto pts = PointMatrix::from_rows(std::vector<std::vector<double>>{v, neg, v, v});
  ClusterModel m;
  m.k = 2;
  m.dim = 32;
  m.assignments = {0, 0, 1, 1};
  m.centroids.assign(64, 0.0);
  const auto maps = average_archetype(m, pts, vq);
  const auto zero = decode(LatentMap{4, 2, std::vector<double>(32, 0.0)}, vq);
  const auto same = decode(LatentMap::unflatten(v, 4, 2), vq);
  for (std::size_t i = 0; i < zero.pixels.size(); ++i) {
    CHECK(maps[0].pixels[i] == doctest::Approx(zero.pixels[i]).epsilon(1e-12));
    CHECK(maps[1].pixels[i] == doctest::Approx(same.pixels[i]).epsilon(1e-12));
  }
}
