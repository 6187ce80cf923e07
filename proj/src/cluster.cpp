#include "forge/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "forge/kernels.hpp"
#include "forge/rng.hpp"

namespace forge {

namespace {

void check_points(const PointMatrix& points) {
  if (points.values.size() != static_cast<std::size_t>(points.n) * points.dim) {
    throw DataError("point matrix size does not match its shape");
  }
  for (double v : points.values) {
    if (!std::isfinite(v)) throw DataError("non-finite value in clustering input");
  }
}

double dist2(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

void seed_plus_plus(const PointMatrix& pts, int k, Rng& rng, std::vector<double>& centroids) {
  const int dim = pts.dim;
  centroids.assign(static_cast<std::size_t>(k) * dim, 0.0);
  auto set_center = [&](int c, int i) { std::copy_n(pts.row(i).begin(), dim, centroids.begin() + static_cast<std::ptrdiff_t>(c) * dim); };

  set_center(0, static_cast<int>(rng.index(static_cast<std::size_t>(pts.n))));
  std::vector<double> d2(static_cast<std::size_t>(pts.n));
  for (int i = 0; i < pts.n; ++i) d2[i] = dist2(pts.row(i), {centroids.data(), static_cast<std::size_t>(dim)});

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    int pick = pts.n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double run = 0.0;
      for (int i = 0; i < pts.n; ++i) {
        run += d2[i];
        if (run > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.index(static_cast<std::size_t>(pts.n)));
    }
    set_center(c, pick);
    const std::span<const double> center(centroids.data() + static_cast<std::size_t>(c) * dim, static_cast<std::size_t>(dim));
    for (int i = 0; i < pts.n; ++i) d2[i] = std::min(d2[i], dist2(pts.row(i), center));
  }
}

// Assigns every point, then moves the farthest point into each empty
// cluster. Returns false if some cluster is still empty.
bool assign_and_repair(const PointMatrix& pts, ClusterModel& m, std::vector<kernels::Nearest>& nearest, Exec exec) {
  for (int round = 0; round <= m.k; ++round) {
    kernels::assign_nearest(pts.values, pts.n, m.centroids, m.k, m.dim, nearest, exec);
    std::vector<int> sizes(static_cast<std::size_t>(m.k), 0);
    for (int i = 0; i < pts.n; ++i) {
      m.assignments[i] = nearest[i].index;
      ++sizes[nearest[i].index];
    }
    bool repaired = false;
    for (int c = 0; c < m.k; ++c) {
      if (sizes[c] > 0) continue;
      int far = -1;
      for (int i = 0; i < pts.n; ++i) {
        if (sizes[m.assignments[i]] < 2) continue;
        if (far < 0 || nearest[i].dist2 > nearest[far].dist2) far = i;
      }
      if (far < 0) return false;
      std::copy_n(pts.row(far).begin(), m.dim, m.centroids.begin() + static_cast<std::ptrdiff_t>(c) * m.dim);
      --sizes[m.assignments[far]];
      m.assignments[far] = c;
      nearest[far] = {c, 0.0};
      sizes[c] = 1;
      repaired = true;
    }
    if (!repaired) return true;
  }
  // Coincident points can keep bouncing between tied centroids; keep the
  // last repaired assignment, which has no empty cluster.
  return true;
}

// Hartigan single-point moves: relocate a point when doing so lowers WCSS,
// counting the shift of both centroids. Every such fixed point is also a
// Lloyd fixed point, so this only escapes poor Lloyd optima. Centroids must
// be the cluster means on entry. Returns true if anything moved.
bool hartigan_pass(const PointMatrix& pts, ClusterModel& m) {
  std::vector<int> sizes = m.cluster_sizes();
  bool moved_any = false;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool moved = false;
    for (int i = 0; i < pts.n; ++i) {
      const int a = m.assignments[i];
      if (sizes[a] < 2) continue;
      const auto row = pts.row(i);
      const double cost_stay = sizes[a] / (sizes[a] - 1.0) * dist2(row, m.centroid(a));
      int best = a;
      double best_cost = cost_stay;
      for (int b = 0; b < m.k; ++b) {
        if (b == a) continue;
        const double cost = sizes[b] / (sizes[b] + 1.0) * dist2(row, m.centroid(b));
        if (cost < best_cost * (1.0 - 1e-12)) {
          best_cost = cost;
          best = b;
        }
      }
      if (best == a) continue;
      double* ca = m.centroids.data() + static_cast<std::size_t>(a) * m.dim;
      double* cb = m.centroids.data() + static_cast<std::size_t>(best) * m.dim;
      for (int j = 0; j < m.dim; ++j) {
        ca[j] = (ca[j] * sizes[a] - row[j]) / (sizes[a] - 1);
        cb[j] = (cb[j] * sizes[best] + row[j]) / (sizes[best] + 1);
      }
      --sizes[a];
      ++sizes[best];
      m.assignments[i] = best;
      moved = moved_any = true;
    }
    if (!moved) break;
  }
  return moved_any;
}

void update_means(const PointMatrix& pts, ClusterModel& m) {
  std::vector<double> sums(m.centroids.size(), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(m.k), 0);
  for (int i = 0; i < pts.n; ++i) {
    const int c = m.assignments[i];
    ++counts[c];
    const auto row = pts.row(i);
    for (int j = 0; j < m.dim; ++j) sums[static_cast<std::size_t>(c) * m.dim + j] += row[j];
  }
  for (int c = 0; c < m.k; ++c) {
    if (counts[c] == 0) continue;
    for (int j = 0; j < m.dim; ++j) {
      m.centroids[static_cast<std::size_t>(c) * m.dim + j] = sums[static_cast<std::size_t>(c) * m.dim + j] / counts[c];
    }
  }
}

}  // namespace

PointMatrix PointMatrix::from_rows(std::span<const std::vector<double>> rows) {
  PointMatrix m;
  m.n = static_cast<int>(rows.size());
  m.dim = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  m.values.reserve(static_cast<std::size_t>(m.n) * m.dim);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != m.dim) throw DataError("rows of differing length");
    m.values.insert(m.values.end(), r.begin(), r.end());
  }
  return m;
}

std::vector<int> ClusterModel::cluster_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[a];
  return sizes;
}

double wcss_of(const PointMatrix& points, std::span<const int> assignments, std::span<const double> centroids) {
  double total = 0.0;
  for (int i = 0; i < points.n; ++i) {
    total += dist2(points.row(i), centroids.subspan(static_cast<std::size_t>(assignments[i]) * points.dim, points.dim));
  }
  return total;
}

ClusterModel kmeans(const PointMatrix& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (points.n < k) {
    throw DataError("kmeans needs at least k points (" + std::to_string(points.n) + " < " + std::to_string(k) + ")");
  }
  check_points(points);

  ClusterModel m;
  m.k = k;
  m.dim = points.dim;
  m.seed = seed;
  m.assignments.assign(static_cast<std::size_t>(points.n), 0);
  Rng rng(seed);
  seed_plus_plus(points, k, rng, m.centroids);

  std::vector<kernels::Nearest> nearest(static_cast<std::size_t>(points.n));
  assign_and_repair(points, m, nearest, options.exec);
  m.wcss = wcss_of(points, m.assignments, m.centroids);
  m.wcss_history.push_back(m.wcss);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    update_means(points, m);
    assign_and_repair(points, m, nearest, options.exec);
    const double w = wcss_of(points, m.assignments, m.centroids);
    m.wcss_history.push_back(w);
    const double improvement = m.wcss - w;
    m.wcss = w;
    if (improvement < options.tol) break;
  }
  // Refine with Hartigan moves, then settle so centroids are exact means
  // and every point sits with its nearest centroid.
  for (int round = 0; round < options.max_iter; ++round) {
    update_means(points, m);
    const bool moved = hartigan_pass(points, m);
    const std::vector<int> before = m.assignments;
    assign_and_repair(points, m, nearest, options.exec);
    m.wcss = wcss_of(points, m.assignments, m.centroids);
    m.wcss_history.push_back(m.wcss);
    if (!moved && m.assignments == before) break;
  }
  return m;
}

ClusterModel kmeans_restarts(const PointMatrix& points, int k, std::uint64_t seed, int restarts,
                             const KMeansOptions& options) {
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  ClusterModel best;
  for (int r = 0; r < restarts; ++r) {
    ClusterModel m = kmeans(points, k, derive_seed(seed, "restart-" + std::to_string(r)), options);
    if (r == 0 || m.wcss < best.wcss) best = std::move(m);
  }
  return best;
}

int elbow_k(int k_min, std::span<const double> curve) {
  if (curve.size() < 3) throw ConfigError("elbow rule needs at least three k values");
  std::size_t best = 1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    const double second = curve[i - 1] - 2.0 * curve[i] + curve[i + 1];
    if (second > best_val) {
      best_val = second;
      best = i;
    }
  }
  return k_min + static_cast<int>(best);
}

ElbowResult choose_k_wcss(const PointMatrix& points, int k_min, int k_max, std::uint64_t seed, int restarts,
                          const KMeansOptions& options) {
  if (k_min < 1 || k_max < k_min + 2) throw ConfigError("k range must satisfy k_min >= 1 and k_max >= k_min + 2");
  if (points.n < k_max) throw DataError("fewer points than k_max");
  ElbowResult r;
  r.k_min = k_min;
  for (int k = k_min; k <= k_max; ++k) {
    r.wcss_curve.push_back(kmeans_restarts(points, k, derive_seed(seed, "k=" + std::to_string(k)), restarts, options).wcss);
  }
  r.chosen_k = elbow_k(k_min, r.wcss_curve);
  return r;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("partitions differ in length");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, v] : table) index += pairs(v);
  for (const auto& [key, v] : rows) sum_a += pairs(v);
  for (const auto& [key, v] : cols) sum_b += pairs(v);
  const double expected = n < 2 ? 0.0 : sum_a * sum_b / pairs(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

std::vector<std::size_t> sample_archetype_indices(const ClusterModel& model, const PointMatrix& points,
                                                  std::span<const std::string> ids) {
  if (ids.size() != static_cast<std::size_t>(points.n) || model.assignments.size() != ids.size()) {
    throw DataError("sample_archetype: ids, points and assignments differ in length");
  }
  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> best(static_cast<std::size_t>(model.k), none);
  std::vector<double> best_d(static_cast<std::size_t>(model.k), std::numeric_limits<double>::infinity());
  for (int i = 0; i < points.n; ++i) {
    const int c = model.assignments[i];
    const double d = dist2(points.row(i), model.centroid(c));
    if (best[c] == none || d < best_d[c] || (d == best_d[c] && ids[i] < ids[best[c]])) {
      best[c] = static_cast<std::size_t>(i);
      best_d[c] = d;
    }
  }
  for (auto b : best) {
    if (b == none) throw DataError("sample_archetype: empty cluster");
  }
  return best;
}

std::vector<std::string> sample_archetype(const ClusterModel& model, const PointMatrix& points,
                                          std::span<const std::string> ids) {
  std::vector<std::string> out;
  for (auto i : sample_archetype_indices(model, points, ids)) out.push_back(ids[i]);
  return out;
}

std::vector<std::vector<double>> cluster_mean_embeddings(const ClusterModel& model, const PointMatrix& points) {
  if (model.assignments.size() != static_cast<std::size_t>(points.n) || model.dim != points.dim) {
    throw DataError("cluster model does not match the points");
  }
  std::vector<std::vector<double>> means(static_cast<std::size_t>(model.k), std::vector<double>(static_cast<std::size_t>(points.dim), 0.0));
  std::vector<int> counts(static_cast<std::size_t>(model.k), 0);
  for (int i = 0; i < points.n; ++i) {
    const int c = model.assignments[i];
    ++counts[c];
    const auto row = points.row(i);
    for (int j = 0; j < points.dim; ++j) means[c][j] += row[j];
  }
  for (int c = 0; c < model.k; ++c) {
    if (counts[c] == 0) throw DataError("empty cluster " + std::to_string(c));
    for (auto& v : means[c]) v /= counts[c];
  }
  return means;
}

std::vector<Heightmap> average_archetype(const ClusterModel& model, const PointMatrix& points, const VqModel& vq) {
  const auto& c = vq.config;
  if (points.dim != c.latent_grid * c.latent_grid * c.embed_dim) {
    throw DataError("embedding length does not match the model's latent shape");
  }
  std::vector<Heightmap> out;
  const auto means = cluster_mean_embeddings(model, points);
  for (std::size_t k = 0; k < means.size(); ++k) {
    Heightmap h = decode(LatentMap::unflatten(means[k], c.latent_grid, c.embed_dim), vq);
    h.building_id = "cluster_" + std::to_string(k) + "_avg";
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<Archetype> build_archetypes(const ClusterModel& model, const PointMatrix& points,
                                        std::span<const std::string> ids, std::span<const double> floor_areas,
                                        const VqModel& vq) {
  if (floor_areas.size() != ids.size()) throw DataError("floor areas and ids differ in length");
  const auto sampled = sample_archetype_indices(model, points, ids);
  auto averaged = average_archetype(model, points, vq);
  std::vector<Archetype> out(static_cast<std::size_t>(model.k));
  for (int k = 0; k < model.k; ++k) {
    out[k].cluster = k;
    out[k].sampled_member_id = ids[sampled[k]];
    out[k].averaged = std::move(averaged[k]);
  }
  for (int i = 0; i < points.n; ++i) {
    auto& a = out[model.assignments[i]];
    a.member_ids.push_back(ids[i]);
    a.member_total_floor_area_m2 += floor_areas[i];
  }
  return out;
}

}  // namespace forge
