#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "forge/exec.hpp"
#include "forge/raster.hpp"
#include "forge/vqae.hpp"

namespace forge {

/// Dense row-major n × dim matrix of points.
struct PointMatrix {
  int n = 0;
  int dim = 0;
  std::vector<double> values;

  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  static PointMatrix from_rows(std::span<const std::vector<double>> rows);
};

struct ClusterModel {
  int k = 0;
  int dim = 0;
  std::vector<double> centroids;  // k × dim
  std::vector<int> assignments;
  double wcss = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> wcss_history;  // after every Lloyd iteration

  std::span<const double> centroid(int c) const {
    return {centroids.data() + static_cast<std::size_t>(c) * dim, static_cast<std::size_t>(dim)};
  }
  std::vector<int> cluster_sizes() const;
};

struct KMeansOptions {
  int max_iter = 100;
  double tol = 1e-9;
  Exec exec = Exec::Parallel;
};

/// Lloyd's algorithm from k-means++ seeding. Empty clusters are reseeded to
/// the point farthest from its centroid.
ClusterModel kmeans(const PointMatrix& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

/// Best-WCSS model over `restarts` seeded runs.
ClusterModel kmeans_restarts(const PointMatrix& points, int k, std::uint64_t seed, int restarts = 5,
                             const KMeansOptions& options = {});

double wcss_of(const PointMatrix& points, std::span<const int> assignments, std::span<const double> centroids);

struct ElbowResult {
  int chosen_k = 0;
  int k_min = 0;
  std::vector<double> wcss_curve;  // wcss_curve[i] is for k = k_min + i
};

/// Interior k maximising wcss(k-1) - 2 wcss(k) + wcss(k+1); smallest k on ties.
int elbow_k(int k_min, std::span<const double> wcss_curve);

ElbowResult choose_k_wcss(const PointMatrix& points, int k_min, int k_max, std::uint64_t seed, int restarts = 5,
                          const KMeansOptions& options = {});

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Top-2 principal-component scores, n × 2 row-major. Each component's
/// largest-magnitude loading is made positive.
std::vector<double> project_2d(const PointMatrix& points);

/// Per cluster, the member nearest its centroid in the full space; ties go
/// to the lexicographically smallest id. Returns point indices.
std::vector<std::size_t> sample_archetype_indices(const ClusterModel& model, const PointMatrix& points,
                                                  std::span<const std::string> ids);
std::vector<std::string> sample_archetype(const ClusterModel& model, const PointMatrix& points,
                                          std::span<const std::string> ids);

/// Coordinate-wise mean embedding per cluster (k × dim), not re-quantized.
std::vector<std::vector<double>> cluster_mean_embeddings(const ClusterModel& model, const PointMatrix& points);

/// Decodes each cluster's mean embedding.
std::vector<Heightmap> average_archetype(const ClusterModel& model, const PointMatrix& points, const VqModel& vq);

struct Archetype {
  int cluster = 0;
  std::string sampled_member_id;
  Heightmap averaged;
  std::vector<std::string> member_ids;
  double member_total_floor_area_m2 = 0.0;
};

std::vector<Archetype> build_archetypes(const ClusterModel& model, const PointMatrix& points,
                                        std::span<const std::string> ids, std::span<const double> floor_areas,
                                        const VqModel& vq);

}  // namespace forge
