#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tempofeat/types.hpp"

namespace tempofeat {

struct KMeansModel {
  int k = 0;
  std::vector<GeoPoint> centroids;
  double inertia = 0.0;  // sum of squared distances to assigned centroids
  int iterations_run = 0;
  std::uint64_t seed = 0;
  /// Post-assignment inertia after each Lloyd iteration; non-increasing.
  std::vector<double> inertia_trace;

  std::string to_json_string() const;
  static KMeansModel from_json_string(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static KMeansModel load(const std::filesystem::path& path);
};

/// Lloyd iterations from k-means++ initialization. Deterministic given the
/// seed; an emptied cluster is re-seeded to the point farthest from its
/// assigned centroid. Throws when there are fewer points than clusters.
KMeansModel kmeans_fit(const std::vector<GeoPoint>& points, int k, int max_iter = 300,
                       double tol = 1e-6, std::uint64_t seed = 0);

/// Index of the nearest centroid; ties break toward the smallest index.
int kmeans_assign(const KMeansModel& model, const GeoPoint& point);

std::vector<int> kmeans_assign_all(const KMeansModel& model, std::span<const GeoPoint> points,
                                   int workers = 1);

}  // namespace tempofeat
