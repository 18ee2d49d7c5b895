#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "tempofeat/clustering.hpp"
#include "tempofeat/rng.hpp"

using namespace tempofeat;

namespace {

std::vector<GeoPoint> blob(Rng& rng, GeoPoint center, double spread, int n) {
  std::vector<GeoPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i)
    pts.push_back({center.x + rng.normal() * spread, center.y + rng.normal() * spread});
  return pts;
}

}  // namespace

TEST_CASE("kmeans_fit closed forms") {
  SUBCASE("k = 1 converges to the coordinate-wise mean") {
    const std::vector<GeoPoint> pts = {{0, 0}, {2, 0}, {1, 3}};
    const auto model = kmeans_fit(pts, 1, 100, 1e-12, 7);
    CHECK(model.centroids.at(0).x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model.centroids.at(0).y == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("k = n distinct points has zero inertia") {
    const std::vector<GeoPoint> pts = {{0, 0}, {5, 0}, {0, 5}, {9, 9}};
    const auto model = kmeans_fit(pts, 4, 100, 1e-9, 1);
    CHECK(model.inertia == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("fewer points than clusters is an error") {
    CHECK_THROWS_AS(kmeans_fit({{0, 0}}, 2, 10, 1e-6, 0), std::invalid_argument);
    CHECK_THROWS_AS(kmeans_fit({{0, 0}}, 0, 10, 1e-6, 0), std::invalid_argument);
  }
}

TEST_CASE("kmeans recovers two well-separated blobs") {
  Rng rng(99);
  auto pts = blob(rng, {0, 0}, 0.5, 60);
  const auto right = blob(rng, {50, 0}, 0.5, 40);
  pts.insert(pts.end(), right.begin(), right.end());

  const auto model = kmeans_fit(pts, 2, 300, 1e-9, 4);
  const int left_label = kmeans_assign(model, {0, 0});
  const int right_label = kmeans_assign(model, {50, 0});
  CHECK(left_label != right_label);
  for (int i = 0; i < 60; ++i) CHECK(kmeans_assign(model, pts[i]) == left_label);
  for (int i = 60; i < 100; ++i) CHECK(kmeans_assign(model, pts[i]) == right_label);
}

TEST_CASE("kmeans_assign") {
  KMeansModel model;
  model.k = 3;
  model.centroids = {{0, 0}, {10, 0}, {4, 0}};

  SUBCASE("point on a centroid") {
    CHECK(kmeans_assign(model, {10, 0}) == 1);
    CHECK(kmeans_assign(model, {0, 0}) == 0);
  }
  SUBCASE("equidistant ties go to the smaller index") {
    CHECK(kmeans_assign(model, {2, 0}) == 0);   // between centroids 0 and 2
    CHECK(kmeans_assign(model, {7, 0}) == 1);   // between centroids 1 and 2
  }
  SUBCASE("matches the exhaustive nearest-centroid scan") {
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
      const GeoPoint p{rng.uniform(-5, 15), rng.uniform(-5, 5)};
      int best = 0;
      double best_d = 1e300;
      for (int c = 0; c < model.k; ++c) {
        const double d = euclidean(p, model.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      CHECK(kmeans_assign(model, p) == best);
    }
  }
}

TEST_CASE("kmeans invariants") {
  Rng rng(5);
  auto pts = blob(rng, {0, 0}, 2.0, 80);
  const auto more = blob(rng, {8, 8}, 2.0, 80);
  pts.insert(pts.end(), more.begin(), more.end());

  const auto model = kmeans_fit(pts, 4, 300, 1e-8, 123);

  SUBCASE("inertia trace is non-increasing") {
    REQUIRE(model.inertia_trace.size() >= 2);
    for (std::size_t i = 1; i < model.inertia_trace.size(); ++i)
      CHECK(model.inertia_trace[i] <= model.inertia_trace[i - 1] + 1e-9);
  }
  SUBCASE("same seed reproduces the centroids bit for bit") {
    const auto again = kmeans_fit(pts, 4, 300, 1e-8, 123);
    REQUIRE(again.centroids.size() == model.centroids.size());
    for (int c = 0; c < model.k; ++c) {
      CHECK(again.centroids[c].x == model.centroids[c].x);
      CHECK(again.centroids[c].y == model.centroids[c].y);
    }
    CHECK(again.inertia == model.inertia);
  }
  SUBCASE("converged model is a fixed point of reassignment") {
    const auto labels = kmeans_assign_all(model, pts);
    // one more Lloyd step from the converged centroids must not move labels
    std::vector<GeoPoint> sums(model.k, {0, 0});
    std::vector<int> counts(model.k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      sums[labels[i]].x += pts[i].x;
      sums[labels[i]].y += pts[i].y;
      ++counts[labels[i]];
    }
    KMeansModel stepped = model;
    for (int c = 0; c < model.k; ++c)
      if (counts[c] > 0) stepped.centroids[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
    for (std::size_t i = 0; i < pts.size(); ++i)
      CHECK(kmeans_assign(stepped, pts[i]) == labels[i]);
  }
  SUBCASE("parallel assignment equals sequential") {
    const auto seq = kmeans_assign_all(model, pts, 1);
    const auto par = kmeans_assign_all(model, pts, 4);
    CHECK(seq == par);
  }
}

TEST_CASE("kmeans json round trip") {
  Rng rng(17);
  const auto pts = blob(rng, {3, 3}, 1.0, 30);
  const auto model = kmeans_fit(pts, 3, 100, 1e-7, 9);
  const auto loaded = KMeansModel::from_json_string(model.to_json_string());
  CHECK(loaded.k == model.k);
  CHECK(loaded.seed == model.seed);
  CHECK(loaded.inertia == model.inertia);
  for (int c = 0; c < model.k; ++c) {
    CHECK(loaded.centroids[c].x == model.centroids[c].x);
    CHECK(loaded.centroids[c].y == model.centroids[c].y);
  }
}
