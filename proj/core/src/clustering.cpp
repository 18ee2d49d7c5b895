#include "tempofeat/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/parallel.hpp"
#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

double dist2(const GeoPoint& a, const GeoPoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<GeoPoint> kmeanspp_init(const std::vector<GeoPoint>& pts, int k, Rng& rng) {
  const std::size_t n = pts.size();
  std::vector<GeoPoint> centroids;
  centroids.reserve(k);
  centroids.push_back(pts[static_cast<std::size_t>(rng.uniform_int(0, n - 1))]);
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = dist2(pts[i], centroids[0]);
      for (std::size_t j = 1; j < centroids.size(); ++j)
        best = std::min(best, dist2(pts[i], centroids[j]));
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.uniform_int(0, n - 1));  // all points coincide
    } else {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(pts[pick]);
  }
  return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const std::vector<GeoPoint>& points, int k, int max_iter, double tol,
                       std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("kmeans_fit: k must be >= 1");
  if (points.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("kmeans_fit: fewer points (" +
                                std::to_string(points.size()) + ") than clusters (" +
                                std::to_string(k) + ")");
  const std::size_t n = points.size();
  Rng rng(seed);

  KMeansModel model;
  model.k = k;
  model.seed = seed;
  model.centroids = kmeanspp_init(points, k, rng);

  std::vector<int> labels(n, 0);
  std::vector<double> point_d2(n, 0.0);

  auto assign = [&]() {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(points[i], model.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(points[i], model.centroids[c]);
        if (d < best_d) {  // strict: ties keep the smaller index
          best_d = d;
          best = c;
        }
      }
      labels[i] = best;
      point_d2[i] = best_d;
      inertia += best_d;
    }
    return inertia;
  };

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    model.inertia = assign();
    model.inertia_trace.push_back(model.inertia);

    std::vector<GeoPoint> sums(k, GeoPoint{0.0, 0.0});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[labels[i]].x += points[i].x;
      sums[labels[i]].y += points[i].y;
      ++counts[labels[i]];
    }

    std::vector<GeoPoint> next(k);
    std::vector<bool> taken(n, false);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
      } else {
        // re-seed to the point farthest from its assigned centroid
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (taken[i]) continue;
          if (point_d2[i] > far_d) {
            far_d = point_d2[i];
            far = i;
          }
        }
        taken[far] = true;
        next[c] = points[far];
      }
    }

    double shift = 0.0;
    for (int c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(dist2(model.centroids[c], next[c])));
    model.centroids = std::move(next);
    if (shift < tol) {
      ++iter;
      break;
    }
  }
  model.iterations_run = iter;
  model.inertia = assign();  // final assignment against the converged centroids
  model.inertia_trace.push_back(model.inertia);
  return model;
}

int kmeans_assign(const KMeansModel& model, const GeoPoint& point) {
  int best = 0;
  double best_d = dist2(point, model.centroids.at(0));
  for (int c = 1; c < model.k; ++c) {
    const double d = dist2(point, model.centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<int> kmeans_assign_all(const KMeansModel& model, std::span<const GeoPoint> points,
                                   int workers) {
  std::vector<int> labels(points.size());
  parallel_for(points.size(), workers,
               [&](std::size_t i) { labels[i] = kmeans_assign(model, points[i]); });
  return labels;
}

std::string KMeansModel::to_json_string() const {
  json j;
  j["k"] = k;
  j["seed"] = seed;
  j["inertia"] = inertia;
  j["iterations_run"] = iterations_run;
  json cents = json::array();
  for (const auto& c : centroids) cents.push_back({c.x, c.y});
  j["centroids"] = cents;
  return j.dump(2);
}

KMeansModel KMeansModel::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  KMeansModel m;
  m.k = j.at("k").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.inertia = j.at("inertia").get<double>();
  m.iterations_run = j.at("iterations_run").get<int>();
  for (const auto& c : j.at("centroids"))
    m.centroids.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  if (static_cast<int>(m.centroids.size()) != m.k)
    throw std::invalid_argument("k-means model: centroid count does not match k");
  return m;
}

void KMeansModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json_string() << '\n';
}

KMeansModel KMeansModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace tempofeat
