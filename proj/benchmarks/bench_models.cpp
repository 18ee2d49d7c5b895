#include <benchmark/benchmark.h>

#include "tempofeat/clustering.hpp"
#include "tempofeat/forest.hpp"
#include "tempofeat/gbt.hpp"
#include "tempofeat/rng.hpp"
#include "tempofeat/tree.hpp"

using namespace tempofeat;

namespace {

struct Problem {
  FlatMatrix x;
  std::vector<double> y;
};

Problem make_problem(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Problem p;
  p.x = FlatMatrix(n, d);
  for (auto& v : p.x.data) v = rng.uniform(-1, 1);
  p.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    p.y[i] = 2.0 * p.x.at(i, 0) - p.x.at(i, 1) + 0.2 * rng.normal();
  return p;
}

}  // namespace

static void BM_TreeFit(benchmark::State& state) {
  const auto p = make_problem(state.range(0), 20, 3);
  const auto presorted = PresortedMatrix::build(p.x);
  TreeConfig cfg;
  cfg.max_depth = 3;
  for (auto _ : state) {
    const auto tree = DecisionTree::fit(presorted, p.y, {}, cfg);
    benchmark::DoNotOptimize(tree.nodes().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TreeFit)->Arg(2000)->Arg(10000);

static void BM_GbtFit100(benchmark::State& state) {
  const auto p = make_problem(state.range(0), 20, 4);
  GbtConfig cfg;
  cfg.n_estimators = 100;
  for (auto _ : state) {
    const auto model = GbtModel::fit(p.x, p.y, cfg);
    benchmark::DoNotOptimize(model.trees.data());
  }
}
BENCHMARK(BM_GbtFit100)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_ForestFit(benchmark::State& state) {
  const auto p = make_problem(2000, 20, 5);
  ForestConfig cfg;
  cfg.n_trees = 50;
  cfg.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto model = ForestModel::fit(p.x, p.y, cfg);
    benchmark::DoNotOptimize(model.trees.data());
  }
}
BENCHMARK(BM_ForestFit)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_KMeansFit(benchmark::State& state) {
  Rng rng(6);
  std::vector<GeoPoint> pts;
  for (int i = 0; i < 5000; ++i) pts.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
  for (auto _ : state) {
    const auto model = kmeans_fit(pts, 10, 50, 1e-6, 9);
    benchmark::DoNotOptimize(model.centroids.data());
  }
  state.SetItemsProcessed(state.iterations() * pts.size());
}
BENCHMARK(BM_KMeansFit)->Unit(benchmark::kMillisecond);
