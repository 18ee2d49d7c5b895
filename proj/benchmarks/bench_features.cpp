#include <benchmark/benchmark.h>

#include <numeric>

#include "tempofeat/datagen.hpp"
#include "tempofeat/dataset.hpp"
#include "tempofeat/features.hpp"
#include "tempofeat/rng.hpp"

using namespace tempofeat;

namespace {

const Dataset& bench_dataset() {
  static const Dataset ds = [] {
    GenConfig cfg;
    cfg.n_users = 2000;
    cfg.n_branches = 20;
    cfg.seed = 1;
    const auto dir = std::filesystem::temp_directory_path() / "tempofeat_bench_data";
    generate(cfg, dir);
    return load_dataset(LoadPaths::in_dir(dir));
  }();
  return ds;
}

}  // namespace

static void BM_Clumpiness(benchmark::State& state) {
  Rng rng(7);
  std::vector<int> pool(181);
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<ActivityTimeline> timelines;
  for (int i = 0; i < 256; ++i) {
    auto days = pool;
    for (std::size_t k = days.size(); k > 1; --k)
      std::swap(days[k - 1], days[rng.uniform_int(0, static_cast<std::int64_t>(k) - 1)]);
    days.resize(1 + rng.uniform_int(0, 180));
    std::sort(days.begin(), days.end());
    ActivityTimeline t;
    t.event_days = days;
    t.distinct_days = days;
    timelines.push_back(std::move(t));
  }
  for (auto _ : state) {
    double acc = 0.0;
    for (const auto& t : timelines) acc += clumpiness(t);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * timelines.size());
}
BENCHMARK(BM_Clumpiness);

static void BM_AssembleFS7(benchmark::State& state) {
  const Dataset& ds = bench_dataset();
  const EncodingMap map = fit_encoding(ds);
  AssembleOptions opt;
  opt.feature_set = FeatureSet::FS7;
  opt.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto fm = assemble(ds, map, opt);
    benchmark::DoNotOptimize(fm.values.data.data());
  }
  state.SetItemsProcessed(state.iterations() * ds.users.size());
}
BENCHMARK(BM_AssembleFS7)->Arg(1)->Arg(4);

static void BM_OneHot(benchmark::State& state) {
  const Dataset& ds = bench_dataset();
  const EncodingMap map = fit_encoding(ds);
  std::vector<double> buf(map.event_vector_length());
  std::size_t i = 0;
  for (auto _ : state) {
    one_hot_into(ds.activities[i % ds.activities.size()], map, true, buf);
    benchmark::DoNotOptimize(buf.data());
    ++i;
  }
}
BENCHMARK(BM_OneHot);
