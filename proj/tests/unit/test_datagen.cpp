#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "tempofeat/datagen.hpp"
#include "tempofeat/dataset.hpp"
#include "tempofeat/metrics.hpp"
#include "test_util.hpp"

using namespace tempofeat;
using test_util::TempDir;
using test_util::read_file;

TEST_CASE("generator determinism") {
  GenConfig cfg;
  cfg.n_users = 150;
  cfg.n_branches = 5;
  cfg.missing_rate = 0.05;
  cfg.seed = 31;

  TempDir a("gen_a"), b("gen_b");
  generate(cfg, a.path(), /*workers=*/1);
  generate(cfg, b.path(), /*workers=*/4);
  for (const char* f :
       {"users.csv", "activities.csv", "branches.csv", "visits.csv", "truth.json"})
    CHECK(read_file(a.file(f)) == read_file(b.file(f)));

  TempDir c("gen_c");
  GenConfig other = cfg;
  other.seed = 32;
  generate(other, c.path());
  CHECK(read_file(a.file("users.csv")) != read_file(c.file("users.csv")));
}

TEST_CASE("missing-rate injection") {
  GenConfig cfg;
  cfg.n_users = 120;
  cfg.n_branches = 4;
  cfg.seed = 7;

  SUBCASE("rate zero leaves no '-' tokens") {
    TempDir dir("gen_nomiss");
    cfg.missing_rate = 0.0;
    generate(cfg, dir.path());
    for (const char* f : {"users.csv", "activities.csv"}) {
      const auto text = read_file(dir.file(f));
      CHECK(text.find(",-,") == std::string::npos);
      CHECK(text.find(",-\n") == std::string::npos);
    }
  }
  SUBCASE("positive rate injects them and the loader maps them") {
    TempDir dir("gen_miss");
    cfg.missing_rate = 0.2;
    generate(cfg, dir.path());
    CHECK(read_file(dir.file("activities.csv")).find(",-,") != std::string::npos);
    const Dataset ds = load_dataset(LoadPaths::in_dir(dir.path()));
    bool saw_missing = false;
    for (const auto& a : ds.activities) saw_missing |= a.time_slot == kMissingToken;
    CHECK(saw_missing);
  }
}

TEST_CASE("generated data respects the schema domains") {
  GenConfig cfg;
  cfg.n_users = 200;
  cfg.n_branches = 6;
  cfg.missing_rate = 0.02;
  cfg.seed = 13;
  TempDir dir("gen_schema");
  const auto truth = generate(cfg, dir.path());

  // the loader enforces day ranges and closed category domains
  const Dataset ds = load_dataset(LoadPaths::in_dir(dir.path()));
  CHECK(ds.users.size() == 200);
  CHECK(ds.branches.size() == 6);
  CHECK(ds.integrity.dropped_unknown_user_activities == 0);
  for (const auto& a : ds.activities) {
    CHECK(a.day_index >= 1);
    CHECK(a.day_index <= 181);
  }
  // some users have no activity at all
  std::size_t inactive = 0;
  for (std::size_t ui = 0; ui < ds.users.size(); ++ui)
    inactive += ds.user_activities(ui).empty() ? 1 : 0;
  CHECK(inactive > 0);

  SUBCASE("truth aligns with the files") {
    REQUIRE(truth.users.size() == 200);
    REQUIRE(truth.visit_rates.size() == 200);
    CHECK(truth.visit_rates[0].size() == 6);
    const auto loaded = PlantedTruth::load(dir.file("truth.json"));
    CHECK(loaded.users.size() == truth.users.size());
    CHECK(loaded.visit_rates == truth.visit_rates);
    for (std::size_t u = 0; u < truth.users.size(); ++u) {
      CHECK(loaded.users[u].bayes_p == truth.users[u].bayes_p);
      CHECK(truth.users[u].bayes_p >= 0.0);
      CHECK(truth.users[u].bayes_p <= 1.0);
    }
  }

  SUBCASE("nearest branch carries the highest expected visit rate") {
    std::size_t hits = 0;
    for (std::size_t u = 0; u < truth.users.size(); ++u) {
      const auto& rates = truth.visit_rates[u];
      const auto idx = ds.user_index(truth.users[u].user_id);
      REQUIRE(idx >= 0);
      const GeoPoint home = ds.users[static_cast<std::size_t>(idx)].geo;
      std::size_t nearest = 0, best_rate = 0;
      double nd = 1e300, br = -1.0;
      for (std::size_t b = 0; b < rates.size(); ++b) {
        const double d = euclidean(home, ds.branches[b].geo);
        if (d < nd) {
          nd = d;
          nearest = b;
        }
        if (rates[b] > br) {
          br = rates[b];
          best_rate = b;
        }
      }
      hits += nearest == best_rate ? 1 : 0;
    }
    CHECK(static_cast<double>(hits) / truth.users.size() >= 0.95);
  }
}

TEST_CASE("planted labels carry a learnable signal") {
  GenConfig cfg;
  cfg.n_users = 2000;
  cfg.n_branches = 5;
  cfg.seed = 3;
  TempDir dir("gen_bayes");
  const auto truth = generate(cfg, dir.path());
  const Dataset ds = load_dataset(LoadPaths::in_dir(dir.path()));

  std::vector<double> p;
  std::vector<int> labels;
  for (std::size_t u = 0; u < truth.users.size(); ++u) {
    p.push_back(truth.users[u].bayes_p);
    const auto idx = ds.user_index(truth.users[u].user_id);
    labels.push_back(*ds.users[static_cast<std::size_t>(idx)].task2_label);
  }
  const double oracle_auc = roc_auc(p, labels);
  CHECK(oracle_auc > 0.7);
  CHECK(oracle_auc < 0.9);
}

TEST_CASE("generated files round-trip through the dataset loader byte-identically") {
  GenConfig cfg;
  cfg.n_users = 100;
  cfg.n_branches = 4;
  cfg.missing_rate = 0.1;  // categorical-only injection keeps the round trip exact
  cfg.seed = 17;
  TempDir dir("gen_rt"), out("gen_rt_out");
  generate(cfg, dir.path());
  const Dataset ds = load_dataset(LoadPaths::in_dir(dir.path()));
  save_dataset(ds, LoadPaths::in_dir(out.path()));
  for (const char* f : {"users.csv", "activities.csv", "branches.csv", "visits.csv"})
    CHECK(read_file(dir.file(f)) == read_file(out.file(f)));
}

TEST_CASE("generator validates its configuration") {
  TempDir dir("gen_bad");
  GenConfig cfg;
  cfg.n_users = 0;
  CHECK_THROWS_AS(generate(cfg, dir.path()), std::invalid_argument);
  cfg = GenConfig{};
  cfg.missing_rate = 1.5;
  CHECK_THROWS_AS(generate(cfg, dir.path()), std::invalid_argument);
  cfg = GenConfig{};
  cfg.n_days = 90;
  CHECK_THROWS_AS(generate(cfg, dir.path()), std::invalid_argument);
}

TEST_CASE("genconfig json round trip") {
  GenConfig cfg;
  cfg.n_users = 77;
  cfg.missing_rate = 0.125;
  cfg.seed = 99;
  const auto back = GenConfig::from_json_string(cfg.to_json_string());
  CHECK(back.n_users == 77);
  CHECK(back.missing_rate == 0.125);
  CHECK(back.seed == 99);
  CHECK(back.n_branches == cfg.n_branches);
}
