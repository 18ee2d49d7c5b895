#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tempofeat/types.hpp"

namespace tempofeat {

/// Knobs for the synthetic-data generator. The seed fully determines every
/// output byte.
struct GenConfig {
  int n_users = 5000;
  int n_branches = 40;
  int n_days = kHorizonDays;  // fixed schema horizon
  int k_true = 5;             // planted geo clusters

  double world_size = 100.0;     // users/branches live in [0, world]^2
  double cluster_spread = 3.0;   // stddev of homes around their cluster center
  double activity_spread = 2.0;  // stddev of activity geo around home
  int n_loc_tokens = 20;

  double rate_lo = 0.02;  // per-day activity probability range
  double rate_hi = 0.25;
  double burst_prob = 0.5;     // fraction of users with windowed (clumpy) timelines
  double inactive_prob = 0.05;

  double visit_base = 6.0;    // expected visits to a zero-distance branch
  double visit_decay = 12.0;  // exponential distance decay of the visit rate

  // up-sell label model: sigmoid(bias + b .* z(activity, wealth, credit));
  // defaults land the oracle AUC near 0.80 at 20k users
  double label_bias = -1.6;
  double beta_activity = 0.9;
  double beta_wealth = 0.75;
  double beta_credit = 0.6;

  double missing_rate = 0.0;  // per-field "-" injection into categorical columns
  std::uint64_t seed = 1;

  std::string to_json_string() const;
  static GenConfig from_json_string(const std::string& text);
};

struct PlantedUser {
  std::int64_t user_id = 0;
  int cluster = 0;
  double intensity = 0.0;  // per-day activity probability
  double bayes_p = 0.0;    // true up-sell probability
};

/// Ground truth persisted next to the generated files so tests can compare
/// learners against the generating process.
struct PlantedTruth {
  std::vector<PlantedUser> users;
  std::vector<std::vector<double>> visit_rates;  // [user][branch] expected visits

  void save(const std::filesystem::path& path) const;
  static PlantedTruth load(const std::filesystem::path& path);
};

/// Write users.csv, activities.csv, branches.csv, visits.csv, truth.json and
/// genconfig.json under out_dir.
PlantedTruth generate(const GenConfig& cfg, const std::filesystem::path& out_dir,
                      int workers = 1);

}  // namespace tempofeat
