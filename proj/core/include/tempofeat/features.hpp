#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tempofeat/encoding.hpp"
#include "tempofeat/matrix.hpp"
#include "tempofeat/types.hpp"

namespace tempofeat {

/// Cumulative feature-set schema: FSk contains every column of FS1..FSk.
/// FS9/FS10 columns depend on the branch under prediction and are only
/// materialized inside per-branch training.
enum class FeatureSet : int {
  FS1 = 1,
  FS2,
  FS3,
  FS4,
  FS5,
  FS6,
  FS7,
  FS8,
  FS9,
  FS10,
};

FeatureSet parse_feature_set(const std::string& name);  // "FS1".."FS10", case-insensitive
std::string to_string(FeatureSet fs);

/// Per-user activity-day view used by the inter-activity features.
struct ActivityTimeline {
  std::int64_t user_id = 0;
  std::vector<int> event_days;     // sorted, duplicates kept
  std::vector<int> distinct_days;  // sorted, unique
  int horizon = kHorizonDays;

  std::size_t n_events() const { return event_days.size(); }

  static ActivityTimeline from_events(std::int64_t user_id,
                                      std::span<const ActivityEvent> events,
                                      int horizon = kHorizonDays);
};

/// The per-user counters introduced by FS3.
struct CounterSet {
  int n_pos = 0;
  int n_web = 0;
  int n_credit = 0;
  int n_debit = 0;
  int n_distinct_amt = 0;
  int max_amt = 0;  // ordinal code 0..3, 0 = no activity
  int days_since_last = 0;
  int n_distinct_locations = 0;
  int n_distinct_time_slots = 0;
  int n_distinct_mc = 0;
  int n_total = 0;
  int mode_time_slot = 0;  // encoded code, 0 if no activity
  int mode_loc_cat = 0;    // encoded code, 0 if no activity
  int months_credit_card = 0;  // 0..6
  int months_wealthy = 0;      // 0..6
};

enum class ColumnKind { numeric, indicator };

struct ColumnInfo {
  std::string name;
  int feature_set = 1;  // FS id that introduced the column
  ColumnKind kind = ColumnKind::numeric;
};

/// Dense per-user feature matrix with its column manifest. Rows follow the
/// dataset's user_id order.
struct FeatureMatrix {
  FlatMatrix values;
  std::vector<ColumnInfo> manifest;
  std::vector<std::int64_t> user_ids;

  std::size_t n_rows() const { return values.n_rows; }
  std::size_t n_cols() const { return values.n_cols; }

  std::string manifest_json(FeatureSet fs) const;
  void save_csv(const std::filesystem::path& path) const;
  std::uint64_t manifest_hash() const;
};

// --- per-user operations ------------------------------------------------

/// Unweighted element-wise mean of encoded activity vectors; a zero vector of
/// the given length when the user has no activities.
std::vector<double> fs1_mean_activity(const std::vector<std::vector<double>>& encoded,
                                      std::size_t vector_length);

/// Mean weighted by ln(1 + day_index); weights normalized to sum 1.
std::vector<double> recency_weighted_mean(const std::vector<std::vector<double>>& encoded,
                                          const std::vector<int>& day_indices,
                                          std::size_t vector_length);

/// Minimum Euclidean distance from `point` to any branch. Throws on an empty
/// branch list.
double min_branch_distance(const GeoPoint& point, std::span<const BranchInfo> branches);

CounterSet fs3_counters(const UserProfile& user, std::span<const ActivityEvent> events,
                        const EncodingMap& map, int horizon = kHorizonDays);

/// Mean and population standard deviation of gaps between consecutive
/// distinct activity days; (0, 0) with fewer than two distinct days.
std::pair<double, double> inter_activity_stats(const ActivityTimeline& timeline);

/// Activity clumpiness in [0, 1): 0 for perfectly regular daily activity,
/// approaching 1 as activity concentrates. Defined over distinct activity
/// days with boundary gaps at day 0 and day horizon+1; an empty timeline
/// yields 0 (the no-activity zero-fill).
double clumpiness(const ActivityTimeline& timeline);

/// (average distance home->activity, that average divided by the number of
/// activities); (0, 0) when the user has no activities.
std::pair<double, double> fs5_geo_features(const UserProfile& user,
                                           std::span<const ActivityEvent> events);

/// Fractions of strictly increasing / strictly decreasing consecutive pairs
/// in an ordinal sequence; (0, 0) for fewer than two elements.
std::pair<double, double> trend_ratios(std::span<const int> ordinal_sequence);

/// Coordinate-wise mean of activity geolocations; the user's home location
/// when there are none.
GeoPoint mean_activity_geo(std::span<const ActivityEvent> events, const GeoPoint& home);

// --- matrix assembly ------------------------------------------------------

struct AssembleOptions {
  FeatureSet feature_set = FeatureSet::FS1;
  bool recency_weighted = false;  // FS1 averaging variant
  int workers = 1;
  /// Unknown tokens fall into the missing slot instead of throwing; used when
  /// encoding was fitted on a different fold.
  bool lenient_encoding = false;
  /// FS8+: per-user cluster ids aligned with dataset user order.
  const std::vector<int>* cluster_assignments = nullptr;
  int n_clusters = 0;
  /// FS9/FS10 placeholders are only valid inside per-branch training.
  bool allow_branch_placeholders = false;
};

FeatureMatrix assemble(const Dataset& ds, const EncodingMap& map, const AssembleOptions& opt);

/// ln(1 + max(x, 0)) on numeric columns; indicator columns pass through.
FeatureMatrix log_transform(FeatureMatrix m);

/// Per-column standardization fitted on training data; constant columns map
/// to zero.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> stddev;  // 0 marks a constant column

  void apply(FeatureMatrix& m) const;
  std::string to_json_string() const;
  static FeatureScaler from_json_string(const std::string& text);
};

FeatureScaler fit_scaler(const FeatureMatrix& m);  // requires >= 2 rows

/// Names of the columns a feature set adds on top of its predecessor.
std::vector<ColumnInfo> feature_columns(const EncodingMap& map, FeatureSet fs, int n_clusters);

}  // namespace tempofeat
