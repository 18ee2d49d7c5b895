#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tempofeat {

/// Days in the observation window (first half of 2014).
inline constexpr int kHorizonDays = 181;

/// Internal token for missing categorical values; serialized as "-".
inline constexpr const char* kMissingToken = "__MISSING__";

struct GeoPoint {
  double x = 0.0;
  double y = 0.0;
};

inline double euclidean(const GeoPoint& a, const GeoPoint& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct UserProfile {
  std::int64_t user_id = 0;
  std::string age_cat;  // "a" | "b" | "c" | kMissingToken (pre-imputation only)
  std::string loc_cat;
  GeoPoint geo;
  std::array<int, 6> cc_months{};      // credit-card possession flags, months 1..6
  std::array<int, 6> wealth_months{};  // wealthy-status flags, months 1..6
  std::optional<int> task2_label;      // 1 = bought a credit card later
};

struct ActivityEvent {
  std::int64_t user_id = 0;
  int day_index = 0;      // 1..kHorizonDays
  std::string time_slot;  // a..f
  std::string channel;    // pos | web
  std::string card;       // credit | debit
  std::string amt_cat;    // a | b | c (ordinal)
  std::string loc_cat;
  std::string mc_cat;  // a..j (treated as ordinal)
  GeoPoint geo;
};

struct BranchInfo {
  int branch_id = 0;  // 0..B-1, contiguous
  GeoPoint geo;
};

struct VisitTarget {
  std::int64_t user_id = 0;
  int branch_id = 0;
  int visits = 0;
};

/// Ordinal code for amt_cat: a->1, b->2, c->3; 0 for missing/none.
inline int amt_ordinal(const std::string& tok) {
  if (tok.size() == 1 && tok[0] >= 'a' && tok[0] <= 'c') return tok[0] - 'a' + 1;
  return 0;
}

/// Ordinal code for mc_cat: a->1 .. j->10; 0 for missing/none.
inline int mc_ordinal(const std::string& tok) {
  if (tok.size() == 1 && tok[0] >= 'a' && tok[0] <= 'j') return tok[0] - 'a' + 1;
  return 0;
}

struct IntegrityReport {
  std::int64_t dropped_unknown_user_activities = 0;
  std::int64_t dropped_unknown_user_visits = 0;
  std::int64_t flagged_missing_geo_activities = 0;

  std::string summary() const;
};

/// In-memory dataset. Immutable after load_dataset(); safe to share across
/// parallel feature workers.
struct Dataset {
  std::vector<UserProfile> users;         // sorted by user_id
  std::vector<ActivityEvent> activities;  // sorted by (user_id, day_index, input order)
  std::vector<BranchInfo> branches;       // sorted by branch_id
  std::vector<VisitTarget> visits;        // sorted by (user_id, branch_id)
  IntegrityReport integrity;

  /// Rebuild the per-user activity/visit spans; call after mutating rows.
  void finalize();

  /// Index into users, or -1.
  std::ptrdiff_t user_index(std::int64_t user_id) const;

  /// Activities of the i-th user (users order).
  std::span<const ActivityEvent> user_activities(std::size_t user_idx) const;

  /// Visit targets of the i-th user (users order).
  std::span<const VisitTarget> user_visits(std::size_t user_idx) const;

 private:
  std::vector<std::pair<std::uint32_t, std::uint32_t>> activity_spans_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> visit_spans_;
};

}  // namespace tempofeat
