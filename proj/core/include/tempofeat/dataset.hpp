#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tempofeat/types.hpp"

namespace tempofeat {

struct LoadPaths {
  std::filesystem::path users;
  std::filesystem::path activities;
  std::filesystem::path branches;
  std::filesystem::path visits;  // optional; leave empty when there are no Task 1 targets

  /// Conventional file names under a data directory.
  static LoadPaths in_dir(const std::filesystem::path& dir, bool with_visits = true);
};

/// Parse the input tables, applying the missing-value rules: "-" in a
/// categorical column becomes kMissingToken, "-" in a numeric column becomes
/// 0. Activities referencing unknown users are dropped and counted in the
/// integrity report. Throws ParseError / IntegrityError.
Dataset load_dataset(const LoadPaths& paths);

/// Serialize back to CSV; kMissingToken is written as "-".
void save_dataset(const Dataset& ds, const LoadPaths& paths);

/// Canonical CSV serialization of the whole dataset, hashed. Used as the data
/// fingerprint in score reports.
std::uint64_t dataset_fingerprint(const Dataset& ds);

/// Modal non-missing age category, ties broken by lexicographically smallest.
/// Throws if every age_cat is missing.
std::string age_mode(const std::vector<UserProfile>& users);

void apply_age_imputation(std::vector<UserProfile>& users, const std::string& category);

/// Replace missing age categories by the modal category of the same list.
std::vector<UserProfile> impute_age_cat(std::vector<UserProfile> users);

/// Restrict a dataset to the given users (activities and visit targets
/// follow); branches are shared. `user_ids` need not be sorted.
Dataset subset_users(const Dataset& ds, std::vector<std::int64_t> user_ids);

/// Day index in 1..181 for a YYYY-MM-DD date in the first half of 2014.
int day_index_from_date(const std::string& ymd, const std::string& file, std::size_t line);

/// Inverse of day_index_from_date.
std::string date_from_day_index(int day_index);

}  // namespace tempofeat
