#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tempofeat/types.hpp"

namespace tempofeat {

/// Label encoding of one categorical column: tokens in lexicographic order,
/// codes 0..K-1.
struct ColumnEncoding {
  std::string column;
  std::vector<std::string> tokens;  // sorted, unique

  int code_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
  }
  int size() const { return static_cast<int>(tokens.size()); }

  static ColumnEncoding from_tokens(std::string column, std::vector<std::string> tokens);

 private:
  std::unordered_map<std::string, int> index_;
};

/// Encodings for every categorical column of users and activities. Columns
/// that may carry "-" in the raw files always include kMissingToken.
struct EncodingMap {
  std::vector<ColumnEncoding> user_columns;      // age_cat, loc_cat
  std::vector<ColumnEncoding> activity_columns;  // time_slot, channel, card, amt_cat,
                                                 // loc_cat, mc_cat (schema order)

  const ColumnEncoding& activity_column(const std::string& name) const;
  const ColumnEncoding& user_column(const std::string& name) const;

  /// Length of a one-hot encoded activity vector: sum of activity domain
  /// sizes plus the two geo coordinates.
  std::size_t event_vector_length() const;

  /// Column names of the encoded activity vector, one per slot.
  std::vector<std::string> event_manifest() const;

  std::string to_json_string() const;
  static EncodingMap from_json_string(const std::string& text);
};

EncodingMap fit_encoding(const Dataset& ds);

/// One-hot encode an activity: one indicator block per categorical column in
/// manifest order, then geo_x, geo_y. With strict=true an unknown token
/// throws; otherwise it falls into the column's missing-token slot.
std::vector<double> one_hot(const ActivityEvent& event, const EncodingMap& map,
                            bool strict = true);

/// Allocation-free variant; `out` must have event_vector_length() slots and
/// is fully overwritten.
void one_hot_into(const ActivityEvent& event, const EncodingMap& map, bool strict,
                  std::span<double> out);

}  // namespace tempofeat
