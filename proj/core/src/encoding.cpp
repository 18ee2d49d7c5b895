#include "tempofeat/encoding.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/errors.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

ColumnEncoding fit_column(const std::string& name, std::set<std::string>&& tokens) {
  tokens.insert(kMissingToken);  // columns may carry "-" in the raw files
  if (tokens.empty()) throw IntegrityError("empty domain for column " + name);
  return ColumnEncoding::from_tokens(name, {tokens.begin(), tokens.end()});
}

void encode_block(const ColumnEncoding& col, const std::string& token, bool strict,
                  std::span<double>& out, std::size_t& offset) {
  int code = col.code_of(token);
  if (code < 0) {
    if (strict)
      throw std::invalid_argument("unknown category '" + token + "' in column " + col.column);
    code = col.code_of(kMissingToken);
    if (code < 0)
      throw std::invalid_argument("column " + col.column + " has no missing-token slot");
  }
  for (int i = 0; i < col.size(); ++i) out[offset + i] = 0.0;
  out[offset + static_cast<std::size_t>(code)] = 1.0;
  offset += static_cast<std::size_t>(col.size());
}

}  // namespace

ColumnEncoding ColumnEncoding::from_tokens(std::string column,
                                           std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  if (tokens.empty()) throw IntegrityError("empty domain for column " + column);
  ColumnEncoding enc;
  enc.column = std::move(column);
  enc.tokens = std::move(tokens);
  for (std::size_t i = 0; i < enc.tokens.size(); ++i)
    enc.index_[enc.tokens[i]] = static_cast<int>(i);
  return enc;
}

const ColumnEncoding& EncodingMap::activity_column(const std::string& name) const {
  for (const auto& c : activity_columns)
    if (c.column == name) return c;
  throw std::invalid_argument("no such activity column: " + name);
}

const ColumnEncoding& EncodingMap::user_column(const std::string& name) const {
  for (const auto& c : user_columns)
    if (c.column == name) return c;
  throw std::invalid_argument("no such user column: " + name);
}

std::size_t EncodingMap::event_vector_length() const {
  std::size_t n = 2;  // geo_x, geo_y
  for (const auto& c : activity_columns) n += static_cast<std::size_t>(c.size());
  return n;
}

std::vector<std::string> EncodingMap::event_manifest() const {
  std::vector<std::string> names;
  names.reserve(event_vector_length());
  for (const auto& c : activity_columns)
    for (const auto& t : c.tokens) names.push_back(c.column + "=" + t);
  names.push_back("geo_x");
  names.push_back("geo_y");
  return names;
}

EncodingMap fit_encoding(const Dataset& ds) {
  std::set<std::string> age, uloc, slot, channel, card, amt, aloc, mc;
  for (const auto& u : ds.users) {
    age.insert(u.age_cat);
    uloc.insert(u.loc_cat);
  }
  for (const auto& a : ds.activities) {
    slot.insert(a.time_slot);
    channel.insert(a.channel);
    card.insert(a.card);
    amt.insert(a.amt_cat);
    aloc.insert(a.loc_cat);
    mc.insert(a.mc_cat);
  }
  EncodingMap map;
  map.user_columns.push_back(fit_column("age_cat", std::move(age)));
  map.user_columns.push_back(fit_column("loc_cat", std::move(uloc)));
  map.activity_columns.push_back(fit_column("time_slot", std::move(slot)));
  map.activity_columns.push_back(fit_column("channel", std::move(channel)));
  map.activity_columns.push_back(fit_column("card", std::move(card)));
  map.activity_columns.push_back(fit_column("amt_cat", std::move(amt)));
  map.activity_columns.push_back(fit_column("loc_cat", std::move(aloc)));
  map.activity_columns.push_back(fit_column("mc_cat", std::move(mc)));
  return map;
}

void one_hot_into(const ActivityEvent& event, const EncodingMap& map, bool strict,
                  std::span<double> out) {
  if (out.size() != map.event_vector_length())
    throw std::invalid_argument("one_hot_into: output span has wrong length");
  auto field_of = [&event](const std::string& column) -> const std::string& {
    if (column == "time_slot") return event.time_slot;
    if (column == "channel") return event.channel;
    if (column == "card") return event.card;
    if (column == "amt_cat") return event.amt_cat;
    if (column == "loc_cat") return event.loc_cat;
    if (column == "mc_cat") return event.mc_cat;
    throw std::invalid_argument("unknown activity column: " + column);
  };
  std::span<double> span = out;
  std::size_t offset = 0;
  for (const auto& col : map.activity_columns)
    encode_block(col, field_of(col.column), strict, span, offset);
  out[offset] = event.geo.x;
  out[offset + 1] = event.geo.y;
}

std::vector<double> one_hot(const ActivityEvent& event, const EncodingMap& map, bool strict) {
  std::vector<double> out(map.event_vector_length());
  one_hot_into(event, map, strict, out);
  return out;
}

std::string EncodingMap::to_json_string() const {
  json j;
  auto dump_cols = [](const std::vector<ColumnEncoding>& cols) {
    json arr = json::array();
    for (const auto& c : cols) arr.push_back({{"column", c.column}, {"tokens", c.tokens}});
    return arr;
  };
  j["user_columns"] = dump_cols(user_columns);
  j["activity_columns"] = dump_cols(activity_columns);
  return j.dump();
}

EncodingMap EncodingMap::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  EncodingMap map;
  auto load_cols = [](const json& arr) {
    std::vector<ColumnEncoding> cols;
    for (const auto& c : arr)
      cols.push_back(ColumnEncoding::from_tokens(c.at("column").get<std::string>(),
                                                 c.at("tokens").get<std::vector<std::string>>()));
    return cols;
  };
  map.user_columns = load_cols(j.at("user_columns"));
  map.activity_columns = load_cols(j.at("activity_columns"));
  return map;
}

}  // namespace tempofeat
