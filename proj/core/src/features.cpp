#include "tempofeat/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/csv.hpp"
#include "tempofeat/errors.hpp"
#include "tempofeat/parallel.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

int mode_code(const std::map<int, int>& counts) {
  if (counts.empty()) return 0;
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;  // first max = smallest code
  return best->first;
}

}  // namespace

FeatureSet parse_feature_set(const std::string& name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (int i = 1; i <= 10; ++i)
    if (up == "FS" + std::to_string(i)) return static_cast<FeatureSet>(i);
  throw ConfigError("unknown feature set '" + name + "' (expected FS1..FS10)");
}

std::string to_string(FeatureSet fs) { return "FS" + std::to_string(static_cast<int>(fs)); }

ActivityTimeline ActivityTimeline::from_events(std::int64_t user_id,
                                               std::span<const ActivityEvent> events,
                                               int horizon) {
  ActivityTimeline t;
  t.user_id = user_id;
  t.horizon = horizon;
  t.event_days.reserve(events.size());
  for (const auto& e : events) t.event_days.push_back(e.day_index);
  std::sort(t.event_days.begin(), t.event_days.end());
  t.distinct_days = t.event_days;
  t.distinct_days.erase(std::unique(t.distinct_days.begin(), t.distinct_days.end()),
                        t.distinct_days.end());
  return t;
}

std::vector<double> fs1_mean_activity(const std::vector<std::vector<double>>& encoded,
                                      std::size_t vector_length) {
  std::vector<double> out(vector_length, 0.0);
  if (encoded.empty()) return out;
  for (const auto& v : encoded) {
    if (v.size() != vector_length)
      throw std::invalid_argument("fs1_mean_activity: vector length mismatch");
    for (std::size_t i = 0; i < vector_length; ++i) out[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(encoded.size());
  for (auto& x : out) x *= inv;
  return out;
}

std::vector<double> recency_weighted_mean(const std::vector<std::vector<double>>& encoded,
                                          const std::vector<int>& day_indices,
                                          std::size_t vector_length) {
  if (encoded.size() != day_indices.size())
    throw std::invalid_argument("recency_weighted_mean: days/vectors length mismatch");
  std::vector<double> out(vector_length, 0.0);
  if (encoded.empty()) return out;
  double total = 0.0;
  for (std::size_t k = 0; k < encoded.size(); ++k) {
    if (encoded[k].size() != vector_length)
      throw std::invalid_argument("recency_weighted_mean: vector length mismatch");
    const double w = std::log(1.0 + static_cast<double>(day_indices[k]));
    total += w;
    for (std::size_t i = 0; i < vector_length; ++i) out[i] += w * encoded[k][i];
  }
  for (auto& x : out) x /= total;
  return out;
}

double min_branch_distance(const GeoPoint& point, std::span<const BranchInfo> branches) {
  if (branches.empty())
    throw std::invalid_argument("min_branch_distance: empty branch list");
  double best = euclidean(point, branches[0].geo);
  for (std::size_t i = 1; i < branches.size(); ++i)
    best = std::min(best, euclidean(point, branches[i].geo));
  return best;
}

CounterSet fs3_counters(const UserProfile& user, std::span<const ActivityEvent> events,
                        const EncodingMap& map, int horizon) {
  CounterSet c;
  for (int f : user.cc_months) c.months_credit_card += f;
  for (int f : user.wealth_months) c.months_wealthy += f;
  if (events.empty()) return c;

  const auto& slot_enc = map.activity_column("time_slot");
  const auto& loc_enc = map.activity_column("loc_cat");
  std::map<int, int> slot_counts, loc_counts;
  std::map<std::string, int> amt_seen, loc_seen, slot_seen, mc_seen;
  int last_day = 0;
  for (const auto& e : events) {
    if (e.channel == "pos") ++c.n_pos;
    if (e.channel == "web") ++c.n_web;
    if (e.card == "credit") ++c.n_credit;
    if (e.card == "debit") ++c.n_debit;
    ++amt_seen[e.amt_cat];
    ++loc_seen[e.loc_cat];
    ++slot_seen[e.time_slot];
    ++mc_seen[e.mc_cat];
    c.max_amt = std::max(c.max_amt, amt_ordinal(e.amt_cat));
    last_day = std::max(last_day, e.day_index);
    ++slot_counts[slot_enc.code_of(e.time_slot)];
    ++loc_counts[loc_enc.code_of(e.loc_cat)];
    ++c.n_total;
  }
  c.n_distinct_amt = static_cast<int>(amt_seen.size());
  c.n_distinct_locations = static_cast<int>(loc_seen.size());
  c.n_distinct_time_slots = static_cast<int>(slot_seen.size());
  c.n_distinct_mc = static_cast<int>(mc_seen.size());
  c.days_since_last = horizon - last_day;
  c.mode_time_slot = mode_code(slot_counts);
  c.mode_loc_cat = mode_code(loc_counts);
  return c;
}

std::pair<double, double> inter_activity_stats(const ActivityTimeline& timeline) {
  const auto& days = timeline.distinct_days;
  if (days.size() < 2) return {0.0, 0.0};
  const std::size_t m = days.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += days[i + 1] - days[i];
  const double mean = sum / static_cast<double>(m);
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = (days[i + 1] - days[i]) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(m))};
}

double clumpiness(const ActivityTimeline& timeline) {
  const auto& days = timeline.distinct_days;
  if (days.empty()) return 0.0;
  const double span = timeline.horizon + 1;  // gaps measured against t_0=0, t_{n+1}=N+1
  double sum = 0.0;
  int prev = 0;
  auto add_gap = [&](int gap) {
    if (gap <= 0) return;  // duplicate boundary, x*ln x -> 0
    const double x = gap / span;
    sum += x * std::log(x);
  };
  for (int d : days) {
    add_gap(d - prev);
    prev = d;
  }
  add_gap(timeline.horizon + 1 - prev);
  return 1.0 + sum / std::log(span);
}

std::pair<double, double> fs5_geo_features(const UserProfile& user,
                                           std::span<const ActivityEvent> events) {
  if (events.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (const auto& e : events) sum += euclidean(user.geo, e.geo);
  const double avg = sum / static_cast<double>(events.size());
  return {avg, avg / static_cast<double>(events.size())};
}

std::pair<double, double> trend_ratios(std::span<const int> seq) {
  if (seq.size() < 2) return {0.0, 0.0};
  int up = 0, down = 0;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (seq[i + 1] > seq[i]) ++up;
    if (seq[i + 1] < seq[i]) ++down;
  }
  const double pairs = static_cast<double>(seq.size() - 1);
  return {up / pairs, down / pairs};
}

GeoPoint mean_activity_geo(std::span<const ActivityEvent> events, const GeoPoint& home) {
  if (events.empty()) return home;
  GeoPoint g{0.0, 0.0};
  for (const auto& e : events) {
    g.x += e.geo.x;
    g.y += e.geo.y;
  }
  g.x /= static_cast<double>(events.size());
  g.y /= static_cast<double>(events.size());
  return g;
}

std::vector<ColumnInfo> feature_columns(const EncodingMap& map, FeatureSet fs,
                                        int n_clusters) {
  std::vector<ColumnInfo> cols;
  switch (fs) {
    case FeatureSet::FS1:
      for (const auto& name : map.event_manifest())
        cols.push_back({"fs1_mean_" + name, 1, ColumnKind::numeric});
      break;
    case FeatureSet::FS2:
      cols.push_back({"fs2_min_branch_dist", 2, ColumnKind::numeric});
      break;
    case FeatureSet::FS3:
      for (const char* n :
           {"fs3_n_pos", "fs3_n_web", "fs3_n_credit", "fs3_n_debit", "fs3_n_distinct_amt",
            "fs3_max_amt", "fs3_days_since_last", "fs3_n_distinct_loc",
            "fs3_n_distinct_slots", "fs3_n_distinct_mc", "fs3_n_total", "fs3_mode_slot",
            "fs3_mode_loc", "fs3_months_cc", "fs3_months_wealthy"})
        cols.push_back({n, 3, ColumnKind::numeric});
      break;
    case FeatureSet::FS4:
      for (const char* n : {"fs4_gap_mean", "fs4_gap_std", "fs4_clumpiness"})
        cols.push_back({n, 4, ColumnKind::numeric});
      break;
    case FeatureSet::FS5:
      for (const char* n : {"fs5_avg_dist", "fs5_dist_ratio"})
        cols.push_back({n, 5, ColumnKind::numeric});
      break;
    case FeatureSet::FS6:
      for (const char* n : {"fs6_amt_pos", "fs6_amt_neg", "fs6_mc_pos", "fs6_mc_neg"})
        cols.push_back({n, 6, ColumnKind::numeric});
      break;
    case FeatureSet::FS7:
      cols.push_back({"fs7_min_branch_dist_act", 7, ColumnKind::numeric});
      break;
    case FeatureSet::FS8:
      cols.push_back({"fs8_cluster", 8, ColumnKind::numeric});
      for (int i = 0; i < n_clusters; ++i)
        cols.push_back({"fs8_cluster=" + std::to_string(i), 8, ColumnKind::indicator});
      break;
    case FeatureSet::FS9:
      cols.push_back({"fs9_branch_dist", 9, ColumnKind::numeric});
      break;
    case FeatureSet::FS10:
      cols.push_back({"fs10_branch_dist_act", 10, ColumnKind::numeric});
      break;
  }
  return cols;
}

FeatureMatrix assemble(const Dataset& ds, const EncodingMap& map, const AssembleOptions& opt) {
  const int fs_level = static_cast<int>(opt.feature_set);
  if (fs_level >= 9 && !opt.allow_branch_placeholders)
    throw ConfigError(to_string(opt.feature_set) +
                      " is branch-parameterized and only available inside Task 1 "
                      "branch-bank training");
  if (fs_level >= 8) {
    if (opt.cluster_assignments == nullptr || opt.n_clusters <= 0)
      throw ConfigError(to_string(opt.feature_set) + " requires cluster assignments");
    if (opt.cluster_assignments->size() != ds.users.size())
      throw std::invalid_argument("cluster assignments do not match user count");
  }
  if (fs_level >= 2 && ds.branches.empty())
    throw std::invalid_argument("FS2+ requires at least one branch");

  FeatureMatrix fm;
  for (int level = 1; level <= fs_level; ++level) {
    auto cols = feature_columns(map, static_cast<FeatureSet>(level), opt.n_clusters);
    fm.manifest.insert(fm.manifest.end(), cols.begin(), cols.end());
  }
  const std::size_t n_cols = fm.manifest.size();
  const std::size_t n_users = ds.users.size();
  fm.values = FlatMatrix(n_users, n_cols);
  fm.user_ids.resize(n_users);
  for (std::size_t i = 0; i < n_users; ++i) fm.user_ids[i] = ds.users[i].user_id;

  const std::size_t event_len = map.event_vector_length();
  const bool strict = !opt.lenient_encoding;

  parallel_for(n_users, opt.workers, [&](std::size_t ui) {
    const UserProfile& user = ds.users[ui];
    const auto events = ds.user_activities(ui);
    auto row = fm.values.row(ui);
    std::size_t at = 0;

    // FS1: averaged encoded activity vectors
    {
      std::vector<double> acc(event_len, 0.0), buf(event_len, 0.0);
      double total_w = 0.0;
      for (const auto& e : events) {
        one_hot_into(e, map, strict, buf);
        const double w =
            opt.recency_weighted ? std::log(1.0 + static_cast<double>(e.day_index)) : 1.0;
        total_w += w;
        for (std::size_t i = 0; i < event_len; ++i) acc[i] += w * buf[i];
      }
      if (total_w > 0.0)
        for (std::size_t i = 0; i < event_len; ++i) acc[i] /= total_w;
      std::copy(acc.begin(), acc.end(), row.begin() + at);
      at += event_len;
    }
    if (fs_level < 2) return;

    row[at++] = min_branch_distance(user.geo, ds.branches);
    if (fs_level < 3) return;

    {
      const CounterSet c = fs3_counters(user, events, map);
      const int vals[15] = {c.n_pos,
                            c.n_web,
                            c.n_credit,
                            c.n_debit,
                            c.n_distinct_amt,
                            c.max_amt,
                            c.days_since_last,
                            c.n_distinct_locations,
                            c.n_distinct_time_slots,
                            c.n_distinct_mc,
                            c.n_total,
                            c.mode_time_slot,
                            c.mode_loc_cat,
                            c.months_credit_card,
                            c.months_wealthy};
      for (int v : vals) row[at++] = v;
    }
    if (fs_level < 4) return;

    {
      const auto timeline = ActivityTimeline::from_events(user.user_id, events);
      const auto [gap_mean, gap_std] = inter_activity_stats(timeline);
      row[at++] = gap_mean;
      row[at++] = gap_std;
      row[at++] = clumpiness(timeline);
    }
    if (fs_level < 5) return;

    {
      const auto [avg, ratio] = fs5_geo_features(user, events);
      row[at++] = avg;
      row[at++] = ratio;
    }
    if (fs_level < 6) return;

    {
      std::vector<int> amt_seq, mc_seq;
      amt_seq.reserve(events.size());
      mc_seq.reserve(events.size());
      for (const auto& e : events) {
        amt_seq.push_back(amt_ordinal(e.amt_cat));
        mc_seq.push_back(mc_ordinal(e.mc_cat));
      }
      const auto [ap, an] = trend_ratios(amt_seq);
      const auto [mp, mn] = trend_ratios(mc_seq);
      row[at++] = ap;
      row[at++] = an;
      row[at++] = mp;
      row[at++] = mn;
    }
    if (fs_level < 7) return;

    row[at++] = min_branch_distance(mean_activity_geo(events, user.geo), ds.branches);
    if (fs_level < 8) return;

    {
      const int cid = (*opt.cluster_assignments)[ui];
      row[at++] = cid;
      for (int i = 0; i < opt.n_clusters; ++i) row[at++] = (i == cid) ? 1.0 : 0.0;
    }
    // FS9/FS10 placeholders stay zero; per-branch training fills them.
  });

  return fm;
}

FeatureMatrix log_transform(FeatureMatrix m) {
  for (std::size_t c = 0; c < m.n_cols(); ++c) {
    if (m.manifest[c].kind != ColumnKind::numeric) continue;
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
      double& x = m.values.at(r, c);
      x = std::log1p(std::max(x, 0.0));
    }
  }
  return m;
}

FeatureScaler fit_scaler(const FeatureMatrix& m) {
  if (m.n_rows() < 2)
    throw std::invalid_argument("fit_scaler: need at least 2 rows");
  FeatureScaler s;
  s.mean.assign(m.n_cols(), 0.0);
  s.stddev.assign(m.n_cols(), 0.0);
  const double n = static_cast<double>(m.n_rows());
  for (std::size_t c = 0; c < m.n_cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < m.n_rows(); ++r) sum += m.values.at(r, c);
    s.mean[c] = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
      const double d = m.values.at(r, c) - s.mean[c];
      ss += d * d;
    }
    s.stddev[c] = std::sqrt(ss / n);  // population std
  }
  return s;
}

void FeatureScaler::apply(FeatureMatrix& m) const {
  if (m.n_cols() != mean.size())
    throw std::invalid_argument("FeatureScaler: column count mismatch");
  for (std::size_t c = 0; c < m.n_cols(); ++c) {
    const double mu = mean[c];
    const double sd = stddev[c];
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
      double& x = m.values.at(r, c);
      x = sd > 0.0 ? (x - mu) / sd : 0.0;
    }
  }
}

std::string FeatureScaler::to_json_string() const {
  json j;
  j["mean"] = mean;
  j["stddev"] = stddev;
  return j.dump();
}

FeatureScaler FeatureScaler::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  FeatureScaler s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stddev = j.at("stddev").get<std::vector<double>>();
  return s;
}

std::string FeatureMatrix::manifest_json(FeatureSet fs) const {
  json cols = json::array();
  for (const auto& c : manifest)
    cols.push_back({{"name", c.name},
                    {"feature_set", c.feature_set},
                    {"type", c.kind == ColumnKind::indicator ? "indicator" : "numeric"}});
  json j;
  j["feature_set"] = to_string(fs);
  j["n_columns"] = manifest.size();
  j["columns"] = cols;
  return j.dump(2);
}

void FeatureMatrix::save_csv(const std::filesystem::path& path) const {
  std::vector<std::string> header;
  header.reserve(n_cols() + 1);
  header.push_back("user_id");
  for (const auto& c : manifest) header.push_back(c.name);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(n_rows());
  for (std::size_t r = 0; r < n_rows(); ++r) {
    std::vector<std::string> fields;
    fields.reserve(n_cols() + 1);
    fields.push_back(std::to_string(user_ids[r]));
    for (std::size_t c = 0; c < n_cols(); ++c) fields.push_back(format_double(values.at(r, c)));
    rows.push_back(std::move(fields));
  }
  write_csv(path, header, rows);
}

std::uint64_t FeatureMatrix::manifest_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& c : manifest) {
    h = fnv1a64(c.name, h);
    h = fnv1a64(std::to_string(c.feature_set), h);
    h = fnv1a64(std::string(c.kind == ColumnKind::indicator ? "i" : "n"), h);
  }
  return h;
}

}  // namespace tempofeat
