#include "tempofeat/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tempofeat/csv.hpp"
#include "tempofeat/errors.hpp"

namespace tempofeat {

namespace {

// Cumulative day counts for Jan..Jun 2014 (not a leap year).
constexpr int kMonthDays[6] = {31, 28, 31, 30, 31, 30};

const std::vector<std::string> kUsersHeader = {
    "user_id", "age_cat", "loc_cat", "geo_x", "geo_y", "c1", "c2", "c3", "c4",
    "c5",      "c6",      "w1",      "w2",    "w3",    "w4", "w5", "w6"};
const std::vector<std::string> kActivitiesHeader = {
    "user_id", "date",    "time_slot", "channel", "card",
    "amt_cat", "loc_cat", "mc_cat",    "geo_x",   "geo_y"};
const std::vector<std::string> kBranchesHeader = {"branch_id", "geo_x", "geo_y"};
const std::vector<std::string> kVisitsHeader = {"user_id", "branch_id", "visits"};

bool is_missing(const std::string& s) { return s == "-"; }

void check_header(const CsvTable& t, const std::vector<std::string>& expected,
                  bool allow_extra_target = false) {
  const bool has_target = allow_extra_target && t.header.size() == expected.size() + 1 &&
                          t.header.back() == "target";
  if (!has_target && t.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw ParseError(t.path, 1, "-", "unexpected header; want '" + want +
                                         (allow_extra_target ? "[,target]'" : "'"));
  }
}

std::string token_or_missing(const std::string& s) {
  return is_missing(s) ? kMissingToken : s;
}

// A categorical token restricted to a closed single-letter domain.
std::string closed_token(const std::string& s, char lo, char hi, const std::string& file,
                         std::size_t line, const std::string& column) {
  if (is_missing(s)) return kMissingToken;
  if (s.size() == 1 && s[0] >= lo && s[0] <= hi) return s;
  throw ParseError(file, line, column,
                   "unknown category token '" + s + "' (expected '" + lo + "'..'" + hi + "')");
}

std::string choice_token(const std::string& s, std::initializer_list<const char*> domain,
                         const std::string& file, std::size_t line,
                         const std::string& column) {
  if (is_missing(s)) return kMissingToken;
  for (const char* d : domain)
    if (s == d) return s;
  throw ParseError(file, line, column, "unknown category token '" + s + "'");
}

double numeric_or_zero(const std::string& s, const std::string& file, std::size_t line,
                       const std::string& column, bool* was_missing = nullptr) {
  if (is_missing(s)) {
    if (was_missing) *was_missing = true;
    return 0.0;
  }
  return parse_double_field(s, file, line, column);
}

int flag_field(const std::string& s, const std::string& file, std::size_t line,
               const std::string& column) {
  if (is_missing(s)) return 0;
  const std::int64_t v = parse_int_field(s, file, line, column);
  if (v != 0 && v != 1)
    throw ParseError(file, line, column, "flag must be 0 or 1, got '" + s + "'");
  return static_cast<int>(v);
}

std::string serialize_token(const std::string& tok) {
  return tok == kMissingToken ? "-" : tok;
}

std::vector<std::vector<std::string>> users_rows(const Dataset& ds, bool with_target) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.users.size());
  for (const auto& u : ds.users) {
    std::vector<std::string> r;
    r.reserve(with_target ? 18 : 17);
    r.push_back(std::to_string(u.user_id));
    r.push_back(serialize_token(u.age_cat));
    r.push_back(serialize_token(u.loc_cat));
    r.push_back(format_double(u.geo.x));
    r.push_back(format_double(u.geo.y));
    for (int f : u.cc_months) r.push_back(std::to_string(f));
    for (int f : u.wealth_months) r.push_back(std::to_string(f));
    if (with_target)
      r.push_back(u.task2_label ? std::to_string(*u.task2_label) : std::string("-"));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::vector<std::string>> activities_rows(const Dataset& ds) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.activities.size());
  for (const auto& a : ds.activities) {
    rows.push_back({std::to_string(a.user_id), date_from_day_index(a.day_index),
                    serialize_token(a.time_slot), serialize_token(a.channel),
                    serialize_token(a.card), serialize_token(a.amt_cat),
                    serialize_token(a.loc_cat), serialize_token(a.mc_cat),
                    format_double(a.geo.x), format_double(a.geo.y)});
  }
  return rows;
}

std::vector<std::vector<std::string>> branches_rows(const Dataset& ds) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.branches.size());
  for (const auto& b : ds.branches)
    rows.push_back(
        {std::to_string(b.branch_id), format_double(b.geo.x), format_double(b.geo.y)});
  return rows;
}

std::vector<std::vector<std::string>> visits_rows(const Dataset& ds) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.visits.size());
  for (const auto& v : ds.visits)
    rows.push_back({std::to_string(v.user_id), std::to_string(v.branch_id),
                    std::to_string(v.visits)});
  return rows;
}

std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out.push_back(',');
      out += fields[i];
    }
    out.push_back('\n');
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

}  // namespace

std::string IntegrityReport::summary() const {
  std::ostringstream os;
  os << "dropped activities (unknown user): " << dropped_unknown_user_activities
     << ", dropped visits (unknown user): " << dropped_unknown_user_visits
     << ", activities with missing geo: " << flagged_missing_geo_activities;
  return os.str();
}

void Dataset::finalize() {
  std::sort(users.begin(), users.end(),
            [](const UserProfile& a, const UserProfile& b) { return a.user_id < b.user_id; });
  std::stable_sort(activities.begin(), activities.end(),
                   [](const ActivityEvent& a, const ActivityEvent& b) {
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     return a.day_index < b.day_index;
                   });
  std::sort(visits.begin(), visits.end(), [](const VisitTarget& a, const VisitTarget& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.branch_id < b.branch_id;
  });
  std::sort(branches.begin(), branches.end(),
            [](const BranchInfo& a, const BranchInfo& b) { return a.branch_id < b.branch_id; });

  activity_spans_.assign(users.size(), {0, 0});
  visit_spans_.assign(users.size(), {0, 0});
  std::size_t ai = 0, vi = 0;
  for (std::size_t ui = 0; ui < users.size(); ++ui) {
    const std::int64_t id = users[ui].user_id;
    const auto a_begin = static_cast<std::uint32_t>(ai);
    while (ai < activities.size() && activities[ai].user_id == id) ++ai;
    activity_spans_[ui] = {a_begin, static_cast<std::uint32_t>(ai)};
    const auto v_begin = static_cast<std::uint32_t>(vi);
    while (vi < visits.size() && visits[vi].user_id == id) ++vi;
    visit_spans_[ui] = {v_begin, static_cast<std::uint32_t>(vi)};
  }
}

std::ptrdiff_t Dataset::user_index(std::int64_t user_id) const {
  auto it = std::lower_bound(
      users.begin(), users.end(), user_id,
      [](const UserProfile& u, std::int64_t id) { return u.user_id < id; });
  if (it == users.end() || it->user_id != user_id) return -1;
  return it - users.begin();
}

std::span<const ActivityEvent> Dataset::user_activities(std::size_t user_idx) const {
  const auto [b, e] = activity_spans_[user_idx];
  return {activities.data() + b, static_cast<std::size_t>(e - b)};
}

std::span<const VisitTarget> Dataset::user_visits(std::size_t user_idx) const {
  const auto [b, e] = visit_spans_[user_idx];
  return {visits.data() + b, static_cast<std::size_t>(e - b)};
}

LoadPaths LoadPaths::in_dir(const std::filesystem::path& dir, bool with_visits) {
  LoadPaths p;
  p.users = dir / "users.csv";
  p.activities = dir / "activities.csv";
  p.branches = dir / "branches.csv";
  if (with_visits) p.visits = dir / "visits.csv";
  return p;
}

int day_index_from_date(const std::string& ymd, const std::string& file, std::size_t line) {
  auto fail = [&](const std::string& why) -> int {
    throw ParseError(file, line, "date", why + ": '" + ymd + "'");
  };
  if (ymd.size() != 10 || ymd[4] != '-' || ymd[7] != '-') return fail("bad date format");
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (ymd[i] < '0' || ymd[i] > '9') return fail("bad date format");
  const int year = std::stoi(ymd.substr(0, 4));
  const int month = std::stoi(ymd.substr(5, 2));
  const int day = std::stoi(ymd.substr(8, 2));
  if (year != 2014 || month < 1 || month > 6)
    return fail("date outside 2014-01-01..2014-06-30");
  if (day < 1 || day > kMonthDays[month - 1]) return fail("day out of range for month");
  int idx = day;
  for (int m = 0; m < month - 1; ++m) idx += kMonthDays[m];
  return idx;  // 1..181 by construction
}

std::string date_from_day_index(int day_index) {
  int rest = day_index;
  int month = 1;
  while (rest > kMonthDays[month - 1]) {
    rest -= kMonthDays[month - 1];
    ++month;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "2014-%02d-%02d", month, rest);
  return buf;
}

Dataset load_dataset(const LoadPaths& paths) {
  Dataset ds;

  // users
  {
    const CsvTable t = read_csv(paths.users);
    check_header(t, kUsersHeader, /*allow_extra_target=*/true);
    const bool has_target = t.header.size() == kUsersHeader.size() + 1;
    std::size_t line = 1;
    for (const auto& r : t.rows) {
      ++line;
      UserProfile u;
      if (is_missing(r[0]))
        throw ParseError(t.path, line, "user_id", "id fields cannot be missing");
      u.user_id = parse_int_field(r[0], t.path, line, "user_id");
      if (u.user_id < 0)
        throw ParseError(t.path, line, "user_id", "user_id must be non-negative");
      u.age_cat = closed_token(r[1], 'a', 'c', t.path, line, "age_cat");
      u.loc_cat = token_or_missing(r[2]);
      u.geo.x = numeric_or_zero(r[3], t.path, line, "geo_x");
      u.geo.y = numeric_or_zero(r[4], t.path, line, "geo_y");
      for (int i = 0; i < 6; ++i)
        u.cc_months[i] = flag_field(r[5 + i], t.path, line, kUsersHeader[5 + i]);
      for (int i = 0; i < 6; ++i)
        u.wealth_months[i] = flag_field(r[11 + i], t.path, line, kUsersHeader[11 + i]);
      if (has_target && !is_missing(r[17])) {
        const std::int64_t v = parse_int_field(r[17], t.path, line, "target");
        if (v != 0 && v != 1)
          throw ParseError(t.path, line, "target", "label must be 0 or 1");
        u.task2_label = static_cast<int>(v);
      }
      ds.users.push_back(std::move(u));
    }
  }
  {
    std::unordered_set<std::int64_t> seen;
    seen.reserve(ds.users.size());
    for (const auto& u : ds.users)
      if (!seen.insert(u.user_id).second)
        throw IntegrityError("duplicate user_id " + std::to_string(u.user_id) + " in " +
                             paths.users.string());
  }

  std::unordered_set<std::int64_t> known_users;
  known_users.reserve(ds.users.size());
  for (const auto& u : ds.users) known_users.insert(u.user_id);

  // branches
  {
    const CsvTable t = read_csv(paths.branches);
    check_header(t, kBranchesHeader);
    std::size_t line = 1;
    for (const auto& r : t.rows) {
      ++line;
      BranchInfo b;
      if (is_missing(r[0]))
        throw ParseError(t.path, line, "branch_id", "id fields cannot be missing");
      b.branch_id = static_cast<int>(parse_int_field(r[0], t.path, line, "branch_id"));
      b.geo.x = numeric_or_zero(r[1], t.path, line, "geo_x");
      b.geo.y = numeric_or_zero(r[2], t.path, line, "geo_y");
      ds.branches.push_back(b);
    }
    std::sort(ds.branches.begin(), ds.branches.end(),
              [](const BranchInfo& a, const BranchInfo& b) { return a.branch_id < b.branch_id; });
    for (std::size_t i = 0; i < ds.branches.size(); ++i)
      if (ds.branches[i].branch_id != static_cast<int>(i))
        throw IntegrityError("branch ids must be unique and contiguous 0..B-1 in " +
                             paths.branches.string());
  }

  // activities
  {
    const CsvTable t = read_csv(paths.activities);
    check_header(t, kActivitiesHeader);
    std::size_t line = 1;
    for (const auto& r : t.rows) {
      ++line;
      ActivityEvent a;
      if (is_missing(r[0]))
        throw ParseError(t.path, line, "user_id", "id fields cannot be missing");
      a.user_id = parse_int_field(r[0], t.path, line, "user_id");
      if (is_missing(r[1]))
        throw ParseError(t.path, line, "date", "activity date cannot be missing");
      a.day_index = day_index_from_date(r[1], t.path, line);
      a.time_slot = closed_token(r[2], 'a', 'f', t.path, line, "time_slot");
      a.channel = choice_token(r[3], {"pos", "web"}, t.path, line, "channel");
      a.card = choice_token(r[4], {"credit", "debit"}, t.path, line, "card");
      a.amt_cat = closed_token(r[5], 'a', 'c', t.path, line, "amt_cat");
      a.loc_cat = token_or_missing(r[6]);
      a.mc_cat = closed_token(r[7], 'a', 'j', t.path, line, "mc_cat");
      bool geo_missing = false;
      a.geo.x = numeric_or_zero(r[8], t.path, line, "geo_x", &geo_missing);
      a.geo.y = numeric_or_zero(r[9], t.path, line, "geo_y", &geo_missing);
      if (geo_missing) ++ds.integrity.flagged_missing_geo_activities;
      if (!known_users.count(a.user_id)) {
        ++ds.integrity.dropped_unknown_user_activities;
        continue;
      }
      ds.activities.push_back(std::move(a));
    }
  }

  // visit targets (optional table)
  if (!paths.visits.empty()) {
    const CsvTable t = read_csv(paths.visits);
    check_header(t, kVisitsHeader);
    std::size_t line = 1;
    std::set<std::pair<std::int64_t, int>> seen;
    for (const auto& r : t.rows) {
      ++line;
      VisitTarget v;
      if (is_missing(r[0]) || is_missing(r[1]))
        throw ParseError(t.path, line, "user_id/branch_id", "id fields cannot be missing");
      v.user_id = parse_int_field(r[0], t.path, line, "user_id");
      v.branch_id = static_cast<int>(parse_int_field(r[1], t.path, line, "branch_id"));
      const double raw = numeric_or_zero(r[2], t.path, line, "visits");
      if (raw < 0) throw ParseError(t.path, line, "visits", "visit count must be >= 0");
      v.visits = static_cast<int>(raw);
      if (v.branch_id < 0 || v.branch_id >= static_cast<int>(ds.branches.size()))
        throw IntegrityError("visits row " + std::to_string(line) + " references unknown branch " +
                             std::to_string(v.branch_id));
      if (!known_users.count(v.user_id)) {
        ++ds.integrity.dropped_unknown_user_visits;
        continue;
      }
      if (!seen.insert({v.user_id, v.branch_id}).second)
        throw IntegrityError("duplicate (user_id, branch_id) in " + paths.visits.string() +
                             " line " + std::to_string(line));
      ds.visits.push_back(v);
    }
  }

  ds.finalize();
  return ds;
}

void save_dataset(const Dataset& ds, const LoadPaths& paths) {
  const bool with_target =
      std::any_of(ds.users.begin(), ds.users.end(),
                  [](const UserProfile& u) { return u.task2_label.has_value(); });
  auto header = kUsersHeader;
  if (with_target) header.push_back("target");
  write_csv(paths.users, header, users_rows(ds, with_target));
  write_csv(paths.activities, kActivitiesHeader, activities_rows(ds));
  write_csv(paths.branches, kBranchesHeader, branches_rows(ds));
  if (!paths.visits.empty()) write_csv(paths.visits, kVisitsHeader, visits_rows(ds));
}

std::uint64_t dataset_fingerprint(const Dataset& ds) {
  const bool with_target =
      std::any_of(ds.users.begin(), ds.users.end(),
                  [](const UserProfile& u) { return u.task2_label.has_value(); });
  auto header = kUsersHeader;
  if (with_target) header.push_back("target");
  std::uint64_t h = fnv1a64(csv_text(header, users_rows(ds, with_target)));
  h = fnv1a64(csv_text(kActivitiesHeader, activities_rows(ds)), h);
  h = fnv1a64(csv_text(kBranchesHeader, branches_rows(ds)), h);
  h = fnv1a64(csv_text(kVisitsHeader, visits_rows(ds)), h);
  return h;
}

std::string age_mode(const std::vector<UserProfile>& users) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& u : users)
    if (u.age_cat != kMissingToken) ++counts[u.age_cat];
  if (counts.empty())
    throw IntegrityError("age_cat imputation: every value is missing, no mode defined");
  // counts is ordered by token, so the first maximum is the lexicographic tie-break
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

void apply_age_imputation(std::vector<UserProfile>& users, const std::string& category) {
  for (auto& u : users)
    if (u.age_cat == kMissingToken) u.age_cat = category;
}

std::vector<UserProfile> impute_age_cat(std::vector<UserProfile> users) {
  const std::string mode = age_mode(users);
  apply_age_imputation(users, mode);
  return users;
}

Dataset subset_users(const Dataset& ds, std::vector<std::int64_t> user_ids) {
  std::sort(user_ids.begin(), user_ids.end());
  auto keep = [&user_ids](std::int64_t id) {
    return std::binary_search(user_ids.begin(), user_ids.end(), id);
  };
  Dataset out;
  out.branches = ds.branches;
  for (const auto& u : ds.users)
    if (keep(u.user_id)) out.users.push_back(u);
  for (const auto& a : ds.activities)
    if (keep(a.user_id)) out.activities.push_back(a);
  for (const auto& v : ds.visits)
    if (keep(v.user_id)) out.visits.push_back(v);
  out.finalize();
  return out;
}

}  // namespace tempofeat
