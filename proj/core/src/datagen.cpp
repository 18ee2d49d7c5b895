#include "tempofeat/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tempofeat/csv.hpp"
#include "tempofeat/dataset.hpp"
#include "tempofeat/parallel.hpp"
#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

constexpr std::uint64_t kUserStream = 1'000'000;
constexpr std::uint64_t kLabelStream = 2'000'000;
constexpr std::uint64_t kMissingStream = 3'000'000;

struct UserDraw {
  UserProfile profile;
  std::vector<ActivityEvent> events;       // chronological
  std::vector<int> visits;                 // per branch
  std::vector<double> visit_rates;         // per branch
  int cluster = 0;
  double intensity = 0.0;
};

std::string loc_token(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "L%02d", i % 100);
  return buf;
}

char ordinal_token(int code) { return static_cast<char>('a' + code - 1); }

UserDraw draw_user(const GenConfig& cfg, std::int64_t uid,
                   const std::vector<GeoPoint>& centers,
                   const std::vector<BranchInfo>& branches, Rng rng) {
  UserDraw d;
  d.profile.user_id = uid;

  d.cluster = static_cast<int>(rng.uniform_int(0, cfg.k_true - 1));
  d.profile.geo = {centers[d.cluster].x + rng.normal() * cfg.cluster_spread,
                   centers[d.cluster].y + rng.normal() * cfg.cluster_spread};

  const double r_age = rng.uniform();
  d.profile.age_cat = r_age < 0.30 ? "a" : (r_age < 0.85 ? "b" : "c");

  const double affluence = rng.uniform();
  // wealthy-month flags lean on affluence; credit-card possession is a
  // contiguous run from a start month
  for (int m = 0; m < 6; ++m)
    d.profile.wealth_months[m] = rng.flip(0.8 * affluence) ? 1 : 0;
  if (rng.flip(0.55)) {
    const int start = static_cast<int>(rng.uniform_int(0, 5));
    for (int m = start; m < 6; ++m) d.profile.cc_months[m] = 1;
  }

  const int primary_loc = static_cast<int>(rng.uniform_int(0, cfg.n_loc_tokens - 1));
  d.profile.loc_cat = loc_token(primary_loc);

  d.intensity = rng.uniform(cfg.rate_lo, cfg.rate_hi);
  const bool inactive = rng.flip(cfg.inactive_prob);
  const bool bursty = rng.flip(cfg.burst_prob);

  std::vector<char> active(cfg.n_days + 1, 0);
  if (!inactive) {
    if (bursty) {
      const int n_win = 1 + static_cast<int>(rng.uniform_int(0, 2));
      for (int w = 0; w < n_win; ++w) {
        const int len = static_cast<int>(rng.uniform_int(4, 18));
        const int start = static_cast<int>(rng.uniform_int(1, cfg.n_days - len + 1));
        for (int day = start; day < start + len; ++day)
          if (rng.flip(0.65)) active[day] = 1;
      }
    } else {
      for (int day = 1; day <= cfg.n_days; ++day)
        if (rng.flip(d.intensity)) active[day] = 1;
    }
  }

  const double pos_share = rng.uniform(0.3, 0.9);
  const double credit_share =
      0.2 + 0.1 * (d.profile.cc_months[0] + d.profile.cc_months[1] + d.profile.cc_months[2] +
                   d.profile.cc_months[3] + d.profile.cc_months[4] + d.profile.cc_months[5]);
  const int pref_slot = static_cast<int>(rng.uniform_int(0, 5));
  int mc_code = static_cast<int>(rng.uniform_int(1, 10));

  for (int day = 1; day <= cfg.n_days; ++day) {
    if (!active[day]) continue;
    const int n_ev = 1 + rng.poisson(0.35);
    for (int e = 0; e < n_ev; ++e) {
      ActivityEvent ev;
      ev.user_id = uid;
      ev.day_index = day;
      const int slot = rng.flip(0.45) ? pref_slot : static_cast<int>(rng.uniform_int(0, 5));
      ev.time_slot = std::string(1, static_cast<char>('a' + slot));
      ev.channel = rng.flip(pos_share) ? "pos" : "web";
      ev.card = rng.flip(credit_share) ? "credit" : "debit";
      const double r_amt = rng.uniform();
      const double p_a = 0.6 - 0.3 * affluence;
      const double p_b = 0.3;
      ev.amt_cat = r_amt < p_a ? "a" : (r_amt < p_a + p_b ? "b" : "c");
      // ordinal random walk gives each user distinctive mc trends
      const double r_mc = rng.uniform();
      if (r_mc < 0.30)
        mc_code = std::max(1, mc_code - 1);
      else if (r_mc > 0.70)
        mc_code = std::min(10, mc_code + 1);
      ev.mc_cat = std::string(1, ordinal_token(mc_code));
      ev.loc_cat = rng.flip(0.7) ? d.profile.loc_cat
                                 : loc_token(static_cast<int>(
                                       rng.uniform_int(0, cfg.n_loc_tokens - 1)));
      ev.geo = {d.profile.geo.x + rng.normal() * cfg.activity_spread,
                d.profile.geo.y + rng.normal() * cfg.activity_spread};
      d.events.push_back(std::move(ev));
    }
  }

  // branch visits decay exponentially with distance and scale mildly with
  // the user's activity level
  const double act_factor = 0.5 + d.intensity / cfg.rate_hi;
  d.visits.resize(branches.size());
  d.visit_rates.resize(branches.size());
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const double dist = euclidean(d.profile.geo, branches[b].geo);
    const double rate = cfg.visit_base * std::exp(-dist / cfg.visit_decay) * act_factor;
    d.visit_rates[b] = rate;
    d.visits[b] = rng.poisson(rate);
  }
  return d;
}

std::string maybe_missing(Rng& rng, double rate, std::string value) {
  return rng.uniform() < rate ? std::string("-") : std::move(value);
}

}  // namespace

PlantedTruth generate(const GenConfig& cfg, const std::filesystem::path& out_dir,
                      int workers) {
  if (cfg.n_users < 1 || cfg.n_branches < 1 || cfg.k_true < 1)
    throw std::invalid_argument("generate: counts must be positive");
  if (cfg.n_days != kHorizonDays)
    throw std::invalid_argument("generate: n_days is fixed at 181 by the schema");
  if (cfg.missing_rate < 0.0 || cfg.missing_rate >= 1.0)
    throw std::invalid_argument("generate: missing_rate must be in [0, 1)");
  std::filesystem::create_directories(out_dir);

  Rng global(derive_seed(cfg.seed, 0));
  std::vector<GeoPoint> centers(cfg.k_true);
  const double margin = cfg.world_size * 0.1;
  for (auto& c : centers)
    c = {global.uniform(margin, cfg.world_size - margin),
         global.uniform(margin, cfg.world_size - margin)};
  std::vector<BranchInfo> branches(cfg.n_branches);
  for (int b = 0; b < cfg.n_branches; ++b)
    branches[b] = {b, {global.uniform(0.0, cfg.world_size),
                       global.uniform(0.0, cfg.world_size)}};

  // pass 1: per-user draws, parallel with per-user seeds
  std::vector<UserDraw> draws(cfg.n_users);
  parallel_for(cfg.n_users, workers, [&](std::size_t u) {
    draws[u] = draw_user(cfg, static_cast<std::int64_t>(u), centers, branches,
                         Rng(derive_seed(cfg.seed, kUserStream + u)));
  });

  // pass 2: standardize the label signals over the population
  const std::size_t n = draws.size();
  double mu[3] = {0, 0, 0}, sd[3] = {0, 0, 0};
  auto signals = [](const UserDraw& d) {
    double s0 = static_cast<double>(d.events.size());
    double s1 = 0, s2 = 0;
    for (int m = 0; m < 6; ++m) {
      s1 += d.profile.wealth_months[m];
      s2 += d.profile.cc_months[m];
    }
    return std::array<double, 3>{s0, s1, s2};
  };
  for (const auto& d : draws) {
    const auto s = signals(d);
    for (int i = 0; i < 3; ++i) mu[i] += s[i];
  }
  for (int i = 0; i < 3; ++i) mu[i] /= static_cast<double>(n);
  for (const auto& d : draws) {
    const auto s = signals(d);
    for (int i = 0; i < 3; ++i) sd[i] += (s[i] - mu[i]) * (s[i] - mu[i]);
  }
  for (int i = 0; i < 3; ++i) sd[i] = std::max(std::sqrt(sd[i] / n), 1e-12);

  PlantedTruth truth;
  truth.users.resize(n);
  truth.visit_rates.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    const auto s = signals(draws[u]);
    const double z = cfg.label_bias + cfg.beta_activity * (s[0] - mu[0]) / sd[0] +
                     cfg.beta_wealth * (s[1] - mu[1]) / sd[1] +
                     cfg.beta_credit * (s[2] - mu[2]) / sd[2];
    const double p = 1.0 / (1.0 + std::exp(-z));
    Rng label_rng(derive_seed(cfg.seed, kLabelStream + u));
    draws[u].profile.task2_label = label_rng.flip(p) ? 1 : 0;
    truth.users[u] = {draws[u].profile.user_id, draws[u].cluster, draws[u].intensity, p};
    truth.visit_rates[u] = draws[u].visit_rates;
  }

  // pass 3: serialize (sequential, user_id order), injecting "-" into
  // categorical fields at the configured rate
  std::vector<std::vector<std::string>> user_rows, activity_rows, visit_rows, branch_rows;
  user_rows.reserve(n);
  for (std::size_t u = 0; u < n; ++u) {
    Rng miss(derive_seed(cfg.seed, kMissingStream + u));
    const UserProfile& p = draws[u].profile;
    std::vector<std::string> r;
    r.push_back(std::to_string(p.user_id));
    r.push_back(maybe_missing(miss, cfg.missing_rate, p.age_cat));
    r.push_back(maybe_missing(miss, cfg.missing_rate, p.loc_cat));
    r.push_back(format_double(p.geo.x));
    r.push_back(format_double(p.geo.y));
    for (int f : p.cc_months) r.push_back(std::to_string(f));
    for (int f : p.wealth_months) r.push_back(std::to_string(f));
    r.push_back(std::to_string(*p.task2_label));
    user_rows.push_back(std::move(r));

    for (const auto& ev : draws[u].events) {
      std::vector<std::string> a;
      a.push_back(std::to_string(ev.user_id));
      a.push_back(date_from_day_index(ev.day_index));
      a.push_back(maybe_missing(miss, cfg.missing_rate, ev.time_slot));
      a.push_back(maybe_missing(miss, cfg.missing_rate, ev.channel));
      a.push_back(maybe_missing(miss, cfg.missing_rate, ev.card));
      a.push_back(maybe_missing(miss, cfg.missing_rate, ev.amt_cat));
      a.push_back(maybe_missing(miss, cfg.missing_rate, ev.loc_cat));
      a.push_back(maybe_missing(miss, cfg.missing_rate, ev.mc_cat));
      a.push_back(format_double(ev.geo.x));
      a.push_back(format_double(ev.geo.y));
      activity_rows.push_back(std::move(a));
    }
    for (std::size_t b = 0; b < branches.size(); ++b) {
      if (draws[u].visits[b] <= 0) continue;
      visit_rows.push_back({std::to_string(p.user_id), std::to_string(branches[b].branch_id),
                            std::to_string(draws[u].visits[b])});
    }
  }
  branch_rows.reserve(branches.size());
  for (const auto& b : branches)
    branch_rows.push_back(
        {std::to_string(b.branch_id), format_double(b.geo.x), format_double(b.geo.y)});

  write_csv(out_dir / "users.csv",
            {"user_id", "age_cat", "loc_cat", "geo_x", "geo_y", "c1", "c2", "c3", "c4",
             "c5", "c6", "w1", "w2", "w3", "w4", "w5", "w6", "target"},
            user_rows);
  write_csv(out_dir / "activities.csv",
            {"user_id", "date", "time_slot", "channel", "card", "amt_cat", "loc_cat",
             "mc_cat", "geo_x", "geo_y"},
            activity_rows);
  write_csv(out_dir / "branches.csv", {"branch_id", "geo_x", "geo_y"}, branch_rows);
  write_csv(out_dir / "visits.csv", {"user_id", "branch_id", "visits"}, visit_rows);

  truth.save(out_dir / "truth.json");
  std::ofstream cfg_out(out_dir / "genconfig.json");
  cfg_out << cfg.to_json_string() << '\n';
  return truth;
}

std::string GenConfig::to_json_string() const {
  json j;
  j["n_users"] = n_users;
  j["n_branches"] = n_branches;
  j["n_days"] = n_days;
  j["k_true"] = k_true;
  j["world_size"] = world_size;
  j["cluster_spread"] = cluster_spread;
  j["activity_spread"] = activity_spread;
  j["n_loc_tokens"] = n_loc_tokens;
  j["rate_lo"] = rate_lo;
  j["rate_hi"] = rate_hi;
  j["burst_prob"] = burst_prob;
  j["inactive_prob"] = inactive_prob;
  j["visit_base"] = visit_base;
  j["visit_decay"] = visit_decay;
  j["label_bias"] = label_bias;
  j["beta_activity"] = beta_activity;
  j["beta_wealth"] = beta_wealth;
  j["beta_credit"] = beta_credit;
  j["missing_rate"] = missing_rate;
  j["seed"] = seed;
  return j.dump(2);
}

GenConfig GenConfig::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  GenConfig c;
  auto get = [&j](const char* key, auto& into) {
    if (j.contains(key)) into = j.at(key).get<std::decay_t<decltype(into)>>();
  };
  get("n_users", c.n_users);
  get("n_branches", c.n_branches);
  get("n_days", c.n_days);
  get("k_true", c.k_true);
  get("world_size", c.world_size);
  get("cluster_spread", c.cluster_spread);
  get("activity_spread", c.activity_spread);
  get("n_loc_tokens", c.n_loc_tokens);
  get("rate_lo", c.rate_lo);
  get("rate_hi", c.rate_hi);
  get("burst_prob", c.burst_prob);
  get("inactive_prob", c.inactive_prob);
  get("visit_base", c.visit_base);
  get("visit_decay", c.visit_decay);
  get("label_bias", c.label_bias);
  get("beta_activity", c.beta_activity);
  get("beta_wealth", c.beta_wealth);
  get("beta_credit", c.beta_credit);
  get("missing_rate", c.missing_rate);
  get("seed", c.seed);
  return c;
}

void PlantedTruth::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  // streamed by hand: the rates table is large and dominates the file
  out << "{\n\"users\": [";
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (u) out << ',';
    out << "\n{\"user_id\":" << users[u].user_id << ",\"cluster\":" << users[u].cluster
        << ",\"intensity\":" << format_double(users[u].intensity)
        << ",\"bayes_p\":" << format_double(users[u].bayes_p) << "}";
  }
  out << "\n],\n\"visit_rates\": [";
  for (std::size_t u = 0; u < visit_rates.size(); ++u) {
    if (u) out << ',';
    out << "\n[";
    for (std::size_t b = 0; b < visit_rates[u].size(); ++b) {
      if (b) out << ',';
      out << format_double(visit_rates[u][b]);
    }
    out << "]";
  }
  out << "\n]\n}\n";
}

PlantedTruth PlantedTruth::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const json j = json::parse(in);
  PlantedTruth t;
  for (const auto& u : j.at("users"))
    t.users.push_back({u.at("user_id").get<std::int64_t>(), u.at("cluster").get<int>(),
                       u.at("intensity").get<double>(), u.at("bayes_p").get<double>()});
  for (const auto& r : j.at("visit_rates"))
    t.visit_rates.push_back(r.get<std::vector<double>>());
  return t;
}

}  // namespace tempofeat
