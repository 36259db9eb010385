#include "mmm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "mmm/error.hpp"

namespace mmm {

namespace {

int weekday(Date d) {  // Monday = 0
  return static_cast<int>(((d.days() + 3) % 7 + 7) % 7);
}

Date nth_weekday(int year, unsigned month, int wd, int n) {
  Date d = Date::from_ymd(year, month, 1);
  d = d + ((wd - weekday(d) + 7) % 7);
  return d + 7 * (n - 1);
}

Date last_weekday(int year, unsigned month, int wd) {
  Date d = month == 12 ? Date::from_ymd(year + 1, 1, 1) - 1 : Date::from_ymd(year, month + 1, 1) - 1;
  return d - ((weekday(d) - wd + 7) % 7);
}

double sd_of(const Series& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void check_truth(const ChannelTruth& c, AdstockFamily family) {
  auto fail = [&](const std::string& what) {
    throw InputError("simulator", "channel '" + c.name + "': " + what + " outside the search bounds");
  };
  switch (family) {
    case AdstockFamily::geometric:
      if (!(c.theta >= 0.0 && c.theta <= 0.8)) fail("theta");
      break;
    case AdstockFamily::weibull_cdf:
      if (!(c.shape > 0.0 && c.shape <= 2.0)) fail("shape");
      if (!(c.scale > 0.0 && c.scale <= 0.1)) fail("scale");
      break;
    case AdstockFamily::weibull_pdf:
      if (!(c.shape >= 0.0001 && c.shape <= 10.0)) fail("shape");
      if (!(c.scale > 0.0 && c.scale <= 0.1)) fail("scale");
      break;
  }
  if (!(c.alpha >= 0.5 && c.alpha <= 3.0)) fail("alpha");
  if (!(c.gamma >= 0.3 && c.gamma <= 1.0)) fail("gamma");
  if (!(c.roas > 0.0) || !(c.mean_spend > 0.0) || !(c.spend_log_sd >= 0.0)) {
    throw InputError("simulator", "channel '" + c.name + "' needs positive roas and spend");
  }
}

}  // namespace

void SimulationConfig::validate() const {
  const std::size_t minimum = frequency == Frequency::weekly ? 104 : 180;
  if (n_periods < minimum) {
    throw InputError("simulator", "n_periods must be at least " + std::to_string(minimum) + " for " +
                                      to_string(frequency) + " data");
  }
  const std::size_t count = truth ? truth->size() : channels;
  if (count < 1) throw InputError("simulator", "at least one channel is required");
  if (!(noise_fraction >= 0.0) || !std::isfinite(noise_fraction)) {
    throw InputError("simulator", "noise_fraction must be >= 0");
  }
  if (!country.empty() && country != "DE" && country != "US") {
    throw InputError("simulator", "holiday generator supports DE and US, not '" + country + "'");
  }
  if (truth) {
    for (const auto& c : *truth) check_truth(c, family);
  }
}

Date easter_sunday(int y) {
  const int a = y % 19;
  const int b = y / 100;
  const int c = y % 100;
  const int d = b / 4;
  const int e = b % 4;
  const int f = (b + 8) / 25;
  const int g = (b - f + 1) / 3;
  const int h = (19 * a + b - d - g + 15) % 30;
  const int i = c / 4;
  const int k = c % 4;
  const int l = (32 + 2 * e + 2 * i - h - k) % 7;
  const int m = (a + 11 * h + 22 * l) / 451;
  const int month = (h + l - 7 * m + 114) / 31;
  const int day = (h + l - 7 * m + 114) % 31 + 1;
  return Date::from_ymd(y, static_cast<unsigned>(month), static_cast<unsigned>(day));
}

HolidayTable generate_holidays(std::string_view country, int first_year, int last_year) {
  std::vector<Holiday> out;
  const std::string cc(country);
  for (int y = first_year; y <= last_year; ++y) {
    auto add = [&](Date d, const char* name) { out.push_back({d, name, cc}); };
    if (country == "DE") {
      const Date easter = easter_sunday(y);
      add(Date::from_ymd(y, 1, 1), "New Year's Day");
      add(easter - 2, "Good Friday");
      add(easter + 1, "Easter Monday");
      add(Date::from_ymd(y, 5, 1), "Labour Day");
      add(easter + 39, "Ascension Day");
      add(easter + 50, "Whit Monday");
      add(Date::from_ymd(y, 10, 3), "Day of German Unity");
      add(Date::from_ymd(y, 12, 25), "Christmas Day");
      add(Date::from_ymd(y, 12, 26), "Second Day of Christmas");
    } else if (country == "US") {
      add(Date::from_ymd(y, 1, 1), "New Year's Day");
      add(nth_weekday(y, 1, 0, 3), "Martin Luther King Jr. Day");
      add(nth_weekday(y, 2, 0, 3), "Washington's Birthday");
      add(last_weekday(y, 5, 0), "Memorial Day");
      add(Date::from_ymd(y, 7, 4), "Independence Day");
      add(nth_weekday(y, 9, 0, 1), "Labor Day");
      add(nth_weekday(y, 10, 0, 2), "Columbus Day");
      add(Date::from_ymd(y, 11, 11), "Veterans Day");
      add(nth_weekday(y, 11, 3, 4), "Thanksgiving");
      add(Date::from_ymd(y, 12, 25), "Christmas Day");
    } else {
      throw InputError("simulator", "holiday generator supports DE and US, not '" + cc + "'");
    }
  }
  return HolidayTable(std::move(out));
}

std::vector<std::string> default_channel_names(std::size_t count) {
  static const std::vector<std::string> base = {"tv_S", "ooh_S", "print_S", "facebook_S", "search_S"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i < base.size() ? base[i] : "channel" + std::to_string(i + 1) + "_S");
  }
  return out;
}

std::vector<ChannelTruth> default_channel_truth(std::size_t count, AdstockFamily family) {
  // Offline channels run in flights; digital channels spend every period.
  static const double theta[] = {0.5, 0.3, 0.15, 0.1, 0.05};
  static const double shape[] = {1.2, 0.8, 1.5, 1.0, 0.6};
  static const double scale[] = {0.06, 0.04, 0.03, 0.02, 0.01};
  static const double alpha[] = {2.0, 1.5, 1.2, 1.0, 2.5};
  static const double gamma[] = {0.5, 0.6, 0.4, 0.7, 0.5};
  static const double roas[] = {1.5, 2.5, 0.8, 2.0, 1.2};
  static const double spend[] = {40000.0, 30000.0, 20000.0, 25000.0, 35000.0};
  static const bool flight[] = {true, true, true, false, false};
  const auto names = default_channel_names(count);
  std::vector<ChannelTruth> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t k = i % 5;
    ChannelTruth c;
    c.name = names[i];
    c.theta = family == AdstockFamily::geometric ? theta[k] : 0.0;
    c.shape = family == AdstockFamily::weibull_pdf ? shape[k] + 1.0 : shape[k];
    c.scale = scale[k];
    c.alpha = alpha[k];
    c.gamma = gamma[k];
    c.roas = roas[k] * (1.0 + 0.1 * static_cast<double>(i / 5));
    c.mean_spend = spend[k];
    c.spend_log_sd = flight[k] ? 0.3 : 0.4;
    c.flighted = flight[k];
    out.push_back(std::move(c));
  }
  return out;
}

const LedgerTerm& Simulation::term(std::string_view name) const {
  for (const auto& t : ledger) {
    if (t.name == name) return t;
  }
  throw InputError("simulator", "no ledger term '" + std::string(name) + "'");
}

double Simulation::true_lift(const std::vector<std::string>& channels, Date start, Date end, LiftScope scope) const {
  double lift = 0.0;
  for (const auto& c : channels) {
    const auto& t = term(c);
    const auto& v = scope == LiftScope::total ? t.total : t.immediate;
    for (std::size_t i = 0; i < dates.size(); ++i) {
      if (dates[i] >= start && dates[i] <= end) lift += v[i];
    }
  }
  return lift;
}

std::vector<LiftStudy> Simulation::cut_lift_studies(std::size_t count, std::size_t length, std::uint64_t seed,
                                                    LiftScope scope) const {
  std::size_t first = 0;
  while (first < dates.size() && dates[first] < window.start) ++first;
  std::size_t last = first;
  while (last < dates.size() && dates[last] <= window.end) ++last;
  if (length == 0 || last - first < length) throw InputError("simulator", "lift study length exceeds the window");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pos(first, last - length);
  std::vector<LiftStudy> out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t c = k % truth.channels.size();
    LiftStudy s;
    s.channels = {truth.channels[c].name};
    std::size_t a = first;
    for (int attempt = 0; attempt < 100; ++attempt) {
      a = pos(rng);
      s.lift_start = dates[a];
      s.lift_end = dates[a + length - 1];
      s.lift_abs = true_lift(s.channels, s.lift_start, s.lift_end, scope);
      if (s.lift_abs > 0.0) break;
    }
    if (!(s.lift_abs > 0.0)) {
      throw InputError("simulator", "no window with positive lift for '" + truth.channels[c].name + "'");
    }
    s.spend = std::accumulate(spends[c].begin() + static_cast<std::ptrdiff_t>(a),
                              spends[c].begin() + static_cast<std::ptrdiff_t>(a + length), 0.0);
    s.confidence = 0.9;
    s.metric = roles.dep_var;
    s.scope = scope;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

struct MediaTerm {
  Series total;
  Series immediate;
  double inflection = 0.0;
};

MediaTerm media_term(const Series& x, const ChannelTruth& c, AdstockFamily family, std::size_t window,
                     std::size_t max_lag) {
  AdstockParams ap;
  ap.family = family;
  ap.theta = c.theta;
  ap.shape = c.shape;
  ap.scale = c.scale;
  ap.max_lag = max_lag;
  const Series ad = adstock(x, ap);
  const auto [lo, hi] = std::minmax_element(ad.begin(), ad.begin() + static_cast<std::ptrdiff_t>(window));
  MediaTerm t;
  t.inflection = *lo + c.gamma * (*hi - *lo);
  const double w0 = lag_weights(ap, 1).front();
  for (std::size_t i = 0; i < x.size(); ++i) {
    t.total.push_back(hill(ad[i], c.alpha, t.inflection));
    t.immediate.push_back(hill(w0 * x[i], c.alpha, t.inflection));
  }
  return t;
}

Series spend_series(std::mt19937_64& rng, const ChannelTruth& c, const std::vector<Date>& dates, double phase,
                    int step) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int scale = step == 1 ? 7 : 1;
  std::uniform_int_distribution<int> on_len(3 * scale, 8 * scale);
  std::uniform_int_distribution<int> off_len(1 * scale, 4 * scale);
  Series out;
  bool on = true;
  int left = on_len(rng);
  for (const auto& d : dates) {
    const double season = 1.0 + 0.15 * std::sin(2.0 * std::numbers::pi * d.days() / 365.25 + phase);
    double v = c.mean_spend * std::exp(c.spend_log_sd * z(rng) - 0.5 * c.spend_log_sd * c.spend_log_sd) * season;
    if (u(rng) < 0.05) v *= 1.5 + 1.5 * u(rng);
    if (c.flighted && !on) v = 0.0;
    out.push_back(std::round(v * 100.0) / 100.0);
    if (c.flighted && --left <= 0) {
      on = !on;
      left = on ? on_len(rng) : off_len(rng);
    }
  }
  return out;
}

}  // namespace

Simulation simulate(const SimulationConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  Simulation sim;
  sim.frequency = cfg.frequency;
  const int step = period_days(cfg.frequency);
  const std::size_t n = cfg.n_periods;
  const std::size_t rows = n + cfg.extra_periods;
  for (std::size_t i = 0; i < rows; ++i) sim.dates.push_back(cfg.start + static_cast<int>(i) * step);
  sim.window = {sim.dates.front(), sim.dates[n - 1]};
  const std::size_t max_lag = cfg.frequency == Frequency::weekly ? n : std::size_t{60};

  SimulationTruth& truth = sim.truth;
  truth.family = cfg.family;
  truth.seed = cfg.seed;
  truth.channels = cfg.truth ? *cfg.truth : default_channel_truth(cfg.channels, cfg.family);
  for (const auto& c : truth.channels) check_truth(c, cfg.family);

  auto window_sum = [&](const Series& v) {
    return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  };
  const std::size_t count = truth.channels.size();
  double media_level = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    auto& ch = truth.channels[c];
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(count) + 1.0;
    sim.spends.push_back(spend_series(rng, ch, sim.dates, phase, step));
    const Series& x = sim.spends.back();
    if (!(window_sum(x) > 0.0)) throw InputError("simulator", "channel '" + ch.name + "' has no spend in the window");
    MediaTerm t = media_term(x, ch, cfg.family, n, max_lag);
    ch.inflection = t.inflection;
    ch.coefficient = ch.roas * window_sum(x) / window_sum(t.total);
    LedgerTerm term{ch.name, {}, {}};
    for (std::size_t i = 0; i < rows; ++i) {
      term.total.push_back(ch.coefficient * t.total[i]);
      term.immediate.push_back(ch.coefficient * t.immediate[i]);
    }
    ch.true_roas = window_sum(term.total) / window_sum(x);
    media_level += window_sum(term.total) / static_cast<double>(n);
    sim.ledger.push_back(std::move(term));
  }

  Series newsletter;
  if (cfg.organic) {
    ChannelTruth o;
    o.name = "newsletter";
    o.theta = cfg.family == AdstockFamily::geometric ? 0.2 : 0.0;
    o.shape = 1.0;
    o.scale = 0.03;
    o.alpha = 1.2;
    o.gamma = 0.5;
    o.roas = 0.5;
    o.mean_spend = 20000.0;
    o.spend_log_sd = 0.35;
    o.flighted = false;
    newsletter = spend_series(rng, o, sim.dates, 0.5, step);
    MediaTerm t = media_term(newsletter, o, cfg.family, n, max_lag);
    o.inflection = t.inflection;
    o.coefficient = o.roas * window_sum(newsletter) / window_sum(t.total);
    LedgerTerm term{o.name, {}, {}};
    for (std::size_t i = 0; i < rows; ++i) {
      term.total.push_back(o.coefficient * t.total[i]);
      term.immediate.push_back(o.coefficient * t.immediate[i]);
    }
    o.true_roas = window_sum(term.total) / window_sum(newsletter);
    truth.organic = o;
    sim.ledger.push_back(std::move(term));
  }

  truth.intercept = std::max(1.0, 2.5 * media_level);
  truth.trend_amplitude = 0.15 * truth.intercept;
  truth.season_amplitude = 0.1 * truth.intercept;
  truth.weekday_amplitude = cfg.frequency == Frequency::daily ? 0.05 * truth.intercept : 0.0;
  auto add_term = [&](std::string name, Series v) { sim.ledger.push_back({std::move(name), v, v}); };
  add_term("intercept", Series(rows, truth.intercept));
  Series trend(rows), season(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    trend[i] = truth.trend_amplitude * static_cast<double>(i) / static_cast<double>(n - 1);
    season[i] = truth.season_amplitude * std::sin(2.0 * std::numbers::pi * sim.dates[i].days() / 365.25 + 0.3);
  }
  add_term("trend", trend);
  add_term("season", season);
  if (cfg.frequency == Frequency::daily) {
    Series wd(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      wd[i] = truth.weekday_amplitude * std::sin(2.0 * std::numbers::pi * weekday(sim.dates[i]) / 7.0);
    }
    add_term("weekday", wd);
  }
  if (!cfg.country.empty()) {
    sim.holidays = generate_holidays(cfg.country, sim.dates.front().year() - 1, sim.dates.back().year() + 1);
    std::map<std::string, double> effect;
    for (const auto& h : sim.holidays.entries()) {
      if (!effect.count(h.holiday)) {
        const bool xmas = h.holiday.find("Christmas") != std::string::npos;
        effect[h.holiday] = truth.intercept * (xmas ? 0.08 : 0.02 * (1.0 + u(rng)));
      }
    }
    Series hol(rows, 0.0);
    for (const auto& h : sim.holidays.entries()) {
      for (std::size_t i = 0; i < rows; ++i) {
        if (h.ds >= sim.dates[i] && h.ds < sim.dates[i] + step) hol[i] += effect[h.holiday];
      }
    }
    add_term("holiday", hol);
  }

  Series competitor;
  if (cfg.context) {
    truth.context_coefficient = 0.3;
    double level = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      level = 0.7 * level + 0.1 * z(rng);
      competitor.push_back(std::round(0.5 * truth.intercept * std::exp(level) * 100.0) / 100.0);
    }
    Series term(rows);
    for (std::size_t i = 0; i < rows; ++i) term[i] = truth.context_coefficient * competitor[i];
    add_term("competitor_sales_B", term);
  }
  std::vector<std::string> events;
  if (cfg.events) {
    Series term(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      const double r = u(rng);
      events.push_back(r < 0.04 ? "event1" : r < 0.07 ? "event2" : "na");
      if (events.back() == "event1") term[i] = 0.05 * truth.intercept;
      if (events.back() == "event2") term[i] = -0.03 * truth.intercept;
    }
    // Both levels must show up in the window for the indicators to be estimable.
    events[n / 3] = "event1";
    term[n / 3] = 0.05 * truth.intercept;
    events[n / 5] = "event2";
    term[n / 5] = -0.03 * truth.intercept;
    add_term("events", term);
  }

  Series clean(rows, 0.0);
  for (const auto& t : sim.ledger) {
    for (std::size_t i = 0; i < rows; ++i) clean[i] += t.total[i];
  }
  truth.noise_sd = cfg.noise_fraction * sd_of(Series(clean.begin(), clean.begin() + static_cast<std::ptrdiff_t>(n)));
  Series noise(rows);
  for (auto& e : noise) e = truth.noise_sd * z(rng);
  add_term("noise", noise);
  sim.response.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) sim.response[i] = clean[i] + noise[i];

  auto& roles = sim.roles;
  roles.date_var = "DATE";
  roles.dep_var = "revenue";
  roles.dep_var_type = DepVarType::revenue;
  for (const auto& c : truth.channels) {
    roles.paid_media_spends.push_back(c.name);
    roles.paid_media_vars.push_back(cfg.exposure && c.name == "facebook_S" ? "facebook_I" : c.name);
  }
  if (cfg.organic) roles.organic_vars = {"newsletter"};
  if (cfg.context) roles.context_vars.push_back("competitor_sales_B");
  if (cfg.events) {
    roles.context_vars.push_back("events");
    roles.factor_vars = {"events"};
  }
  roles.prophet_vars = {ProphetComponent::trend, ProphetComponent::season};
  if (cfg.frequency == Frequency::daily) roles.prophet_vars.push_back(ProphetComponent::weekday);
  if (!cfg.country.empty()) {
    roles.prophet_vars.push_back(ProphetComponent::holiday);
    roles.prophet_country = cfg.country;
  }

  auto& table = sim.table;
  table.header = {"DATE", "revenue"};
  for (const auto& c : truth.channels) table.header.push_back(c.name);
  const bool impressions = std::find(roles.paid_media_vars.begin(), roles.paid_media_vars.end(), "facebook_I") !=
                           roles.paid_media_vars.end();
  if (impressions) table.header.emplace_back("facebook_I");
  if (cfg.organic) table.header.emplace_back("newsletter");
  if (cfg.context) table.header.emplace_back("competitor_sales_B");
  if (cfg.events) table.header.emplace_back("events");
  std::size_t fb = 0;
  for (std::size_t c = 0; c < count; ++c) {
    if (truth.channels[c].name == "facebook_S") fb = c;
  }
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<std::string> row = {sim.dates[i].iso(), format_number(sim.response[i])};
    for (std::size_t c = 0; c < count; ++c) row.push_back(format_number(sim.spends[c][i]));
    if (impressions) {
      const double cpm = 5.0 * std::exp(0.1 * z(rng));
      row.push_back(format_number(std::round(sim.spends[fb][i] / cpm * 1000.0)));
    }
    if (cfg.organic) row.push_back(format_number(newsletter[i]));
    if (cfg.context) row.push_back(format_number(competitor[i]));
    if (cfg.events) row.push_back(events[i]);
    table.rows.push_back(std::move(row));
  }
  return sim;
}

std::string Simulation::truth_json() const {
  using nlohmann::json;
  auto channel = [&](const ChannelTruth& c, const Series& spend) {
    const std::size_t n = static_cast<std::size_t>(window.end - window.start) / static_cast<std::size_t>(period_days(frequency)) + 1;
    const auto& t = term(c.name);
    return json{{"name", c.name},
                {"theta", c.theta},
                {"shape", c.shape},
                {"scale", c.scale},
                {"alpha", c.alpha},
                {"gamma", c.gamma},
                {"coefficient", c.coefficient},
                {"inflection", c.inflection},
                {"target_roas", c.roas},
                {"true_roas", c.true_roas},
                {"window_spend", std::accumulate(spend.begin(), spend.begin() + static_cast<std::ptrdiff_t>(n), 0.0)},
                {"window_contribution",
                 std::accumulate(t.total.begin(), t.total.begin() + static_cast<std::ptrdiff_t>(n), 0.0)}};
  };
  json j;
  j["seed"] = truth.seed;
  j["frequency"] = to_string(frequency);
  j["adstock"] = to_string(truth.family);
  j["window"] = {{"start", window.start.iso()}, {"end", window.end.iso()}};
  j["channels"] = json::array();
  for (std::size_t c = 0; c < truth.channels.size(); ++c) j["channels"].push_back(channel(truth.channels[c], spends[c]));
  if (truth.organic) {
    const std::size_t col = table.column_index("newsletter").value();
    Series sends;
    for (const auto& r : table.rows) sends.push_back(parse_number(r[col]).value());
    j["organic"] = channel(*truth.organic, sends);
  } else {
    j["organic"] = nullptr;
  }
  j["intercept"] = truth.intercept;
  j["trend_amplitude"] = truth.trend_amplitude;
  j["season_amplitude"] = truth.season_amplitude;
  j["weekday_amplitude"] = truth.weekday_amplitude;
  j["context_coefficient"] = truth.context_coefficient;
  j["noise_sd"] = truth.noise_sd;
  json dates_json = json::array();
  for (const auto& d : dates) dates_json.push_back(d.iso());
  j["ledger"]["dates"] = dates_json;
  for (const auto& t : ledger) j["ledger"]["terms"][t.name] = {{"total", t.total}, {"immediate", t.immediate}};
  return j.dump(2) + "\n";
}

}  // namespace mmm
