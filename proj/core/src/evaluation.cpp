#include "mmm/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "mmm/error.hpp"

namespace mmm {

std::string to_string(LiftScope s) { return s == LiftScope::immediate ? "immediate" : "total"; }

std::string LiftStudy::channel_label() const {
  std::string out;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (i) out += "+";
    out += channels[i];
  }
  return out;
}

void LiftStudy::validate() const {
  auto fail = [&](const std::string& m) {
    throw InputError("evaluation", "lift study '" + channel_label() + "': " + m);
  };
  if (channels.empty()) fail("no channel");
  if (lift_end < lift_start) fail("liftEndDate precedes liftStartDate");
  if (!(lift_abs != 0.0) || !std::isfinite(lift_abs)) fail("liftAbs must be nonzero and finite");
  if (!(spend >= 0.0)) fail("spend must be >= 0");
  if (!(confidence > 0.0 && confidence <= 1.0)) fail("confidence must be in (0, 1]");
}

std::vector<LiftStudy> parse_lift_studies(const CsvTable& table) {
  const char* required[] = {"channel", "liftStartDate", "liftEndDate", "liftAbs",
                            "spend",   "confidence",    "metric",      "calibration_scope"};
  std::size_t idx[8];
  for (int i = 0; i < 8; ++i) {
    auto c = table.column_index(required[i]);
    if (!c) throw InputError("evaluation", std::string("calibration input lacks column '") + required[i] + "'");
    idx[i] = *c;
  }
  auto num = [](const std::string& cell, const char* field) {
    auto v = parse_number(cell);
    if (!v) throw InputError("evaluation", std::string("bad ") + field + " value '" + cell + "'");
    return *v;
  };
  std::vector<LiftStudy> out;
  for (const auto& row : table.rows) {
    LiftStudy s;
    std::string_view ch = row[idx[0]];
    while (true) {
      const auto plus = ch.find('+');
      s.channels.emplace_back(ch.substr(0, plus));
      if (plus == std::string_view::npos) break;
      ch.remove_prefix(plus + 1);
    }
    s.lift_start = Date::parse(row[idx[1]]);
    s.lift_end = Date::parse(row[idx[2]]);
    s.lift_abs = num(row[idx[3]], "liftAbs");
    s.spend = num(row[idx[4]], "spend");
    s.confidence = num(row[idx[5]], "confidence");
    s.metric = row[idx[6]];
    const auto& scope = row[idx[7]];
    if (scope == "immediate") {
      s.scope = LiftScope::immediate;
    } else if (scope == "total") {
      s.scope = LiftScope::total;
    } else {
      throw InputError("evaluation", "calibration_scope must be immediate or total, got '" + scope + "'");
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LiftStudy> load_lift_studies(const std::filesystem::path& path) {
  return parse_lift_studies(read_csv(path));
}

CsvTable lift_studies_to_table(std::span<const LiftStudy> studies) {
  CsvTable t;
  t.header = {"channel", "liftStartDate", "liftEndDate", "liftAbs",
              "spend",   "confidence",    "metric",      "calibration_scope"};
  for (const auto& s : studies) {
    t.rows.push_back({s.channel_label(), s.lift_start.iso(), s.lift_end.iso(),
                      format_number(s.lift_abs), format_number(s.spend),
                      format_number(s.confidence), s.metric, to_string(s.scope)});
  }
  return t;
}

const ChannelContribution& ContributionTable::find(std::string_view channel) const {
  for (const auto& c : channels) {
    if (c.channel == channel) return c;
  }
  throw InputError("evaluation", "unknown channel '" + std::string(channel) + "'");
}

double decomp_rssd(std::span<const double> effect, std::span<const double> spend) {
  if (effect.size() != spend.size()) {
    throw InputError("evaluation", "effect and spend shares cover different channels");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < effect.size(); ++i) {
    const double d = effect[i] - spend[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double lift_prediction(const ContributionTable& table, const LiftStudy& study) {
  const auto first = std::lower_bound(table.dates.begin(), table.dates.end(), study.lift_start);
  const auto last = std::upper_bound(table.dates.begin(), table.dates.end(), study.lift_end);
  if (first >= last) {
    throw InputError("evaluation", "lift study '" + study.channel_label() + "' (" +
                                       study.lift_start.iso() + ".." + study.lift_end.iso() +
                                       ") lies outside the modeling window");
  }
  const auto a = static_cast<std::size_t>(first - table.dates.begin());
  const auto b = static_cast<std::size_t>(last - table.dates.begin());
  double pred = 0.0;
  for (const auto& name : study.channels) {
    const auto& c = table.find(name);
    const auto& series = study.scope == LiftScope::immediate ? c.immediate : c.total;
    for (std::size_t t = a; t < b; ++t) pred += series[t];
  }
  return pred;
}

double mape_lift(const ContributionTable& table, std::span<const LiftStudy> studies) {
  if (studies.empty()) throw InputError("evaluation", "mape_lift needs at least one study");
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : studies) {
    const double pred = lift_prediction(table, s);
    num += s.confidence * std::abs(pred - s.lift_abs) / std::abs(s.lift_abs);
    den += s.confidence;
  }
  return num / den;
}

void ObjectiveWeights::validate() const {
  for (double w : as_array()) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("evaluation", "objective weights must be >= 0");
  }
  if (!(nrmse + decomp_rssd + mape_lift > 0.0)) {
    throw InputError("evaluation", "at least one objective weight must be positive");
  }
}

namespace {

std::array<std::optional<double>, 3> values(const ObjectiveScores& s) {
  return {s.nrmse, s.decomp_rssd, s.mape_lift};
}

}  // namespace

void ObjectiveRanges::include(const ObjectiveScores& s) {
  const auto v = values(s);
  for (std::size_t k = 0; k < 3; ++k) {
    if (!v[k] || !std::isfinite(*v[k])) continue;
    if (!seen[k]) {
      lo[k] = hi[k] = *v[k];
      seen[k] = true;
    } else {
      lo[k] = std::min(lo[k], *v[k]);
      hi[k] = std::max(hi[k], *v[k]);
    }
  }
}

double ObjectiveRanges::normalize(std::size_t k, double value) const {
  if (!seen[k] || !(hi[k] > lo[k])) return 0.0;
  return (value - lo[k]) / (hi[k] - lo[k]);
}

double scalarize(const ObjectiveScores& scores, const ObjectiveWeights& weights,
                 const ObjectiveRanges& ranges) {
  weights.validate();
  if (weights.mape_lift > 0.0 && !scores.mape_lift) {
    throw InputError("evaluation", "MAPE.LIFT weight is positive but no calibration input exists");
  }
  const auto w = weights.as_array();
  const auto v = values(scores);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    if (w[k] == 0.0) continue;
    num += w[k] * ranges.normalize(k, *v[k]);
    den += w[k];
  }
  return num / den;
}

}  // namespace mmm
