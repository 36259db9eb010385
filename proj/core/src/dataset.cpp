#include "mmm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "mmm/error.hpp"

namespace mmm {

int period_days(Frequency f) { return f == Frequency::daily ? 1 : 7; }

std::string to_string(Frequency f) { return f == Frequency::daily ? "daily" : "weekly"; }

std::string to_string(DepVarType t) {
  return t == DepVarType::revenue ? "revenue" : "conversion";
}

std::string to_string(ProphetComponent c) {
  switch (c) {
    case ProphetComponent::trend:
      return "trend";
    case ProphetComponent::season:
      return "season";
    case ProphetComponent::weekday:
      return "weekday";
    case ProphetComponent::holiday:
      return "holiday";
  }
  return "?";
}

Frequency parse_frequency(std::string_view text) {
  if (text == "daily") return Frequency::daily;
  if (text == "weekly") return Frequency::weekly;
  throw InputError("dataset", "unknown frequency '" + std::string(text) + "'");
}

DepVarType parse_dep_var_type(std::string_view text) {
  if (text == "revenue") return DepVarType::revenue;
  if (text == "conversion") return DepVarType::conversion;
  throw InputError("dataset", "dep_var_type must be \"revenue\" or \"conversion\", got '" +
                                  std::string(text) + "'");
}

ProphetComponent parse_prophet_component(std::string_view text) {
  if (text == "trend") return ProphetComponent::trend;
  if (text == "season") return ProphetComponent::season;
  if (text == "weekday") return ProphetComponent::weekday;
  if (text == "holiday") return ProphetComponent::holiday;
  throw InputError("dataset", "unknown prophet_vars entry '" + std::string(text) + "'");
}

namespace {

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

bool is_missing(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" || cell == "nan" ||
         cell == "null";
}

}  // namespace

bool VariableRoles::is_factor(std::string_view column) const {
  return contains(factor_vars, column);
}

void VariableRoles::validate() const {
  auto fail = [](const std::string& msg) { throw InputError("dataset", msg); };
  if (date_var.empty()) fail("date_var is empty");
  if (dep_var.empty()) fail("dep_var is empty");
  if (paid_media_spends.empty()) fail("paid_media_spends must be nonempty");
  if (paid_media_vars.size() != paid_media_spends.size()) {
    fail("paid_media_vars must have the same length and order as paid_media_spends");
  }
  for (const auto& f : factor_vars) {
    if (!contains(context_vars, f) && !contains(organic_vars, f)) {
      fail("factor variable '" + f + "' is neither a context nor an organic variable");
    }
  }

  // A column may appear in both paid_media_spends and paid_media_vars at the
  // same position (spend used as its own exposure metric); any other reuse is
  // a double assignment.
  std::set<std::string> seen{date_var};
  auto claim = [&](const std::string& col) {
    if (!seen.insert(col).second) fail("column '" + col + "' is assigned two roles");
  };
  claim(dep_var);
  for (const auto& c : paid_media_spends) claim(c);
  for (std::size_t i = 0; i < paid_media_vars.size(); ++i) {
    if (paid_media_vars[i] != paid_media_spends[i]) claim(paid_media_vars[i]);
  }
  for (const auto& c : organic_vars) claim(c);
  for (const auto& c : context_vars) claim(c);

  std::set<ProphetComponent> comps;
  for (auto c : prophet_vars) {
    if (!comps.insert(c).second) fail("prophet_vars entry '" + to_string(c) + "' repeated");
  }
  if (comps.count(ProphetComponent::holiday) && prophet_country.empty()) {
    fail("prophet_country is required when prophet_vars contains \"holiday\"");
  }
}

std::span<const Date> MmmDataset::window_dates() const {
  return std::span<const Date>(dates_).subspan(window_begin_, window_size());
}

bool MmmDataset::has_column(std::string_view name) const {
  return std::any_of(numeric_.begin(), numeric_.end(),
                     [&](const NumericColumn& c) { return c.name == name; });
}

const Series& MmmDataset::column(std::string_view name) const {
  for (const auto& c : numeric_) {
    if (c.name == name) return c.values;
  }
  throw InputError("dataset", "unknown column '" + std::string(name) + "'");
}

std::span<const double> MmmDataset::window_column(std::string_view name) const {
  return std::span<const double>(column(name)).subspan(window_begin_, window_size());
}

std::vector<std::string> MmmDataset::organic_columns() const {
  std::vector<std::string> out;
  for (const auto& c : roles_.organic_vars) {
    if (!roles_.is_factor(c)) out.push_back(c);
  }
  return out;
}

std::vector<std::string> MmmDataset::context_columns() const {
  std::vector<std::string> out;
  for (const auto& c : roles_.context_vars) {
    if (!roles_.is_factor(c)) out.push_back(c);
  }
  for (const auto& f : factors_) {
    out.insert(out.end(), f.indicator_names.begin(), f.indicator_names.end());
  }
  return out;
}

std::vector<std::string> MmmDataset::media_channels() const {
  std::vector<std::string> out = roles_.paid_media_spends;
  auto organic = organic_columns();
  out.insert(out.end(), organic.begin(), organic.end());
  return out;
}

struct DatasetBuilder {
  static MmmDataset build(const CsvTable& table, const VariableRoles& roles,
                          const std::optional<DateWindow>& window, const LoadOptions& options) {
    roles.validate();
    auto fail = [](const std::string& msg) -> void { throw InputError("dataset", msg); };

    const auto date_idx = table.column_index(roles.date_var);
    if (!date_idx) fail("unknown role column '" + roles.date_var + "' (date_var)");
    if (table.rows.size() < 2) fail("need at least two rows");

    std::vector<Date> dates;
    dates.reserve(table.rows.size());
    for (const auto& row : table.rows) dates.push_back(Date::parse(row[*date_idx]));

    std::vector<std::int32_t> gaps;
    for (std::size_t i = 1; i < dates.size(); ++i) {
      const auto g = dates[i] - dates[i - 1];
      if (g <= 0) {
        fail("dates must be strictly increasing (" + dates[i - 1].iso() + " then " +
             dates[i].iso() + ")");
      }
      gaps.push_back(g);
    }
    auto sorted = gaps;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const auto median_gap = sorted[sorted.size() / 2];
    Frequency freq;
    if (median_gap == 1) {
      freq = Frequency::daily;
    } else if (median_gap == 7) {
      freq = Frequency::weekly;
    } else {
      throw InputError("dataset", "cannot infer frequency: median date spacing is " +
                                      std::to_string(median_gap) + " days");
    }
    if (options.frequency && *options.frequency != freq) {
      fail("frequency hint '" + to_string(*options.frequency) + "' contradicts data spacing ('" +
           to_string(freq) + "')");
    }
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      if (gaps[i] != period_days(freq)) {
        fail("non-uniform date spacing between " + dates[i].iso() + " and " +
             dates[i + 1].iso());
      }
    }

    DateWindow win = window.value_or(DateWindow{dates.front(), dates.back()});
    if (win.end < win.start) fail("window_end precedes window_start");
    if (win.start < dates.front()) {
      fail("window_start " + win.start.iso() + " precedes the first date " + dates.front().iso());
    }
    if (win.end > dates.back()) {
      fail("window_end " + win.end.iso() + " is after the last date " + dates.back().iso());
    }
    const auto begin = static_cast<std::size_t>(
        std::lower_bound(dates.begin(), dates.end(), win.start) - dates.begin());
    const auto end = static_cast<std::size_t>(
        std::upper_bound(dates.begin(), dates.end(), win.end) - dates.begin());
    if (begin >= end) fail("window contains no observations");
    if (begin < options.min_history_periods) {
      fail("window_start leaves " + std::to_string(begin) + " periods of history, need " +
           std::to_string(options.min_history_periods));
    }

    MmmDataset ds;
    ds.roles_ = roles;
    ds.frequency_ = freq;
    ds.window_ = win;
    ds.window_begin_ = begin;
    ds.window_end_ = end;
    ds.dates_.assign(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(end));

    auto index_of = [&](const std::string& name, const char* role) {
      auto idx = table.column_index(name);
      if (!idx) throw InputError("dataset", "unknown role column '" + name + "' (" + role + ")");
      return *idx;
    };

    auto add_numeric = [&](const std::string& name, const char* role, bool nonnegative) {
      if (ds.has_column(name)) return;
      const auto idx = index_of(name, role);
      NumericColumn col{name, Series(end)};
      for (std::size_t r = 0; r < end; ++r) {
        const auto& cell = table.rows[r][idx];
        if (is_missing(cell)) {
          fail("missing value in column '" + name + "' at " + dates[r].iso());
        }
        auto v = parse_number(cell);
        if (!v) fail("non-numeric value '" + cell + "' in column '" + name + "' at " + dates[r].iso());
        if (!std::isfinite(*v)) fail("non-finite value in column '" + name + "' at " + dates[r].iso());
        if (nonnegative && *v < 0) {
          fail("negative spend/exposure value in column '" + name + "' at " + dates[r].iso());
        }
        col.values[r] = *v;
      }
      ds.numeric_.push_back(std::move(col));
    };

    add_numeric(roles.dep_var, "dep_var", false);
    for (const auto& c : roles.paid_media_spends) add_numeric(c, "paid_media_spends", true);
    for (const auto& c : roles.paid_media_vars) add_numeric(c, "paid_media_vars", true);
    for (const auto& c : roles.organic_vars) {
      if (!roles.is_factor(c)) add_numeric(c, "organic_vars", true);
    }
    for (const auto& c : roles.context_vars) {
      if (!roles.is_factor(c)) add_numeric(c, "context_vars", false);
    }

    for (const auto& f : roles.factor_vars) {
      const auto idx = index_of(f, "factor_vars");
      FactorColumn fc;
      fc.name = f;
      fc.values.reserve(end);
      std::set<std::string> levels;
      bool has_na = false;
      for (std::size_t r = 0; r < end; ++r) {
        std::string v = table.rows[r][idx];
        if (is_missing(v)) {
          v = "na";
          has_na = true;
        }
        levels.insert(v);
        fc.values.push_back(std::move(v));
      }
      fc.reference = has_na ? "na" : *levels.begin();
      for (const auto& l : levels) {
        if (l != fc.reference) {
          fc.levels.push_back(l);
          fc.indicator_names.push_back(f + "_" + l);
        }
      }
      for (std::size_t k = 0; k < fc.levels.size(); ++k) {
        NumericColumn ind{fc.indicator_names[k], Series(end, 0.0)};
        for (std::size_t r = 0; r < end; ++r) {
          if (fc.values[r] == fc.levels[k]) ind.values[r] = 1.0;
        }
        if (ds.has_column(ind.name)) fail("indicator column name clash '" + ind.name + "'");
        ds.numeric_.push_back(std::move(ind));
      }
      ds.factors_.push_back(std::move(fc));
    }

    for (const auto& c : roles.paid_media_spends) {
      auto w = ds.window_column(c);
      if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
        fail("media column '" + c + "' has no variation (all zero in window)");
      }
    }
    return ds;
  }
};

MmmDataset build_dataset(const CsvTable& table, const VariableRoles& roles,
                         const std::optional<DateWindow>& window, const LoadOptions& options) {
  return DatasetBuilder::build(table, roles, window, options);
}

MmmDataset load_dataset(const std::filesystem::path& path, const VariableRoles& roles,
                        const std::optional<DateWindow>& window, const LoadOptions& options) {
  return build_dataset(read_csv(path), roles, window, options);
}

CsvTable dataset_to_table(const MmmDataset& ds) {
  const auto& roles = ds.roles();
  CsvTable t;
  t.header.push_back(roles.date_var);
  std::vector<const Series*> numeric;
  for (const auto& col : ds.numeric_columns()) {
    bool indicator = false;
    for (const auto& f : ds.factors()) {
      if (std::find(f.indicator_names.begin(), f.indicator_names.end(), col.name) !=
          f.indicator_names.end()) {
        indicator = true;
      }
    }
    if (indicator) continue;
    t.header.push_back(col.name);
    numeric.push_back(&col.values);
  }
  for (const auto& f : ds.factors()) t.header.push_back(f.name);

  t.rows.reserve(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(t.header.size());
    row.push_back(ds.dates()[r].iso());
    for (const auto* s : numeric) row.push_back(format_number((*s)[r]));
    for (const auto& f : ds.factors()) row.push_back(f.values[r]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void save_dataset(const MmmDataset& ds, const std::filesystem::path& path) {
  write_csv(path, dataset_to_table(ds));
}

std::string dataset_fingerprint(const MmmDataset& ds) {
  std::string canon = format_csv(dataset_to_table(ds));
  canon += "|window=" + ds.window().start.iso() + ".." + ds.window().end.iso();
  canon += "|frequency=" + to_string(ds.frequency());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool ValidationReport::has_warning(std::string_view code) const {
  return std::any_of(warnings.begin(), warnings.end(),
                     [&](const ValidationIssue& i) { return i.code == code; });
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << "validation: " << (ok() ? "OK" : "FAILED") << " (" << errors.size() << " errors, "
      << warnings.size() << " warnings)\n";
  for (const auto& e : errors) out << "  error   [" << e.code << "] " << e.message << "\n";
  for (const auto& w : warnings) out << "  warning [" << w.code << "] " << w.message << "\n";
  return out.str();
}

std::string ValidationReport::to_json() const {
  auto issues = [](const std::vector<ValidationIssue>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& i : v) arr.push_back({{"code", i.code}, {"message", i.message}});
    return arr;
  };
  nlohmann::json j;
  j["ok"] = ok();
  j["errors"] = issues(errors);
  j["warnings"] = issues(warnings);
  return j.dump(2);
}

std::size_t design_width(const MmmDataset& ds) {
  return ds.roles().paid_media_spends.size() + ds.organic_columns().size() +
         ds.context_columns().size() + ds.roles().prophet_vars.size();
}

ValidationReport validate_dataset(const MmmDataset& ds, std::size_t design_columns) {
  ValidationReport report;
  const std::size_t n = ds.window_size();

  if (n < design_columns + 2) {
    report.errors.push_back(
        {"insufficient_observations", std::to_string(n) + " in-window observations cannot support " +
                                          std::to_string(design_columns) + " design columns"});
  }
  if (design_columns * 10 > n) {
    report.warnings.push_back(
        {"one_in_ten", "one-in-ten violated: " + std::to_string(design_columns) +
                           " independent variables for " + std::to_string(n) + " observations"});
  }
  const std::size_t minimum = ds.frequency() == Frequency::weekly ? 104 : 180;
  if (n < minimum) {
    report.warnings.push_back(
        {"min_observations", std::to_string(n) + " " + to_string(ds.frequency()) +
                                 " observations in window, recommended minimum is " +
                                 std::to_string(minimum)});
  }

  std::vector<std::string> media = ds.roles().paid_media_spends;
  for (const auto& v : ds.roles().paid_media_vars) {
    if (std::find(media.begin(), media.end(), v) == media.end()) media.push_back(v);
  }
  for (const auto& o : ds.organic_columns()) media.push_back(o);
  for (const auto& name : media) {
    auto w = ds.window_column(name);
    double mean = 0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());
    double var = 0;
    for (double v : w) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(w.size()));
    const double cv = mean > 0 ? sd / mean : 0.0;
    if (cv < 0.05) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", cv);
      report.warnings.push_back({"low_variation", "column '" + name +
                                                      "' has insufficient variation (CV = " + buf +
                                                      " < 0.05)"});
    }
  }
  return report;
}

}  // namespace mmm
