#include <algorithm>
#include <set>
#include <tuple>

#include "mmm/dataset.hpp"
#include "mmm/error.hpp"

namespace mmm {

HolidayTable::HolidayTable(std::vector<Holiday> entries) : entries_(std::move(entries)) {
  std::set<std::tuple<std::int32_t, std::string, std::string>> seen;
  for (const auto& h : entries_) {
    if (!seen.emplace(h.ds.days(), h.holiday, h.country).second) {
      throw InputError("holidays", "duplicate entry (" + h.ds.iso() + ", " + h.holiday + ", " +
                                       h.country + ")");
    }
  }
  std::stable_sort(entries_.begin(), entries_.end(), [](const Holiday& a, const Holiday& b) {
    return std::tie(a.country, a.ds, a.holiday) < std::tie(b.country, b.ds, b.holiday);
  });
}

bool HolidayTable::has_country(std::string_view country) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Holiday& h) { return h.country == country; });
}

CsvTable HolidayTable::to_table() const {
  CsvTable t;
  t.header = {"ds", "holiday", "country"};
  for (const auto& h : entries_) t.rows.push_back({h.ds.iso(), h.holiday, h.country});
  return t;
}

HolidayTable parse_holidays(const CsvTable& table) {
  const auto ds = table.column_index("ds");
  const auto name = table.column_index("holiday");
  const auto country = table.column_index("country");
  if (!ds || !name || !country) {
    throw InputError("holidays", "holiday table needs columns ds,holiday,country");
  }
  std::vector<Holiday> entries;
  entries.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    entries.push_back({Date::parse(row[*ds]), row[*name], row[*country]});
  }
  return HolidayTable(std::move(entries));
}

HolidayTable load_holidays(const std::filesystem::path& path) {
  return parse_holidays(read_csv(path));
}

}  // namespace mmm
