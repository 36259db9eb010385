#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmm/csv.hpp"
#include "mmm/date.hpp"

namespace mmm {

using Series = std::vector<double>;

enum class Frequency { daily, weekly };
enum class DepVarType { revenue, conversion };
enum class ProphetComponent { trend, season, weekday, holiday };

int period_days(Frequency f);
std::string to_string(Frequency f);
std::string to_string(DepVarType t);
std::string to_string(ProphetComponent c);
Frequency parse_frequency(std::string_view text);
DepVarType parse_dep_var_type(std::string_view text);
ProphetComponent parse_prophet_component(std::string_view text);

/// Column-to-role assignment, named after the fields of the input-collection
/// step it mirrors.
struct VariableRoles {
  std::string date_var = "DATE";
  std::string dep_var;
  DepVarType dep_var_type = DepVarType::revenue;
  std::vector<std::string> paid_media_spends;
  std::vector<std::string> paid_media_vars;
  std::vector<std::string> organic_vars;
  std::vector<std::string> context_vars;
  std::vector<std::string> factor_vars;
  std::vector<ProphetComponent> prophet_vars;
  std::string prophet_country;

  /// Throws InputError on any role invariant violation.
  void validate() const;
  bool is_factor(std::string_view column) const;
  bool operator==(const VariableRoles&) const = default;
};

struct DateWindow {
  Date start;
  Date end;
  bool operator==(const DateWindow&) const = default;
};

/// A categorical column expanded into k-1 indicator columns. "na" is the
/// reference level when present, otherwise the lexicographically first level.
struct FactorColumn {
  std::string name;
  std::vector<std::string> values;
  std::string reference;
  std::vector<std::string> levels;  // non-reference, sorted
  std::vector<std::string> indicator_names;
  bool operator==(const FactorColumn&) const = default;
};

struct NumericColumn {
  std::string name;
  Series values;
  bool operator==(const NumericColumn&) const = default;
};

class MmmDataset {
 public:
  const std::vector<Date>& dates() const { return dates_; }
  std::size_t size() const { return dates_.size(); }
  Frequency frequency() const { return frequency_; }
  const VariableRoles& roles() const { return roles_; }
  const DateWindow& window() const { return window_; }

  /// Row index range [window_begin, window_end) of the modeling window.
  std::size_t window_begin() const { return window_begin_; }
  std::size_t window_end() const { return window_end_; }
  std::size_t window_size() const { return window_end_ - window_begin_; }
  std::span<const Date> window_dates() const;

  bool has_column(std::string_view name) const;
  /// Full-length numeric column, including indicator columns.
  const Series& column(std::string_view name) const;
  std::span<const double> window_column(std::string_view name) const;

  const std::vector<NumericColumn>& numeric_columns() const { return numeric_; }
  const std::vector<FactorColumn>& factors() const { return factors_; }

  /// Organic variables that enter the model through transforms.
  std::vector<std::string> organic_columns() const;
  /// Numeric context variables followed by factor indicator columns.
  std::vector<std::string> context_columns() const;
  /// Paid-media spend and organic columns, the transformed channels.
  std::vector<std::string> media_channels() const;

  bool operator==(const MmmDataset&) const = default;

 private:
  friend struct DatasetBuilder;

  std::vector<Date> dates_;
  Frequency frequency_ = Frequency::weekly;
  VariableRoles roles_;
  DateWindow window_;
  std::size_t window_begin_ = 0;
  std::size_t window_end_ = 0;
  std::vector<NumericColumn> numeric_;
  std::vector<FactorColumn> factors_;
};

struct LoadOptions {
  std::optional<Frequency> frequency;
  /// Rows that must precede the window so adstock has history to draw on.
  std::size_t min_history_periods = 0;
};

/// Parses and validates a delimited table. Rows after the window end are
/// dropped; rows before the window start are kept as adstock history.
MmmDataset build_dataset(const CsvTable& table, const VariableRoles& roles,
                         const std::optional<DateWindow>& window, const LoadOptions& options = {});
MmmDataset load_dataset(const std::filesystem::path& path, const VariableRoles& roles,
                        const std::optional<DateWindow>& window, const LoadOptions& options = {});

/// Inverse of build_dataset for the role columns: reloading the result with
/// the same roles and window yields an equal dataset.
CsvTable dataset_to_table(const MmmDataset& ds);
void save_dataset(const MmmDataset& ds, const std::filesystem::path& path);

/// FNV-1a 64 over the canonical serialization, window and frequency.
std::string dataset_fingerprint(const MmmDataset& ds);

struct ValidationIssue {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
  bool has_warning(std::string_view code) const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Number of non-intercept design columns the model would use.
std::size_t design_width(const MmmDataset& ds);

ValidationReport validate_dataset(const MmmDataset& ds, std::size_t design_columns);

struct Holiday {
  Date ds;
  std::string holiday;
  std::string country;
  bool operator==(const Holiday&) const = default;
};

class HolidayTable {
 public:
  HolidayTable() = default;
  /// Throws InputError on duplicate (date, name, country) entries.
  explicit HolidayTable(std::vector<Holiday> entries);

  const std::vector<Holiday>& entries() const { return entries_; }
  bool has_country(std::string_view country) const;
  bool empty() const { return entries_.empty(); }
  CsvTable to_table() const;

 private:
  std::vector<Holiday> entries_;
};

HolidayTable parse_holidays(const CsvTable& table);
HolidayTable load_holidays(const std::filesystem::path& path);

}  // namespace mmm
