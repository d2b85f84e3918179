#pragma once

// Verification reports, run configuration and the lemma suites behind
// `pinchlab verify`.  Reports serialize to JSON, sweep data to CSV.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pinchlab/collar.hpp"
#include "pinchlab/pinch.hpp"

namespace pinchlab {

using Scalar = std::variant<double, std::string, bool>;

struct Entry {
  std::string key;
  Scalar value;
  bool operator==(const Entry&) const = default;
};
using Entries = std::vector<Entry>;

struct CheckRecord {
  std::string id;
  Entries params;
  Entries measured;
  Entries tolerance;
  bool passed = false;
  std::string note;
  bool operator==(const CheckRecord&) const = default;
};

struct VerificationReport {
  std::string suite;
  std::vector<CheckRecord> records;
  Entries constants;    // K0_emp, C1_emp, C2_emp, C_emp where the suite measures them
  Entries environment;  // grid sizes, tolerances, schedule
  bool passed() const noexcept;
  // Non-finite numbers are written as {"nonfinite": "inf" | "-inf" | "nan"}.
  std::string to_json() const;
  static VerificationReport from_json(std::string_view text);
  bool operator==(const VerificationReport&) const = default;
};

using Cell = std::variant<double, std::string>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::string to_csv() const;
};

struct ColumnDoc {
  const char* name;
  const char* meaning;
};
struct TableSchema {
  const char* command;  // "verify <id>" or "pinch"
  const char* table;
  std::vector<ColumnDoc> columns;
};
// Every CSV table the library emits, with its columns.
const std::vector<TableSchema>& table_schemas();

struct ToleranceDoc {
  const char* name;
  double value;
  const char* meaning;
};
const std::vector<ToleranceDoc>& default_tolerances();

struct RunConfig {
  double ell_min = 1e-3;
  double ell_max = kMaxCollarLength;
  std::size_t samples = 64;
  std::size_t grid = 512;
  std::size_t time_grid = 32;
  std::map<std::string, double> tolerances;  // overrides of default_tolerances()
  std::optional<std::string> schedule;       // inline spec or JSON text
  // Throws DomainError: bounds outside (0, 2 asinh 1], ell_min >= ell_max,
  // counts below 16, unknown tolerance names.
  void validate() const;
  double tol(std::string_view name) const;
};

struct SuiteOutput {
  VerificationReport report;
  std::vector<Table> tables;
};

const std::vector<std::string>& suite_ids();
// Throws DomainError listing the valid ids when `id` is unknown.
SuiteOutput run_suite(std::string_view id, const RunConfig& cfg);

// %.17g, with inf / -inf / nan spelled out.
std::string format_number(double v);

Table curve_table(const CurveReport& r);
std::string curve_to_json(const CurveReport& r, const PinchSchedule& sched, const CurveConfig& cfg);

}  // namespace pinchlab
