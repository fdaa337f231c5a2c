#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace maxtab {

// A cell is missing, a number, or a text label that did not parse as a number.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
inline bool is_number(const Cell& c) { return std::holds_alternative<double>(c); }
inline bool is_text(const Cell& c) { return std::holds_alternative<std::string>(c); }
inline double number_of(const Cell& c) { return std::get<double>(c); }
inline const std::string& text_of(const Cell& c) { return std::get<std::string>(c); }

// Column-major table; every column has the same length.
struct Table {
  std::vector<std::string> column_names;
  std::vector<std::vector<Cell>> columns;

  std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t n_cols() const { return columns.size(); }
};

enum class ColumnRole { continuous, integer_valued, categorical };
enum class SignConstraint { none, non_negative, non_positive };

// Label given to merged low-frequency categories.
inline constexpr const char* kRareLabel = "rare";
// Missing categorical cells become their own category under this label; the
// empty string round-trips through CSV as a missing cell.
inline constexpr const char* kMissingLabel = "";

struct ColumnSchema {
  std::string name;
  ColumnRole role = ColumnRole::continuous;
  // Categorical only: label for each integer code, most frequent first.
  std::vector<std::string> codebook;
  bool rare_label_present = false;
  SignConstraint sign_constraint = SignConstraint::none;
  bool dropped = false;
  std::string drop_reason;

  int code_of(const std::string& label) const;
};

struct IngestOptions {
  char delimiter = ',';
  std::vector<std::string> missing_sentinels = {"?", "NA", ""};
};

// Canonical text form of a numeric cell (shortest round-trip form). Numeric
// categorical labels use this so that encode/decode round-trips exactly.
std::string number_label(double v);

// Canonical category key of a cell: the text itself, the numeric label, or
// kMissingLabel. Quoted "1" and numeric 1 land on the same key.
std::string cell_key(const Cell& cell);

// Map categorical codes back to label cells (the missing-category label maps
// to a missing cell). Equivalent to a CSV write/reload round trip.
Table decode_categorical(const Table& table, const std::vector<ColumnSchema>& schemas);

Table parse_csv(const std::string& text, const IngestOptions& opts = {});
Table load_csv(const std::string& path, const IngestOptions& opts = {});

std::vector<ColumnSchema> infer_schema(const Table& table);

// Rare-label aggregation, integer encoding and column drops. The returned
// table holds only surviving columns, all cells numeric (categorical columns
// carry codes, and their missing cells have been folded into a category).
// Schemas are returned for every input column; dropped ones carry the reason.
std::pair<Table, std::vector<ColumnSchema>> encode_and_prune(
    const Table& table, const std::vector<ColumnSchema>& schemas);

// Schemas of surviving columns, aligned with the encoded table's columns.
std::vector<ColumnSchema> surviving_schemas(const std::vector<ColumnSchema>& schemas);

// When schemas are given, categorical codes are decoded to labels on write.
std::string csv_to_string(const Table& table,
                          const std::vector<ColumnSchema>* schemas = nullptr,
                          char delimiter = ',');
void write_csv(const Table& table, const std::string& path,
               const std::vector<ColumnSchema>* schemas = nullptr,
               char delimiter = ',');

}  // namespace maxtab
