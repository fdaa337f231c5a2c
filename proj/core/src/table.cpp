#include "maxtab/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace maxtab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> try_parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);  // from_chars rejects a leading '+'
  if (s.empty() || s.front() == '+') return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct RawField {
  std::string text;
  bool quoted = false;
};

// RFC 4180 style: quoted fields may contain delimiters, newlines and doubled
// quotes. Accepts \n, \r\n and \r row terminators.
std::vector<std::vector<RawField>> split_csv(const std::string& text, char delim) {
  std::vector<std::vector<RawField>> rows;
  std::vector<RawField> row;
  RawField field;
  bool field_started = false;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto end_field = [&] {
    row.push_back(std::move(field));
    field = RawField{};
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  while (i < n) {
    char c = text[i];
    if (!field_started && c == '"') {
      field.quoted = true;
      field_started = true;
      ++i;
      bool closed = false;
      while (i < n) {
        if (text[i] == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field.text += '"';
            i += 2;
          } else {
            ++i;
            closed = true;
            break;
          }
        } else {
          field.text += text[i++];
        }
      }
      if (!closed) throw std::runtime_error("unterminated quoted field in CSV input");
      // Only blanks may sit between a closing quote and the field end.
      while (i < n && text[i] != delim && text[i] != '\n' && text[i] != '\r') {
        if (text[i] != ' ' && text[i] != '\t')
          throw std::runtime_error("unexpected character after closing quote in CSV input");
        ++i;
      }
    } else if (c == delim) {
      end_field();
      ++i;
    } else if (c == '\n' || c == '\r') {
      end_row();
      if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
      ++i;
    } else {
      field_started = true;
      field.text += c;
      ++i;
    }
  }
  if (field_started || !field.text.empty() || field.quoted || !row.empty()) end_row();

  for (auto& r : rows)
    for (auto& f : r)
      if (!f.quoted) f.text = std::string(trim(f.text));
  return rows;
}

Cell make_cell(const RawField& f, const IngestOptions& opts) {
  if (!f.quoted) {
    for (const auto& s : opts.missing_sentinels)
      if (f.text == s) return Cell{};
  }
  if (auto v = try_parse_number(f.text)) {
    if (!std::isfinite(*v)) return Cell{};
    return Cell{*v};
  }
  return Cell{f.text};
}

// Category ordering for equal frequencies: numeric labels by value (so that
// re-encoding an already encoded column assigns the same codes), then text
// labels lexicographically.
bool label_less(const std::string& a, const std::string& b) {
  auto na = try_parse_number(a);
  auto nb = try_parse_number(b);
  if (na && nb) {
    if (*na != *nb) return *na < *nb;
    return a < b;
  }
  if (na.has_value() != nb.has_value()) return na.has_value();
  return a < b;
}

std::vector<std::string> build_codebook(const std::map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return label_less(a.first, b.first);
  });
  std::vector<std::string> codebook;
  codebook.reserve(items.size());
  for (auto& [label, cnt] : items) codebook.push_back(label);
  return codebook;
}

bool needs_quoting(const std::string& s, char delim) {
  if (s.find(delim) != std::string::npos) return true;
  if (s.find('"') != std::string::npos) return true;
  if (s.find('\n') != std::string::npos || s.find('\r') != std::string::npos) return true;
  if (s != trim(s)) return true;
  // Bare sentinels would reload as missing cells.
  return s == "?" || s == "NA";
}

void append_field(std::string& out, const std::string& s, char delim) {
  if (!needs_quoting(s, delim)) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

std::string number_label(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string cell_key(const Cell& c) {
  if (is_text(c)) return text_of(c);
  if (is_number(c)) return number_label(number_of(c));
  return kMissingLabel;
}

Table decode_categorical(const Table& table, const std::vector<ColumnSchema>& schemas) {
  if (schemas.size() != table.n_cols())
    throw std::invalid_argument("schema count does not match column count");
  Table out = table;
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    const ColumnSchema& s = schemas[j];
    if (s.role != ColumnRole::categorical || s.codebook.empty()) continue;
    for (auto& cell : out.columns[j]) {
      if (!is_number(cell)) continue;
      auto code = static_cast<long long>(std::llround(number_of(cell)));
      code = std::clamp<long long>(code, 0, static_cast<long long>(s.codebook.size()) - 1);
      const std::string& label = s.codebook[static_cast<std::size_t>(code)];
      cell = label == kMissingLabel ? Cell{} : Cell{label};
    }
  }
  return out;
}

int ColumnSchema::code_of(const std::string& label) const {
  for (std::size_t i = 0; i < codebook.size(); ++i)
    if (codebook[i] == label) return static_cast<int>(i);
  return -1;
}

Table parse_csv(const std::string& text, const IngestOptions& opts) {
  auto rows = split_csv(text, opts.delimiter);
  if (rows.empty()) throw std::runtime_error("CSV input has no header row");

  Table table;
  for (const auto& f : rows.front()) table.column_names.push_back(f.text);
  const std::size_t n_cols = table.column_names.size();

  {
    std::set<std::string> seen;
    for (const auto& name : table.column_names)
      if (!seen.insert(name).second)
        throw std::runtime_error("duplicate column name in header: \"" + name + "\"");
  }

  table.columns.assign(n_cols, {});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    // Tolerate stray blank lines in multi-column files; in a single-column
    // file an empty line is a legitimate missing value.
    if (n_cols > 1 && row.size() == 1 && !row[0].quoted && row[0].text.empty()) continue;
    if (row.size() != n_cols)
      throw std::runtime_error("data row " + std::to_string(r) + " has " +
                               std::to_string(row.size()) + " fields, expected " +
                               std::to_string(n_cols));
    for (std::size_t c = 0; c < n_cols; ++c) table.columns[c].push_back(make_cell(row[c], opts));
  }
  return table;
}

Table load_csv(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), opts);
}

std::vector<ColumnSchema> infer_schema(const Table& table) {
  if (table.n_cols() == 0 || table.n_rows() == 0)
    throw std::invalid_argument("cannot infer a schema for an empty table");

  std::vector<ColumnSchema> schemas;
  schemas.reserve(table.n_cols());
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    const auto& col = table.columns[j];
    ColumnSchema s;
    s.name = table.column_names[j];

    bool has_text = false;
    bool all_whole = true;
    double minv = 0, maxv = 0;
    bool have_number = false;
    std::set<std::string> distinct;
    for (const auto& cell : col) {
      if (is_missing(cell)) continue;
      distinct.insert(cell_key(cell));
      if (is_text(cell)) {
        has_text = true;
      } else {
        double v = number_of(cell);
        if (v != std::floor(v)) all_whole = false;
        if (!have_number || v < minv) minv = v;
        if (!have_number || v > maxv) maxv = v;
        have_number = true;
      }
    }

    if (has_text || distinct.size() <= 6) {
      s.role = ColumnRole::categorical;
      std::map<std::string, std::size_t> counts;
      for (const auto& cell : col)
        if (!is_missing(cell)) ++counts[cell_key(cell)];
      s.codebook = build_codebook(counts);
    } else {
      s.role = all_whole ? ColumnRole::integer_valued : ColumnRole::continuous;
      if (have_number) {
        if (minv >= 0)
          s.sign_constraint = SignConstraint::non_negative;
        else if (maxv <= 0)
          s.sign_constraint = SignConstraint::non_positive;
      }
    }
    schemas.push_back(std::move(s));
  }
  return schemas;
}

std::pair<Table, std::vector<ColumnSchema>> encode_and_prune(
    const Table& table, const std::vector<ColumnSchema>& schemas) {
  if (schemas.size() != table.n_cols())
    throw std::invalid_argument("schema count does not match column count");

  constexpr std::size_t kRareCutoff = 30;

  Table out;
  std::vector<ColumnSchema> out_schemas = schemas;

  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    const auto& col = table.columns[j];
    ColumnSchema& s = out_schemas[j];
    s.dropped = false;
    s.drop_reason.clear();

    if (s.role != ColumnRole::categorical) {
      std::set<double> distinct;
      for (const auto& cell : col)
        if (is_number(cell)) distinct.insert(number_of(cell));
      if (distinct.size() <= 1) {
        s.dropped = true;
        s.drop_reason = "single-valued";
        continue;
      }
      out.column_names.push_back(s.name);
      out.columns.push_back(col);
      continue;
    }

    // Missing cells become their own category before rare aggregation, so
    // they take part in the frequency rules like any other label.
    std::vector<std::string> labels(col.size());
    std::map<std::string, std::size_t> counts;
    for (std::size_t r = 0; r < col.size(); ++r) {
      labels[r] = is_missing(col[r]) ? kMissingLabel : cell_key(col[r]);
      ++counts[labels[r]];
    }

    if (counts.size() <= 1) {
      s.dropped = true;
      s.drop_reason = "single-valued";
      continue;
    }

    std::size_t rare_rows = 0;
    bool merged = false;
    std::map<std::string, std::size_t> final_counts;
    for (const auto& [label, cnt] : counts) {
      if (cnt < kRareCutoff) {
        rare_rows += cnt;
        merged = true;
        final_counts[kRareLabel] += cnt;
      } else {
        final_counts[label] += cnt;
      }
    }

    if (final_counts.size() <= 1) {
      s.dropped = true;
      s.drop_reason = "single-valued";
      continue;
    }
    std::size_t non_rare = 0;
    for (const auto& [label, cnt] : counts)
      if (cnt >= kRareCutoff) ++non_rare;
    if (merged && non_rare == 1 && rare_rows <= kRareCutoff) {
      s.dropped = true;
      s.drop_reason = "nearly single-valued";
      continue;
    }

    s.codebook = build_codebook(final_counts);
    s.rare_label_present = merged;

    std::vector<Cell> encoded(col.size());
    for (std::size_t r = 0; r < col.size(); ++r) {
      const std::string& label = counts[labels[r]] < kRareCutoff ? kRareLabel : labels[r];
      encoded[r] = Cell{static_cast<double>(s.code_of(label))};
    }
    out.column_names.push_back(s.name);
    out.columns.push_back(std::move(encoded));
  }

  if (out.n_cols() == 0) throw std::runtime_error("no modelable columns after pruning");
  return {std::move(out), std::move(out_schemas)};
}

std::vector<ColumnSchema> surviving_schemas(const std::vector<ColumnSchema>& schemas) {
  std::vector<ColumnSchema> out;
  for (const auto& s : schemas)
    if (!s.dropped) out.push_back(s);
  return out;
}

std::string csv_to_string(const Table& table, const std::vector<ColumnSchema>* schemas,
                          char delimiter) {
  if (schemas && schemas->size() != table.n_cols())
    throw std::invalid_argument("schema count does not match column count");

  std::string out;
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    if (j) out += delimiter;
    append_field(out, table.column_names[j], delimiter);
  }
  out += '\n';

  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
      if (j) out += delimiter;
      const Cell& cell = table.columns[j][r];
      if (is_missing(cell)) continue;
      const ColumnSchema* s = schemas ? &(*schemas)[j] : nullptr;
      if (s && s->role == ColumnRole::categorical && !s->codebook.empty() && is_number(cell)) {
        auto code = static_cast<long long>(std::llround(number_of(cell)));
        code = std::clamp<long long>(code, 0, static_cast<long long>(s->codebook.size()) - 1);
        append_field(out, s->codebook[static_cast<std::size_t>(code)], delimiter);
      } else if (is_number(cell)) {
        out += number_label(number_of(cell));
      } else {
        append_field(out, text_of(cell), delimiter);
      }
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Table& table, const std::string& path,
               const std::vector<ColumnSchema>* schemas, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << csv_to_string(table, schemas, delimiter);
  if (!out) throw std::runtime_error("failed writing file: " + path);
}

}  // namespace maxtab
