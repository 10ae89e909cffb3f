#include "mlkit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mlkit/error.hpp"
#include "mlkit/table.hpp"

namespace mlkit {

std::string col_kind_name(ColKind k) {
  switch (k) {
    case ColKind::Numeric: return "numeric";
    case ColKind::Factor: return "factor";
    case ColKind::Ordered: return "ordered";
    case ColKind::Logical: return "logical";
  }
  return "?";
}

ColKind col_kind_from_name(const std::string& name) {
  if (name == "numeric") return ColKind::Numeric;
  if (name == "factor") return ColKind::Factor;
  if (name == "ordered") return ColKind::Ordered;
  if (name == "logical") return ColKind::Logical;
  throw ValueError("unknown column kind: " + name);
}

bool FeatureColumn::has_missings() const {
  for (double v : values)
    if (is_missing(v)) return true;
  return false;
}

const std::string& FeatureColumn::level_of(int i) const {
  if (!is_factor_like())
    throw ValueError("column '" + name + "' is not a factor");
  const int idx = static_cast<int>(values[i]);
  if (is_missing(values[i]) || idx < 0 || idx >= static_cast<int>(levels.size()))
    throw ValueError("missing or out-of-range factor cell in '" + name + "'");
  return levels[idx];
}

int FeatureColumn::level_index(const std::string& label) const {
  for (std::size_t j = 0; j < levels.size(); ++j)
    if (levels[j] == label) return static_cast<int>(j);
  return -1;
}

std::string FeatureColumn::cell_string(int i) const {
  const double v = values[i];
  if (is_missing(v)) return "NA";
  switch (kind) {
    case ColKind::Numeric: return format_number(v);
    case ColKind::Logical: return v != 0.0 ? "TRUE" : "FALSE";
    case ColKind::Factor:
    case ColKind::Ordered: return levels[static_cast<int>(v)];
  }
  return "NA";
}

int FeatureColumn::count_distinct_non_missing() const {
  std::set<double> seen;
  for (double v : values)
    if (!is_missing(v)) seen.insert(v);
  return static_cast<int>(seen.size());
}

int Dataset::col_index(const std::string& name) const {
  for (int i = 0; i < ncol(); ++i)
    if (columns[i].name == name) return i;
  return -1;
}

const FeatureColumn& Dataset::col(const std::string& name) const {
  const int i = col_index(name);
  if (i < 0) throw ValueError("no such column: " + name);
  return columns[i];
}

FeatureColumn& Dataset::col(const std::string& name) {
  const int i = col_index(name);
  if (i < 0) throw ValueError("no such column: " + name);
  return columns[i];
}

std::vector<std::string> Dataset::col_names() const {
  std::vector<std::string> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(c.name);
  return out;
}

Dataset Dataset::select_rows(const std::vector<int>& rows) const {
  Dataset out;
  out.n_rows = static_cast<int>(rows.size());
  out.columns.reserve(columns.size());
  for (const auto& c : columns) {
    FeatureColumn nc;
    nc.name = c.name;
    nc.kind = c.kind;
    nc.levels = c.levels;
    nc.values.reserve(rows.size());
    for (int r : rows) {
      if (r < 0 || r >= n_rows)
        throw ValueError("row index out of range: " + std::to_string(r + 1));
      nc.values.push_back(c.values[r]);
    }
    out.columns.push_back(std::move(nc));
  }
  return out;
}

Dataset Dataset::select_cols(const std::vector<std::string>& names) const {
  Dataset out;
  out.n_rows = n_rows;
  for (const auto& n : names) out.columns.push_back(col(n));
  return out;
}

void Dataset::add_column(FeatureColumn c) {
  if (c.name.empty()) throw ValueError("column name must be nonempty");
  if (has_col(c.name)) throw ValueError("duplicate column name: " + c.name);
  if (columns.empty()) n_rows = c.size();
  if (c.size() != n_rows)
    throw ValueError("column '" + c.name + "' has length " +
                     std::to_string(c.size()) + ", expected " +
                     std::to_string(n_rows));
  columns.push_back(std::move(c));
}

void Dataset::validate() const {
  std::set<std::string> names;
  for (const auto& c : columns) {
    if (c.name.empty()) throw ValueError("column name must be nonempty");
    if (!names.insert(c.name).second)
      throw ValueError("duplicate column name: " + c.name);
    if (c.size() != n_rows)
      throw ValueError("column '" + c.name + "' has inconsistent length");
    if (c.is_factor_like()) {
      for (double v : c.values) {
        if (is_missing(v)) continue;
        const int idx = static_cast<int>(v);
        if (idx < 0 || idx >= static_cast<int>(c.levels.size()))
          throw ValueError("factor cell out of level range in '" + c.name + "'");
      }
    } else if (c.kind == ColKind::Numeric) {
      for (double v : c.values)
        if (!is_missing(v) && !std::isfinite(v))
          throw ValueError("non-finite numeric cell in '" + c.name + "'");
    }
  }
}

std::string Dataset::to_csv() const {
  std::string out;
  for (int c = 0; c < ncol(); ++c) {
    if (c) out += ',';
    out += csv_quote(columns[c].name);
  }
  out += '\n';
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < ncol(); ++c) {
      if (c) out += ',';
      out += csv_quote(columns[c].cell_string(r));
    }
    out += '\n';
  }
  return out;
}

namespace {

// RFC-4180 field splitting, tolerant of \r\n line ends.
std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool row_started = false;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_started = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !field.empty() || !fields.empty()) {
          fields.push_back(std::move(field));
          field.clear();
          records.push_back(std::move(fields));
          fields.clear();
          row_started = false;
        }
        break;
      default:
        field += c;
        row_started = true;
        break;
    }
  }
  if (in_quotes) throw ValueError("unterminated quoted field in CSV");
  if (row_started || !fields.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  return records;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  if (first == last) return false;
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

bool is_na(const std::string& s) { return s.empty() || s == "NA"; }

bool is_logical_token(const std::string& s) {
  return s == "TRUE" || s == "FALSE";
}

}  // namespace

Dataset parse_csv_dataset(const std::string& text,
                          const std::map<std::string, ColKind>& schema) {
  auto records = parse_csv_records(text);
  if (records.empty()) throw ValueError("CSV has no header row");
  const auto& header = records[0];
  const int ncol = static_cast<int>(header.size());
  const int nrow = static_cast<int>(records.size()) - 1;

  for (const auto& [name, kind] : schema) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw ValueError("schema names a nonexistent column: " + name);
  }

  for (int r = 0; r < nrow; ++r) {
    if (static_cast<int>(records[r + 1].size()) != ncol)
      throw ValueError("ragged CSV row " + std::to_string(r + 2) + ": got " +
                       std::to_string(records[r + 1].size()) + " fields, expected " +
                       std::to_string(ncol));
  }

  Dataset ds;
  ds.n_rows = nrow;
  for (int c = 0; c < ncol; ++c) {
    FeatureColumn fc;
    fc.name = header[c];
    if (fc.name.empty()) throw ValueError("empty column name in CSV header");

    std::vector<std::string> cells(nrow);
    for (int r = 0; r < nrow; ++r) cells[r] = records[r + 1][c];

    auto it = schema.find(fc.name);
    ColKind kind;
    if (it != schema.end()) {
      kind = it->second;
    } else {
      bool all_logical = true, all_numeric = true;
      double tmp;
      for (const auto& cell : cells) {
        if (is_na(cell)) continue;
        if (!is_logical_token(cell)) all_logical = false;
        if (!parse_double(cell, tmp)) all_numeric = false;
        if (!all_logical && !all_numeric) break;
      }
      kind = all_logical ? ColKind::Logical
                         : (all_numeric ? ColKind::Numeric : ColKind::Factor);
    }
    fc.kind = kind;
    fc.values.resize(nrow, kMissing);

    switch (kind) {
      case ColKind::Numeric: {
        for (int r = 0; r < nrow; ++r) {
          if (is_na(cells[r])) continue;
          double v;
          if (!parse_double(cells[r], v))
            throw ValueError("column '" + fc.name + "' row " +
                             std::to_string(r + 1) + ": not a number: '" +
                             cells[r] + "'");
          fc.values[r] = v;
        }
        break;
      }
      case ColKind::Logical: {
        for (int r = 0; r < nrow; ++r) {
          if (is_na(cells[r])) continue;
          if (!is_logical_token(cells[r]))
            throw ValueError("column '" + fc.name + "' row " +
                             std::to_string(r + 1) +
                             ": not TRUE/FALSE: '" + cells[r] + "'");
          fc.values[r] = cells[r] == "TRUE" ? 1.0 : 0.0;
        }
        break;
      }
      case ColKind::Factor:
      case ColKind::Ordered: {
        // Levels sorted lexicographically for determinism; schema users who
        // need a custom order can relevel afterwards.
        std::set<std::string> level_set;
        for (const auto& cell : cells)
          if (!is_na(cell)) level_set.insert(cell);
        fc.levels.assign(level_set.begin(), level_set.end());
        for (int r = 0; r < nrow; ++r) {
          if (is_na(cells[r])) continue;
          fc.values[r] = fc.level_index(cells[r]);
        }
        break;
      }
    }
    ds.add_column(std::move(fc));
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& path,
                     const std::map<std::string, ColKind>& schema) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValueError("cannot read file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv_dataset(ss.str(), schema);
}

FeatureColumn numeric_column(std::string name, std::vector<double> values) {
  FeatureColumn c;
  c.name = std::move(name);
  c.kind = ColKind::Numeric;
  c.values = std::move(values);
  return c;
}

FeatureColumn factor_column(std::string name,
                            const std::vector<std::string>& labels,
                            std::vector<std::string> levels) {
  FeatureColumn c;
  c.name = std::move(name);
  c.kind = ColKind::Factor;
  if (levels.empty()) {
    std::set<std::string> s;
    for (const auto& l : labels)
      if (l != "NA" && !l.empty()) s.insert(l);
    c.levels.assign(s.begin(), s.end());
  } else {
    c.levels = std::move(levels);
  }
  c.values.reserve(labels.size());
  for (const auto& l : labels) {
    if (l == "NA" || l.empty()) {
      c.values.push_back(kMissing);
    } else {
      const int idx = c.level_index(l);
      if (idx < 0) throw ValueError("label not in levels: " + l);
      c.values.push_back(idx);
    }
  }
  return c;
}

FeatureColumn logical_column(std::string name, const std::vector<int>& flags) {
  FeatureColumn c;
  c.name = std::move(name);
  c.kind = ColKind::Logical;
  c.values.reserve(flags.size());
  for (int f : flags)
    c.values.push_back(f < 0 ? kMissing : (f ? 1.0 : 0.0));
  return c;
}

}  // namespace mlkit
