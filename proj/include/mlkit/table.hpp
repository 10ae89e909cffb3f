#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace mlkit {

using json = nlohmann::json;

// Shortest round-trip decimal representation (std::to_chars). Used for all
// CSV/JSON number output so result files are byte-identical across runs.
std::string format_number(double v);

// Column-named table of json cells (null = missing). The lingua franca of
// the data generators and the CLI output layer.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  int ncol() const { return static_cast<int>(columns.size()); }
  int nrow() const { return static_cast<int>(rows.size()); }

  int col_index(const std::string& name) const;

  std::vector<json>& add_row();

  // RFC-4180 CSV; missing cells serialize as "NA".
  std::string to_csv() const;
};

std::string csv_quote(const std::string& field);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mlkit
