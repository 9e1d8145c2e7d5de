#pragma once

#include <string>
#include <vector>

namespace aggwind {

/// Header plus string cells; fields never contain commas or quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
  std::string to_text() const;
};

CsvTable parse_csv_table(const std::string& text);

}  // namespace aggwind
