#include "aggwind/table.hpp"

#include <sstream>

#include "aggwind/errors.hpp"
#include "aggwind/text.hpp"

namespace aggwind {

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) throw InvalidArgument("row width does not match the header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw InvalidArgument("no column '" + name + "'");
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t k = column(name);
  std::vector<double> out;
  for (const auto& row : rows) {
    const auto v = text::parse_double(row[k]);
    if (!v) throw InvalidArgument("column '" + name + "' holds non-numeric value '" + row[k] + "'");
    out.push_back(*v);
  }
  return out;
}

std::string CsvTable::to_text() const {
  std::string out = text::join(header, ",") + "\n";
  for (const auto& row : rows) out += text::join(row, ",") + "\n";
  return out;
}

CsvTable parse_csv_table(const std::string& contents) {
  std::istringstream in(contents);
  std::string line;
  CsvTable table;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto cells = text::split(line, ',');
    for (auto& c : cells) c = text::trim(c);
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else if (cells.size() != table.header.size()) {
      throw ParseError("row width does not match the header", line_no);
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) throw ParseError("empty CSV", line_no);
  return table;
}

}  // namespace aggwind
