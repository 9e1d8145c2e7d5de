#pragma once

#include <string>
#include <vector>

#include "aggwind/table.hpp"

namespace aggwind {

enum class PlotKind { kLine, kBar };

/// One SVG chart drawn from columns of one CSV file. Axis labels are the column names.
struct PlotSpec {
  std::string svg_name;
  std::string csv_name;
  PlotKind kind = PlotKind::kLine;
  std::string x_column;
  std::vector<std::string> y_columns;
  std::string title;
};

std::string render_svg(const CsvTable& table, const PlotSpec& spec);

/// `svg,csv,kind,x,y1;y2,title` lines; lets a directory's plots be redrawn from its CSVs.
std::string plots_to_manifest(const std::vector<PlotSpec>& plots);
std::vector<PlotSpec> parse_manifest(const std::string& text);

/// Redraws every plot listed in `dir`/plots.manifest from the CSVs in `dir`.
void render_directory(const std::string& dir);

}  // namespace aggwind
