#include "aggwind/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "aggwind/errors.hpp"
#include "aggwind/text.hpp"

namespace aggwind {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) { return text::format_double(v, 6); }

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo;
  double hi;
  double map(double v, double px_lo, double px_hi) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

void axes(std::ostringstream& svg, const PlotSpec& spec, const Range& y) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  svg << "<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x1 << "' y2='" << y0 << "' stroke='black'/>\n";
  svg << "<line x1='" << x0 << "' y1='" << y0 << "' x2='" << x0 << "' y2='" << y1 << "' stroke='black'/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y.lo + (y.hi - y.lo) * k / 4.0;
    const double py = y.map(v, y0, y1);
    svg << "<text x='" << x0 - 6 << "' y='" << py + 4 << "' font-size='11' text-anchor='end'>" << num(v)
        << "</text>\n";
  }
  svg << "<text x='" << (x0 + x1) / 2 << "' y='" << kHeight - 15
      << "' font-size='13' text-anchor='middle'>" << escape(spec.x_column) << "</text>\n";
  std::vector<std::string> ys;
  for (const auto& c : spec.y_columns) ys.push_back(escape(c));
  svg << "<text x='18' y='" << (y0 + y1) / 2 << "' font-size='13' text-anchor='middle' transform='rotate(-90 18 "
      << (y0 + y1) / 2 << ")'>" << text::join(ys, ", ") << "</text>\n";
  svg << "<text x='" << kWidth / 2 << "' y='22' font-size='15' text-anchor='middle'>" << escape(spec.title)
      << "</text>\n";
  for (std::size_t s = 0; s < spec.y_columns.size(); ++s) {
    const double ly = kTop + 14.0 * static_cast<double>(s);
    svg << "<rect x='" << x1 - 150 << "' y='" << ly - 8 << "' width='10' height='10' fill='" << kColors[s % 6]
        << "'/><text x='" << x1 - 135 << "' y='" << ly + 1 << "' font-size='11'>" << escape(spec.y_columns[s])
        << "</text>\n";
  }
}

}  // namespace

std::string render_svg(const CsvTable& table, const PlotSpec& spec) {
  if (spec.y_columns.empty()) throw InvalidArgument("plot needs at least one y column");
  std::vector<std::vector<double>> ys;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& col : spec.y_columns) {
    ys.push_back(table.numeric_column(col));
    for (const double v : ys.back()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (table.rows.empty()) lo = hi = 0.0;
  if (spec.kind == PlotKind::kBar) lo = std::min(lo, 0.0);
  const Range y = padded(lo, hi);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
      << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  axes(svg, spec, y);
  const std::size_t n = table.rows.size();
  const std::size_t xcol = table.column(spec.x_column);

  if (spec.kind == PlotKind::kLine) {
    const std::vector<double> xs = table.numeric_column(spec.x_column);
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    for (const double v : xs) {
      xlo = std::min(xlo, v);
      xhi = std::max(xhi, v);
    }
    const Range x = n ? padded(xlo, xhi) : Range{0.0, 1.0};
    for (int k = 0; k <= 4; ++k) {
      const double v = x.lo + (x.hi - x.lo) * k / 4.0;
      svg << "<text x='" << x.map(v, x0, x1) << "' y='" << y0 + 16 << "' font-size='11' text-anchor='middle'>"
          << num(v) << "</text>\n";
    }
    for (std::size_t s = 0; s < ys.size(); ++s) {
      svg << "<polyline fill='none' stroke='" << kColors[s % 6] << "' stroke-width='1.5' points='";
      for (std::size_t i = 0; i < n; ++i) {
        svg << (i ? " " : "") << num(x.map(xs[i], x0, x1)) << "," << num(y.map(ys[s][i], y0, y1));
      }
      svg << "'/>\n";
    }
  } else {
    const double slot = (x1 - x0) / static_cast<double>(std::max<std::size_t>(n, 1));
    const double bar = slot * 0.8 / static_cast<double>(ys.size());
    const double base = y.map(std::max(y.lo, 0.0), y0, y1);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = x0 + slot * static_cast<double>(i) + slot * 0.1;
      for (std::size_t s = 0; s < ys.size(); ++s) {
        const double top = y.map(ys[s][i], y0, y1);
        svg << "<rect x='" << num(left + bar * static_cast<double>(s)) << "' y='" << num(std::min(top, base))
            << "' width='" << num(bar) << "' height='" << num(std::abs(base - top)) << "' fill='"
            << kColors[s % 6] << "'/>\n";
      }
      svg << "<text x='" << num(left + slot * 0.4) << "' y='" << y0 + 16
          << "' font-size='11' text-anchor='middle'>" << escape(table.rows[i][xcol]) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string plots_to_manifest(const std::vector<PlotSpec>& plots) {
  std::string out;
  for (const auto& p : plots) {
    out += p.svg_name + "," + p.csv_name + "," + (p.kind == PlotKind::kLine ? "line" : "bar") + "," + p.x_column +
           "," + text::join(p.y_columns, ";") + "," + p.title + "\n";
  }
  return out;
}

std::vector<PlotSpec> parse_manifest(const std::string& contents) {
  std::vector<PlotSpec> out;
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != 6) throw ParseError("plot manifest rows need 6 fields", line_no);
    PlotSpec p;
    p.svg_name = cells[0];
    p.csv_name = cells[1];
    if (cells[2] == "line") p.kind = PlotKind::kLine;
    else if (cells[2] == "bar") p.kind = PlotKind::kBar;
    else throw ParseError("unknown plot kind '" + cells[2] + "'", line_no);
    p.x_column = cells[3];
    p.y_columns = text::split(cells[4], ';');
    p.title = cells[5];
    out.push_back(std::move(p));
  }
  return out;
}

void render_directory(const std::string& dir) {
  const std::filesystem::path root(dir);
  const auto manifest = root / "plots.manifest";
  if (!std::filesystem::exists(manifest)) return;
  for (const auto& spec : parse_manifest(text::read_file(manifest.string()))) {
    const CsvTable table = parse_csv_table(text::read_file((root / spec.csv_name).string()));
    text::write_file((root / spec.svg_name).string(), render_svg(table, spec));
  }
}

}  // namespace aggwind
