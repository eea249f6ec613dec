#include "svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace npglab::cli {

namespace {

constexpr double kWidth = 880.0;
constexpr double kHeight = 560.0;
constexpr double kLeft = 80.0;
constexpr double kRight = kWidth - 190.0;  // room for the legend
constexpr double kTop = 50.0;
constexpr double kBottom = kHeight - 70.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string pow10_label(int e) {
  if (e == 0) return "1";
  std::ostringstream os;
  os << "1e" << e;
  return os.str();
}

}  // namespace

std::string render_log_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<ChartSeries>& series,
                                  double y_floor) {
  if (series.empty()) throw std::invalid_argument("chart needs at least one series");
  double x_min = 0.0, x_max = 1.0;
  double ly_min = 0.0, ly_max = -300.0;
  bool any = false;
  for (const ChartSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      const double ly = std::log10(std::max(y, y_floor));
      if (!any) {
        x_min = x_max = x;
        ly_min = ly_max = ly;
        any = true;
      } else {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
        ly_min = std::min(ly_min, ly);
        ly_max = std::max(ly_max, ly);
      }
    }
  }
  if (!any) throw std::invalid_argument("chart series contain no points");
  if (x_max == x_min) x_max = x_min + 1.0;
  int e_lo = static_cast<int>(std::floor(ly_min));
  int e_hi = static_cast<int>(std::ceil(ly_max));
  if (e_hi == e_lo) ++e_hi;

  const auto sx = [&](double x) {
    return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft);
  };
  const auto sy = [&](double ly) {
    return kBottom - (ly - e_lo) / (e_hi - e_lo) * (kBottom - kTop);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
     << "\">\n";
  os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << (kLeft + kRight) / 2.0 << "\" y=\"28\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"17\">"
     << escape(title) << "</text>\n";

  // Gridlines and y decade ticks.
  const int decades = e_hi - e_lo;
  const int stride = std::max(1, (decades + 9) / 10);
  for (int e = e_lo; e <= e_hi; e += stride) {
    const double y = sy(e);
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" x2=\"" << kRight
       << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
       << pow10_label(e) << "</text>\n";
  }
  // x ticks: at most 11 integer-ish positions.
  const double span = x_max - x_min;
  double step = std::ceil(span / 10.0);
  if (step <= 0.0) step = 1.0;
  for (double x = x_min; x <= x_max + 1e-9; x += step) {
    const double px = sx(x);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << kBottom << "\" x2=\"" << fmt(px)
       << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    char label[32];
    std::snprintf(label, sizeof(label), "%g", x);
    os << "<text x=\"" << fmt(px) << "\" y=\"" << kBottom + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
       << label << "</text>\n";
  }

  // Axes.
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
     << "\" y2=\"" << kBottom << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
     << "\" y2=\"" << kBottom << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  os << "<text x=\"" << (kLeft + kRight) / 2.0 << "\" y=\"" << kHeight - 22
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << escape(x_label) << "</text>\n";
  os << "<text x=\"24\" y=\"" << (kTop + kBottom) / 2.0
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
        "transform=\"rotate(-90 24 "
     << (kTop + kBottom) / 2.0 << ")\">" << escape(y_label) << "</text>\n";

  // Series.
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : series[i].points) {
      os << fmt(sx(x)) << ',' << fmt(sy(std::log10(std::max(y, y_floor)))) << ' ';
    }
    os << "\"/>\n";
  }

  // Legend.
  const double lx = kRight + 16.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const double y = kTop + 12.0 + 22.0 * static_cast<double>(i);
    os << "<line x1=\"" << lx << "\" y1=\"" << fmt(y) << "\" x2=\"" << lx + 26
       << "\" y2=\"" << fmt(y) << "\" stroke=\"" << color
       << "\" stroke-width=\"2.5\"/>\n";
    os << "<text x=\"" << lx + 32 << "\" y=\"" << fmt(y + 4)
       << "\" font-family=\"sans-serif\" font-size=\"13\">" << escape(series[i].label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace npglab::cli
