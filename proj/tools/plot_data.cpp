#include "plot_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace plot {

namespace {

std::string num(double v, const char* fmt = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string escape(const std::string& s, bool comment = false) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '-':
        // "--" is not allowed inside XML comments.
        out += (comment && !out.empty() && out.back() == '-') ? " -" : "-";
        break;
      default: out += c;
    }
  }
  return out;
}

std::ofstream open(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::string& comment, const std::vector<Column>& columns) {
  if (columns.empty()) throw std::invalid_argument("write_csv: no columns");
  const std::size_t rows = columns.front().values.size();
  for (const auto& c : columns) {
    if (c.values.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  }
  std::ofstream out = open(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j].name;
  out << "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << num(columns[j].values[i]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_svg(const std::string& path, const std::string& comment, const std::string& title,
               const std::string& xlabel, const std::string& ylabel, const std::vector<Series>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 >= x0) || !(y1 >= y0)) throw std::invalid_argument("write_svg: no finite data");
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ofstream out = open(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) out << "<!-- " << escape(comment, true) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    out << "<text x=\"" << num(px(xv), "%.1f") << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << num(xv, "%.4g") << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4, "%.1f") << "\" text-anchor=\"end\">"
        << num(yv, "%.4g") << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << escape(xlabel)
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << escape(ylabel) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = colours[k % 5];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << num(px(s.x[i]), "%.2f") << "," << num(py(s.y[i]), "%.2f") << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 14 * k << "\" fill=\"" << colour << "\">"
        << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace plot
