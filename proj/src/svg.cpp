#include "stripspec/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace stripspec::io {

namespace {

constexpr int kW = 800, kH = 420;
constexpr int kLeft = 70, kRight = 24, kTop = 38, kBottom = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& xlabel,
                           const std::vector<double>& x,
                           const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (double v : x) {
    if (!std::isfinite(v)) continue;
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  for (const Series& s : series)
    for (std::size_t j = 0; j < s.y.size() && j < x.size(); ++j) {
      if (!std::isfinite(s.y[j])) continue;
      ymin = std::min(ymin, s.y[j]);
      ymax = std::max(ymax, s.y[j]);
    }
  bool empty = !(xmin <= xmax) || !(ymin <= ymax);
  if (!empty && xmin == xmax) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!empty) {
    double pad = ymin == ymax ? 1.0 : 0.04 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  auto px = [&](double v) {
    return kLeft + (v - xmin) / (xmax - xmin) * (kW - kLeft - kRight);
  };
  auto py = [&](double v) {
    return kH - kBottom - (v - ymin) / (ymax - ymin) * (kH - kTop - kBottom);
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kW) +
         "\" height=\"" + std::to_string(kH) + "\" viewBox=\"0 0 " + std::to_string(kW) +
         " " + std::to_string(kH) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">" + escape(title) + "</text>\n";

  if (empty) {
    out += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"" + std::to_string(kH / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
           "no data</text>\n</svg>\n";
    return out;
  }

  // gridlines and tick labels
  for (int t = 0; t <= 5; ++t) {
    double xv = xmin + (xmax - xmin) * t / 5.0;
    double yv = ymin + (ymax - ymin) * t / 5.0;
    out += "<line x1=\"" + fmt2(px(xv)) + "\" y1=\"" + std::to_string(kTop) + "\" x2=\"" +
           fmt2(px(xv)) + "\" y2=\"" + std::to_string(kH - kBottom) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + fmt2(py(yv)) + "\" x2=\"" +
           std::to_string(kW - kRight) + "\" y2=\"" + fmt2(py(yv)) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + fmt2(px(xv)) + "\" y=\"" + std::to_string(kH - kBottom + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt_tick(xv) + "</text>\n";
    out += "<text x=\"" + std::to_string(kLeft - 8) + "\" y=\"" + fmt2(py(yv) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt_tick(yv) + "</text>\n";
  }
  out += "<rect x=\"" + std::to_string(kLeft) + "\" y=\"" + std::to_string(kTop) +
         "\" width=\"" + std::to_string(kW - kLeft - kRight) + "\" height=\"" +
         std::to_string(kH - kTop - kBottom) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"" + std::to_string(kH - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(xlabel) + "</text>\n";

  // nonfinite samples split a series into separate polyline segments
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 6];
    std::string pts;
    auto flush = [&] {
      if (pts.find(' ') != std::string::npos)
        out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
      pts.clear();
    };
    for (std::size_t j = 0; j < series[s].y.size() && j < x.size(); ++j) {
      double v = series[s].y[j];
      if (!std::isfinite(v) || !std::isfinite(x[j])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += fmt2(px(x[j])) + "," + fmt2(py(v));
    }
    flush();
    double ly = kTop + 16.0 + 16.0 * static_cast<double>(s);
    out += "<line x1=\"" + std::to_string(kW - kRight - 150) + "\" y1=\"" + fmt2(ly - 4) +
           "\" x2=\"" + std::to_string(kW - kRight - 126) + "\" y2=\"" + fmt2(ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + std::to_string(kW - kRight - 120) + "\" y=\"" + fmt2(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(series[s].label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace stripspec::io
