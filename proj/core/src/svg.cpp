#include "mmm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mmm::svg {

std::string coord(double v) {
  if (!std::isfinite(v)) v = 0.0;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
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

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke) {
  if (w < 0.0) {
    x += w;
    w = -w;
  }
  if (h < 0.0) {
    y += h;
    h = -h;
  }
  body_ += "<rect x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" width=\"" + coord(w) + "\" height=\"" + coord(h) +
           "\" fill=\"" + std::string(fill) + "\" stroke=\"" + std::string(stroke) + "\"/>\n";
}

void Document::line(double x1, double y1, double x2, double y2, std::string_view stroke, double width,
                    std::string_view dash) {
  body_ += "<line x1=\"" + coord(x1) + "\" y1=\"" + coord(y1) + "\" x2=\"" + coord(x2) + "\" y2=\"" + coord(y2) +
           "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + coord(width) + "\"";
  if (!dash.empty()) body_ += " stroke-dasharray=\"" + std::string(dash) + "\"";
  body_ += "/>\n";
}

void Document::polyline(const std::vector<double>& xs, const std::vector<double>& ys, std::string_view stroke,
                        double width) {
  body_ += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + coord(width) +
           "\" points=\"";
  for (std::size_t i = 0; i < std::min(xs.size(), ys.size()); ++i) {
    if (i) body_ += ' ';
    body_ += coord(xs[i]) + "," + coord(ys[i]);
  }
  body_ += "\"/>\n";
}

void Document::circle(double cx, double cy, double r, std::string_view fill) {
  body_ += "<circle cx=\"" + coord(cx) + "\" cy=\"" + coord(cy) + "\" r=\"" + coord(r) + "\" fill=\"" +
           std::string(fill) + "\"/>\n";
}

void Document::text(double x, double y, std::string_view content, double size, std::string_view anchor,
                    std::string_view weight) {
  body_ += "<text x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" font-size=\"" + coord(size) +
           "\" text-anchor=\"" + std::string(anchor) + "\" font-weight=\"" + std::string(weight) + "\">" +
           escape(content) + "</text>\n";
}

void Document::embed(const Document& other, double x, double y) {
  body_ += "<g transform=\"translate(" + coord(x) + "," + coord(y) + ")\">\n";
  body_ += "<rect x=\"0.00\" y=\"0.00\" width=\"" + coord(other.width_) + "\" height=\"" + coord(other.height_) +
           "\" fill=\"white\" stroke=\"#cccccc\"/>\n";
  body_ += other.body_;
  body_ += "</g>\n";
}

std::string Document::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(width_) + "\" height=\"" + coord(height_) +
         "\" viewBox=\"0 0 " + coord(width_) + " " + coord(height_) +
         "\" font-family=\"DejaVu Sans, Arial, sans-serif\">\n<rect x=\"0.00\" y=\"0.00\" width=\"" + coord(width_) +
         "\" height=\"" + coord(height_) + "\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

double Scale::operator()(double v) const {
  if (d1 == d0) return 0.5 * (p0 + p1);
  return p0 + (v - d0) / (d1 - d0) * (p1 - p0);
}

std::pair<double, double> nice_range(double lo, double hi, bool include_zero) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (include_zero) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  if (hi <= lo) {
    const double pad = std::max(1.0, std::abs(lo) * 0.1);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {include_zero && lo == 0.0 ? 0.0 : lo - pad, include_zero && hi == 0.0 ? 0.0 : hi + pad};
}

std::string label(double v) {
  if (!std::isfinite(v)) return "NA";
  const double a = std::abs(v);
  const char* suffix = "";
  double x = v;
  if (a >= 1e9) {
    x = v / 1e9;
    suffix = "B";
  } else if (a >= 1e6) {
    x = v / 1e6;
    suffix = "M";
  } else if (a >= 1e3) {
    x = v / 1e3;
    suffix = "k";
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3g%s", x, suffix);
  return buf;
}

}  // namespace mmm::svg
