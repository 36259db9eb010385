#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mmm::svg {

/// Fixed two-decimal coordinates keep output byte-stable.
std::string coord(double v);
std::string escape(std::string_view text);

class Document {
 public:
  Document(double width, double height);

  double width() const { return width_; }
  double height() const { return height_; }

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none");
  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0,
            std::string_view dash = "");
  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, std::string_view stroke,
                double width = 1.5);
  void circle(double cx, double cy, double r, std::string_view fill);
  void text(double x, double y, std::string_view content, double size = 11.0, std::string_view anchor = "start",
            std::string_view weight = "normal");
  /// Embeds another document's body translated to (x, y).
  void embed(const Document& other, double x, double y);

  std::string body() const { return body_; }
  std::string str() const;

 private:
  double width_;
  double height_;
  std::string body_;
};

/// Linear map from a data interval onto a pixel interval.
struct Scale {
  double d0 = 0.0;
  double d1 = 1.0;
  double p0 = 0.0;
  double p1 = 1.0;

  double operator()(double v) const;
};

/// Pads a data range and widens degenerate ones.
std::pair<double, double> nice_range(double lo, double hi, bool include_zero = false);

/// Short number label: 3 significant digits, k/M/B suffixes.
std::string label(double v);

}  // namespace mmm::svg
