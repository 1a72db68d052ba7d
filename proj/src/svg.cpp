#include "epi/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace epi::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
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

struct Frame {
  double x0, x1, y0, y1;

  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

Frame padded(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& x_label,
          const std::string& y_label, bool x_ticks) {
  const double bx = kLeft, by = kHeight - kBottom;
  os << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << by
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << bx << "\" y1=\"" << kTop << "\" x2=\"" << bx << "\" y2=\"" << by
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = f.y0 + (f.y1 - f.y0) * k / 4.0;
    os << "<text x=\"" << bx - 6 << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">"
       << label_num(y) << "</text>\n";
    if (!x_ticks) continue;
    const double x = f.x0 + (f.x1 - f.x0) * k / 4.0;
    os << "<text x=\"" << num(f.px(x)) << "\" y=\"" << by + 18 << "\" text-anchor=\"middle\">"
       << label_num(x) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (kTop + kHeight - kBottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
}

}  // namespace

std::string band_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const analysis::SummaryTable& table,
                      const std::vector<Point>& observed) {
  std::ostringstream os;
  header(os, title);
  const auto& rows = table.rows;
  if (rows.empty()) {
    os << "</svg>\n";
    return os.str();
  }
  double x0 = rows.front().time, x1 = rows.back().time;
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& r : rows) {
    y0 = std::min(y0, r.i95.lo);
    y1 = std::max(y1, r.i95.hi);
  }
  for (const auto& p : observed) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const Frame f = padded(x0, x1, y0, y1);

  const analysis::Interval analysis::SummaryRow::*bands[] = {&analysis::SummaryRow::i95,
                                                             &analysis::SummaryRow::i80,
                                                             &analysis::SummaryRow::i50};
  const double opacity[] = {0.2, 0.3, 0.45};
  for (int b = 0; b < 3; ++b) {
    os << "<polygon fill=\"steelblue\" fill-opacity=\"" << opacity[b] << "\" points=\"";
    for (const auto& r : rows) os << num(f.px(r.time)) << ',' << num(f.py((r.*bands[b]).hi)) << ' ';
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
      os << num(f.px(it->time)) << ',' << num(f.py(((*it).*bands[b]).lo)) << ' ';
    }
    os << "\"/>\n";
  }
  os << "<polyline fill=\"none\" stroke=\"navy\" stroke-width=\"2\" points=\"";
  for (const auto& r : rows) os << num(f.px(r.time)) << ',' << num(f.py(r.median)) << ' ';
  os << "\"/>\n";
  for (const auto& p : observed) {
    os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y))
       << "\" r=\"3\" fill=\"black\"/>\n";
  }
  axes(os, f, x_label, y_label, true);
  os << "</svg>\n";
  return os.str();
}

std::string box_plot(const std::string& title, const std::string& y_label,
                     const std::vector<BoxGroup>& groups) {
  std::ostringstream os;
  header(os, title);
  double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& g : groups) {
    for (double v : g.values) {
      if (!std::isfinite(v)) continue;
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!std::isfinite(y0)) {
    y0 = 0.0;
    y1 = 1.0;
  }
  const Frame f = padded(0.0, static_cast<double>(std::max<std::size_t>(groups.size(), 1)), y0, y1);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    std::vector<double> v;
    for (double x : groups[i].values) {
      if (std::isfinite(x)) v.push_back(x);
    }
    const double cx = f.px(static_cast<double>(i) + 0.5);
    os << "<text x=\"" << num(cx) << "\" y=\"" << kHeight - kBottom + 18
       << "\" text-anchor=\"middle\">" << escape(groups[i].label) << "</text>\n";
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const double q1 = analysis::quantile_sorted(v, 0.25);
    const double q2 = analysis::quantile_sorted(v, 0.5);
    const double q3 = analysis::quantile_sorted(v, 0.75);
    const double iqr = q3 - q1;
    const auto lo_it = std::lower_bound(v.begin(), v.end(), q1 - 1.5 * iqr);
    const auto hi_it = std::upper_bound(v.begin(), v.end(), q3 + 1.5 * iqr);
    const double wlo = *lo_it;
    const double whi = *(hi_it - 1);
    const double half = 0.3 * (f.px(1.0) - f.px(0.0));
    os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(f.py(wlo)) << "\" x2=\"" << num(cx)
       << "\" y2=\"" << num(f.py(whi)) << "\" stroke=\"black\"/>\n";
    os << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(f.py(q3)) << "\" width=\""
       << num(2 * half) << "\" height=\"" << num(f.py(q1) - f.py(q3))
       << "\" fill=\"lightsteelblue\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(f.py(q2)) << "\" x2=\""
       << num(cx + half) << "\" y2=\"" << num(f.py(q2)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (auto it = v.begin(); it != lo_it; ++it) {
      os << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(f.py(*it)) << "\" r=\"2\"/>\n";
    }
    for (auto it = hi_it; it != v.end(); ++it) {
      os << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(f.py(*it)) << "\" r=\"2\"/>\n";
    }
  }
  axes(os, f, "", y_label, false);
  os << "</svg>\n";
  return os.str();
}

}  // namespace epi::svg
