#include "exo/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <cstdio>

namespace exo {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 480;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string esc(const std::string& s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

}  // namespace

std::string render_fronts_svg(const std::vector<ScatterSeries>& series, const std::string& title) {
  Range rx, ry;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      rx.add(p.reduction_pct);
      ry.add(p.power_w_kg);
    }
  }
  rx.pad();
  ry.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto sy = [&](double v) { return kTop + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title)
    << "</text>\n";
  o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double vx = rx.lo + (rx.hi - rx.lo) * k / 5;
    const double vy = ry.lo + (ry.hi - ry.lo) * k / 5;
    o << "<text x=\"" << num(sx(vx)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
      << num(vx) << "</text>\n";
    o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(vy) + 4) << "\" text-anchor=\"end\">" << num(vy)
      << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 18)
    << "\" text-anchor=\"middle\">metabolic reduction (%)</text>\n";
  o << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << num(kTop + ph / 2) << ")\">absolute power (W/kg)</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    std::vector<DesignPoint> pts = s.points;
    std::sort(pts.begin(), pts.end(), [](const DesignPoint& a, const DesignPoint& b) {
      return a.power_w_kg != b.power_w_kg ? a.power_w_kg < b.power_w_kg : a.label < b.label;
    });
    if (s.connect && pts.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        o << (i ? " " : "") << num(sx(pts[i].reduction_pct)) << "," << num(sy(pts[i].power_w_kg));
      }
      o << "\"/>\n";
    }
    for (const auto& p : pts) {
      o << "<circle cx=\"" << num(sx(p.reduction_pct)) << "\" cy=\"" << num(sy(p.power_w_kg)) << "\" r=\"3\" fill=\""
        << color << "\"/>\n";
      o << "<text x=\"" << num(sx(p.reduction_pct) + 4) << "\" y=\"" << num(sy(p.power_w_kg) - 4) << "\" fill=\""
        << color << "\">" << esc(p.label) << "</text>\n";
    }
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    o << "<rect x=\"" << num(kWidth - kRight + 14) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
      << color << "\"/>\n";
    o << "<text x=\"" << num(kWidth - kRight + 30) << "\" y=\"" << num(ly) << "\">" << esc(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace exo
