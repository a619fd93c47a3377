#include "fdopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fdopt {

SvgLayout profile_layout(const Profile& profile) {
  SvgLayout layout;
  const std::size_t n = profile.size();
  const double plot_w = layout.width - 2.0 * layout.margin;
  const double plot_h = layout.height - 2.0 * layout.margin;

  std::vector<double> values(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::clamp(profile.ratios[i], -kPlotCap, kPlotCap);
    // Failures sit on the cap on the side of the failing method.
    if (profile.failed_a[i] && !profile.failed_b[i]) v = kPlotCap;
    if (profile.failed_b[i] && !profile.failed_a[i]) v = -kPlotCap;
    values[i] = v;
    peak = std::max(peak, std::abs(v));
  }
  layout.y_max = std::max(1.0, std::ceil(peak));
  layout.zero_y = layout.margin + plot_h / 2.0;
  const double scale = (plot_h / 2.0) / layout.y_max;
  const double w = n ? plot_w / static_cast<double>(n) : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    SvgLayout::Bar bar;
    bar.value = values[i];
    bar.failed = profile.failed(i);
    bar.x = layout.margin + static_cast<double>(i) * w;
    bar.w = w;
    bar.h = std::abs(values[i]) * scale;
    bar.y = values[i] >= 0.0 ? layout.zero_y - bar.h : layout.zero_y;
    layout.bars.push_back(bar);
  }
  return layout;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string profile_svg(const Profile& profile, const std::string& title) {
  const SvgLayout L = profile_layout(profile);
  const double right = L.width - L.margin;
  const double bottom = L.height - L.margin;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(L.width) + "\" height=\"" + num(L.height) +
       "\" viewBox=\"0 0 " + num(L.width) + " " + num(L.height) + "\">\n";
  s += "<rect class=\"frame\" x=\"" + num(L.margin) + "\" y=\"" + num(L.margin) + "\" width=\"" +
       num(right - L.margin) + "\" height=\"" + num(bottom - L.margin) + "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!title.empty())
    s += "<text x=\"" + num(L.width / 2.0) + "\" y=\"" + num(L.margin / 2.0) + "\" text-anchor=\"middle\">" +
         escape(title) + "</text>\n";
  for (double tick : {L.y_max, 0.0, -L.y_max}) {
    const double y = L.zero_y - tick * ((bottom - L.margin) / 2.0) / L.y_max;
    s += "<text class=\"tick\" x=\"" + num(L.margin - 6.0) + "\" y=\"" + num(y) + "\" text-anchor=\"end\">" +
         num(tick) + "</text>\n";
  }
  for (const auto& b : L.bars) {
    const char* fill = b.value >= 0.0 ? "#4c72b0" : "#dd8452";
    s += "<rect class=\"bar\" x=\"" + num(b.x) + "\" y=\"" + num(b.y) + "\" width=\"" + num(b.w) + "\" height=\"" +
         num(b.h) + "\" fill=\"" + fill + "\" fill-opacity=\"0.6\"/>\n";
  }
  if (!L.bars.empty()) {
    s += "<polyline class=\"profile\" fill=\"none\" stroke=\"black\" points=\"";
    for (const auto& b : L.bars) {
      const double top = b.value >= 0.0 ? b.y : b.y + b.h;
      s += num(b.x) + "," + num(top) + " " + num(b.x + b.w) + "," + num(top) + " ";
    }
    s.pop_back();
    s += "\"/>\n";
  }
  for (const auto& b : L.bars) {
    if (!b.failed) continue;
    const double cy = b.value >= 0.0 ? b.y : b.y + b.h;
    s += "<circle class=\"failure\" cx=\"" + num(b.x + b.w / 2.0) + "\" cy=\"" + num(cy) +
         "\" r=\"3\" fill=\"red\"/>\n";
  }
  s += "<line class=\"zero\" x1=\"" + num(L.margin) + "\" y1=\"" + num(L.zero_y) + "\" x2=\"" + num(right) +
       "\" y2=\"" + num(L.zero_y) + "\" stroke=\"black\"/>\n";
  s += "</svg>\n";
  return s;
}

void emit_profile_svg(const Profile& profile, const std::string& path, const std::string& title) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << profile_svg(profile, title);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace fdopt
