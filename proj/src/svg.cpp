/* Copyright 2026 The mwdiff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mwdiff/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mwdiff/errors.hpp"

namespace mwdiff {
namespace {

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

// 1-2-5 tick step giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw DomainError("plot series x and y differ in length");
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i))) continue;
      const double e = s.y_error.size() == s.y.size() ? std::abs(s.y_error(i)) : 0.0;
      x0 = std::min(x0, s.x(i));
      x1 = std::max(x1, s.x(i));
      y0 = std::min(y0, s.y(i) - e);
      y1 = std::max(y1, s.y(i) + e);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 80, right = 20, top = 40, bottom = 60;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = nice_step(x1 - x0, 6), ys = nice_step(y1 - y0, 5);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs)
    o << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/><text x=\"" << px(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << fmt(std::abs(t) < 1e-12 * xs ? 0.0 : t) << "</text>\n";
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys)
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
      << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
      << fmt(std::abs(t) < 1e-12 * ys ? 0.0 : t) << "</text>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << spec.height - 15 << "\" text-anchor=\"middle\">"
    << escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.y_label) << "</text>\n";

  int legend_row = 0;
  for (const auto& s : spec.series) {
    if (!s.markers) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\" points=\"";
      for (Eigen::Index i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x(i)) && std::isfinite(s.y(i))) o << px(s.x(i)) << ',' << py(s.y(i)) << ' ';
      o << "\"/>\n";
    } else {
      for (Eigen::Index i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i))) continue;
        if (s.y_error.size() == s.y.size())
          o << "<line x1=\"" << px(s.x(i)) << "\" y1=\"" << py(s.y(i) - s.y_error(i)) << "\" x2=\"" << px(s.x(i))
            << "\" y2=\"" << py(s.y(i) + s.y_error(i)) << "\" stroke=\"" << s.color << "\"/>\n";
        o << "<circle cx=\"" << px(s.x(i)) << "\" cy=\"" << py(s.y(i)) << "\" r=\"3\" fill=\"" << s.color
          << "\"/>\n";
      }
    }
    if (!s.label.empty()) {
      const double ly = top + 14 + 16 * legend_row++;
      o << "<rect x=\"" << left + pw - 150 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
        << s.color << "\"/><text x=\"" << left + pw - 135 << "\" y=\"" << ly << "\">" << escape(s.label)
        << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace mwdiff
