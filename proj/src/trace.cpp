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

#include "mwdiff/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "mwdiff/errors.hpp"

namespace mwdiff {

double Trace1D::step() const {
  if (positions.size() < 2) throw DomainError("trace needs at least two samples");
  return (positions[positions.size() - 1] - positions[0]) / static_cast<double>(positions.size() - 1);
}

void Trace1D::validate() const {
  if (positions.size() != intensities.size()) throw DomainError("trace columns differ in length");
  if (positions.size() < 2) throw DomainError("trace needs at least two samples");
  if (!positions.allFinite() || !intensities.allFinite()) throw DomainError("trace contains non-finite values");
  const double h = step();
  if (!(h > 0)) throw DomainError("trace positions must be strictly increasing");
  for (Eigen::Index i = 1; i < positions.size(); ++i) {
    const double gap = positions[i] - positions[i - 1];
    if (!(gap > 0)) throw DomainError("trace positions must be strictly increasing");
    const double expected = positions[0] + h * static_cast<double>(i);
    const double scale = std::max(std::abs(positions[0]), std::abs(positions[positions.size() - 1]));
    if (std::abs(positions[i] - expected) > 1e-12 * std::max(scale, h * static_cast<double>(positions.size())))
      throw DomainError("trace positions must be uniformly spaced");
  }
}

Trace1D make_trace(const Eigen::ArrayXd& positions, const Eigen::ArrayXd& intensities) {
  Trace1D t;
  t.positions = positions;
  t.intensities = intensities;
  t.validate();
  return t;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const Trace1D& trace) {
  for (const auto& [key, value] : trace.metadata) out << "# " << key << " = " << value << '\n';
  out << "# row_lo = " << trace.row_lo << '\n' << "# row_hi = " << trace.row_hi << '\n';
  out << "position_m,intensity\n";
  for (Eigen::Index i = 0; i < trace.size(); ++i)
    out << format_double(trace.positions[i]) << ',' << format_double(trace.intensities[i]) << '\n';
}

namespace {

bool parse_double(std::string_view text, double& value) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Trace1D read_trace_csv(std::istream& in) {
  Trace1D trace;
  std::vector<double> xs, ys;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text[0] == '#') {
      const auto eq = text.find('=');
      if (eq == std::string::npos) continue;
      const auto key = trim(text.substr(1, eq - 1));
      const auto value = trim(text.substr(eq + 1));
      double number = 0;
      if (key == "row_lo" || key == "row_hi") {
        if (!parse_double(value, number)) throw FormatError("row bound must be numeric", line_no);
        (key == "row_lo" ? trace.row_lo : trace.row_hi) = static_cast<int>(number);
      } else
        trace.metadata[key] = value;
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw FormatError("expected two comma-separated columns", line_no);
    double x = 0, y = 0;
    if (!parse_double(std::string_view(text).substr(0, comma), x) ||
        !parse_double(std::string_view(text).substr(comma + 1), y)) {
      if (!header_seen && xs.empty()) {
        header_seen = true;
        continue;
      }
      throw FormatError("non-numeric trace value", line_no);
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  trace.positions = Eigen::Map<const Eigen::ArrayXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  trace.intensities = Eigen::Map<const Eigen::ArrayXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  try {
    trace.validate();
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid trace: ") + e.what());
  }
  return trace;
}

void save_trace_csv(const std::string& path, const Trace1D& trace) {
  std::ostringstream buf;
  write_trace_csv(buf, trace);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << buf.str();
}

Trace1D load_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_trace_csv(in);
}

}  // namespace mwdiff
