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

#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include <Eigen/Core>

namespace mwdiff {

/// Uniformly sampled 1D profile. Positions in metres.
struct Trace1D {
  Eigen::ArrayXd positions;
  Eigen::ArrayXd intensities;
  int row_lo = 0;
  int row_hi = 0;
  std::map<std::string, std::string> metadata;

  Eigen::Index size() const { return positions.size(); }
  double step() const;
  /// Throws DomainError unless positions are strictly increasing and uniform to 1e-12 relative.
  void validate() const;
};

Trace1D make_trace(const Eigen::ArrayXd& positions, const Eigen::ArrayXd& intensities);

/// Two-column CSV (position_m,intensity) preceded by "# key = value" metadata lines.
void write_trace_csv(std::ostream& out, const Trace1D& trace);
Trace1D read_trace_csv(std::istream& in);
void save_trace_csv(const std::string& path, const Trace1D& trace);
Trace1D load_trace_csv(const std::string& path);

/// Shortest round-trip decimal representation for reports.
std::string format_double(double value);

}  // namespace mwdiff
