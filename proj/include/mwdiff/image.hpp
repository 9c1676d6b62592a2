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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include <Eigen/Core>

namespace mwdiff {

/// Row-major pixel grid: (row, column), row 0 at the top of the detector.
using ImageArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DetectorConfig {
  double pixel_pitch_um = 0.5;
  int width_px = 600;
  int height_px = 600;
  // Calibration anchor: molecules arriving on this row travel at this velocity.
  int reference_row = 0;
  double reference_velocity = 360.0;
  double exposure_scale = 200.0;  // expected signal counts at the brightest pixel

  double pitch_m() const { return pixel_pitch_um * 1e-6; }
  /// Horizontal screen coordinate of a column centre, 0 at the image centre.
  double column_position(int column) const;
  /// Extra gravitational drop of a row relative to the reference row.
  double row_offset(int row) const;
  Eigen::ArrayXd column_positions() const;
  void validate() const;
};

struct DetectorImage {
  ImageArray pixels;
  DetectorConfig config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> provenance;

  void validate() const;
};

/// 16-bit PGM. Values are rounded to the nearest integer; anything outside
/// [0, 65535] is rejected rather than clipped.
void write_pgm(std::ostream& out, const ImageArray& pixels, bool plain = false);
ImageArray read_pgm(std::istream& in);
void save_pgm(const std::string& path, const ImageArray& pixels, bool plain = false);
ImageArray load_pgm(const std::string& path);

}  // namespace mwdiff
