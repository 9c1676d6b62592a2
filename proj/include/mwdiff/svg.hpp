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

// Minimal self-contained SVG line/scatter plots for reports.

#include <string>
#include <vector>

#include <Eigen/Core>

namespace mwdiff {

struct PlotSeries {
  Eigen::ArrayXd x;
  Eigen::ArrayXd y;
  Eigen::ArrayXd y_error;  // empty for none
  std::string label;
  std::string color = "#1f77b4";
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 720;
  int height = 420;
};

std::string render_svg(const PlotSpec& spec);

}  // namespace mwdiff
