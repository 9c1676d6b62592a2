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

// Image-level data reduction: background removal, vertical binning and the
// band-by-band peak-width analysis.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mwdiff/comb_fit.hpp"
#include "mwdiff/image.hpp"
#include "mwdiff/trace.hpp"
#include "mwdiff/types.hpp"

namespace mwdiff {

using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Left and right column strips, each `fraction` of the width, full height.
MaskArray margin_column_mask(int height, int width, double fraction = 0.1);

struct BackgroundFit {
  // Same normalised-coordinate basis as BackgroundModel, absolute counts.
  std::array<double, 6> coefficients{};
  double masked_rms = 0.0;
  Eigen::Index masked_pixels = 0;
};

/// Least-squares quadratic surface fitted on the masked (signal-free) pixels
/// and subtracted; negative results are clamped to zero.
DetectorImage background_correct(const DetectorImage& image, const MaskArray& mask, BackgroundFit* fit = nullptr);
DetectorImage background_correct(const DetectorImage& image, double margin_fraction = 0.1,
                                 BackgroundFit* fit = nullptr);

/// Column sums over rows [row_lo, row_hi).
Trace1D vertical_bin(const DetectorImage& image, int row_lo, int row_hi);

struct BandAnalysisOptions {
  Molecule molecule;
  Grating grating;
  BeamlineGeometry geometry;
  int max_orders = 5;
  // Smoothing applied to the initialisation only; window 0 disables it.
  int sg_window = 0;
  int sg_degree = 2;
  // Fall back to the gravity-calibrated spacing when the autocorrelation
  // estimate is missing or disagrees by more than 25 %.
  bool gravity_fallback = true;
  // Bands are independent; results do not depend on the thread count.
  int threads = 1;
};

struct BandResult {
  int band = 0;
  int row_lo = 0;
  int row_hi = 0;
  double velocity = 0.0;          // from the fitted spacing
  double gravity_velocity = 0.0;  // from the detector calibration anchor, 0 if unreachable
  double spacing = 0.0;
  double spacing_uncertainty = 0.0;
  double width = 0.0;
  double width_uncertainty = 0.0;
  std::string init_source;        // "autocorrelation" or "gravity"
  // "high" when spacing and width are determined to 1 % and 5 %, else "low".
  std::string confidence;
  CombFit fit;
};

struct BandFailure {
  int band = 0;
  int row_lo = 0;
  int row_hi = 0;
  std::string reason;
};

struct PeakWidthSeries {
  std::vector<BandResult> entries;  // sorted by velocity
  std::vector<BandFailure> failures;
};

/// Fits one band; throws (InitializationError, ConvergenceError, ...) with the reason on failure.
BandResult analyze_band(const DetectorImage& image, int row_lo, int row_hi, const BandAnalysisOptions& options);

/// Splits the image into consecutive bands of `band_height_rows`, fits a comb
/// to each and converts the spacing into a velocity. Failed bands are kept
/// with their reason. Throws InsufficientDataError for fewer than 3 bands or
/// fewer than 2 successful fits.
PeakWidthSeries peak_width_vs_velocity(const DetectorImage& image, int band_height_rows,
                                       const BandAnalysisOptions& options);

}  // namespace mwdiff
