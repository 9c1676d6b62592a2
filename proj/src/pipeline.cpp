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

#include "mwdiff/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <Eigen/Dense>

#include "mwdiff/errors.hpp"
#include "mwdiff/kinematics.hpp"
#include "mwdiff/savitzky_golay.hpp"

namespace mwdiff {
namespace {

constexpr double kMaxSpacingRelUncertainty = 0.05;
constexpr double kMaxWidthRelUncertainty = 0.20;

double normalised(int index, int count) { return count > 1 ? -1.0 + 2.0 * index / (count - 1) : 0.0; }

Eigen::Matrix<double, 1, 6> basis_row(double nx, double ny) {
  Eigen::Matrix<double, 1, 6> b;
  b << 1.0, nx, ny, nx * nx, nx * ny, ny * ny;
  return b;
}

}  // namespace

MaskArray margin_column_mask(int height, int width, double fraction) {
  if (height <= 0 || width <= 0) throw DomainError("mask dimensions must be positive");
  if (!(fraction > 0 && fraction < 0.5)) throw DomainError("margin fraction must lie in (0, 0.5)");
  MaskArray mask = MaskArray::Constant(height, width, false);
  const int strip = static_cast<int>(std::floor(fraction * width));
  if (strip > 0) {
    mask.leftCols(strip).setConstant(true);
    mask.rightCols(strip).setConstant(true);
  }
  return mask;
}

DetectorImage background_correct(const DetectorImage& image, const MaskArray& mask, BackgroundFit* fit) {
  image.validate();
  const auto rows = image.pixels.rows();
  const auto cols = image.pixels.cols();
  if (mask.rows() != rows || mask.cols() != cols) throw DomainError("mask shape does not match the image");

  const Eigen::Index n = mask.count();
  if (n < 60) throw InsufficientDataError("background mask holds too few pixels for a quadratic surface");

  Eigen::MatrixXd a(n, 6);
  Eigen::VectorXd b(n);
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double ny = normalised(static_cast<int>(r), static_cast<int>(rows));
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!mask(r, c)) continue;
      a.row(k) = basis_row(normalised(static_cast<int>(c), static_cast<int>(cols)), ny);
      b(k) = image.pixels(r, c);
      ++k;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 6) throw InsufficientDataError("background mask does not constrain a quadratic surface");
  const Eigen::VectorXd coeffs = qr.solve(b);

  DetectorImage out = image;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double ny = normalised(static_cast<int>(r), static_cast<int>(rows));
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double bg = basis_row(normalised(static_cast<int>(c), static_cast<int>(cols)), ny) * coeffs;
      out.pixels(r, c) = std::max(0.0, image.pixels(r, c) - bg);
    }
  }
  out.provenance["background"] = "quadratic surface, " + std::to_string(n) + " masked pixels";

  if (fit) {
    for (int i = 0; i < 6; ++i) fit->coefficients[static_cast<std::size_t>(i)] = coeffs(i);
    fit->masked_rms = std::sqrt((a * coeffs - b).squaredNorm() / static_cast<double>(n));
    fit->masked_pixels = n;
  }
  return out;
}

DetectorImage background_correct(const DetectorImage& image, double margin_fraction, BackgroundFit* fit) {
  return background_correct(
      image,
      margin_column_mask(static_cast<int>(image.pixels.rows()), static_cast<int>(image.pixels.cols()),
                         margin_fraction),
      fit);
}

Trace1D vertical_bin(const DetectorImage& image, int row_lo, int row_hi) {
  if (row_lo < 0 || row_hi > image.pixels.rows() || row_lo >= row_hi)
    throw DomainError("row range must satisfy 0 <= lo < hi <= height");
  if (image.pixels.cols() != image.config.width_px)
    throw DomainError("image width does not match the detector configuration");
  // Summed top to bottom in a fixed order so the result is reproducible bit for bit.
  Eigen::ArrayXd sums = Eigen::ArrayXd::Zero(image.pixels.cols());
  for (int r = row_lo; r < row_hi; ++r) sums += image.pixels.row(r).transpose();
  Trace1D trace = make_trace(image.config.column_positions(), sums);
  trace.row_lo = row_lo;
  trace.row_hi = row_hi;
  trace.metadata["rows"] = std::to_string(row_lo) + ".." + std::to_string(row_hi - 1);
  return trace;
}

BandResult analyze_band(const DetectorImage& image, int row_lo, int row_hi, const BandAnalysisOptions& options) {
  options.molecule.validate();
  options.grating.validate();
  options.geometry.validate();
  if (options.max_orders < 1) throw DomainError("max_orders must be at least 1");

  const Trace1D trace = vertical_bin(image, row_lo, row_hi);
  const Trace1D init_trace =
      options.sg_window > 0 ? savitzky_golay(trace, options.sg_window, options.sg_degree) : trace;

  BandResult result;
  result.row_lo = row_lo;
  result.row_hi = row_hi;

  std::optional<double> gravity_spacing;
  try {
    const double centre_row = 0.5 * (row_lo + row_hi - 1);
    const double y = (centre_row - image.config.reference_row) * image.config.pitch_m();
    result.gravity_velocity =
        velocity_from_vertical_position(y, image.config.reference_velocity, options.geometry);
    gravity_spacing = diffraction_order_position(1, de_broglie_wavelength(options.molecule, result.gravity_velocity),
                                                 options.grating, options.geometry);
  } catch (const DomainError&) {
    result.gravity_velocity = 0.0;
  }

  const std::vector<double> probe_orders = symmetric_orders(1);
  CombFit probe;
  result.init_source = "autocorrelation";
  try {
    probe = initial_comb_guess(init_trace, probe_orders);
    if (options.gravity_fallback && gravity_spacing &&
        std::abs(probe.spacing / *gravity_spacing - 1.0) > 0.25) {
      probe = initial_comb_guess(init_trace, probe_orders, gravity_spacing);
      result.init_source = "gravity";
    }
  } catch (const InitializationError&) {
    if (!options.gravity_fallback || !gravity_spacing) throw;
    probe = initial_comb_guess(init_trace, probe_orders, gravity_spacing);
    result.init_source = "gravity";
  }

  // As many orders as fit inside the trace on both sides of the centre.
  const double x_min = trace.positions(0);
  const double x_max = trace.positions(trace.size() - 1);
  const double room = std::min(x_max - probe.center_offset, probe.center_offset - x_min);
  const int n_orders = std::min(options.max_orders, static_cast<int>(std::floor(room / probe.spacing - 0.25)));
  if (n_orders < 1) throw InitializationError("fewer than three diffraction orders fit inside the trace");

  const std::vector<double> orders = symmetric_orders(n_orders);
  const CombFit guess = initial_comb_guess(init_trace, orders, probe.spacing);
  CombFit fit = fit_gaussian_comb(trace, orders, guess);

  if (fit.status != LmStatus::Converged) throw ConvergenceError("comb fit " + to_string(fit.status) + ": " + fit.message);
  const double spacing_rel = fit.spacing_uncertainty / fit.spacing;
  const double width_rel = fit.width_uncertainty / fit.width;
  if (!(spacing_rel < kMaxSpacingRelUncertainty))
    throw ConvergenceError("spacing poorly determined (relative uncertainty " + format_double(spacing_rel) + ")");
  if (!(width_rel < kMaxWidthRelUncertainty))
    throw ConvergenceError("width poorly determined (relative uncertainty " + format_double(width_rel) + ")");

  result.velocity = velocity_from_peak_spacing(fit.spacing, options.molecule, options.grating, options.geometry);
  result.spacing = fit.spacing;
  result.spacing_uncertainty = fit.spacing_uncertainty;
  result.width = fit.width;
  result.width_uncertainty = fit.width_uncertainty;
  result.confidence = spacing_rel < 0.01 && width_rel < 0.05 ? "high" : "low";
  result.fit = std::move(fit);
  return result;
}

PeakWidthSeries peak_width_vs_velocity(const DetectorImage& image, int band_height_rows,
                                       const BandAnalysisOptions& options) {
  image.validate();
  if (band_height_rows < 1) throw DomainError("band height must be at least one row");
  const int height = static_cast<int>(image.pixels.rows());
  const int n_bands = height / band_height_rows;
  if (n_bands < 3) throw InsufficientDataError("image rows cover fewer than 3 bands");

  struct Outcome {
    std::optional<BandResult> result;
    std::string error;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(n_bands));
  const auto run = [&](int band) {
    const int lo = band * band_height_rows;
    auto& slot = outcomes[static_cast<std::size_t>(band)];
    try {
      slot.result = analyze_band(image, lo, lo + band_height_rows, options);
      slot.result->band = band;
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  };

  const int threads = std::clamp(options.threads, 1, n_bands);
  if (threads == 1) {
    for (int b = 0; b < n_bands; ++b) run(b);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int b = t; b < n_bands; b += threads) run(b);
      });
    for (auto& th : pool) th.join();
  }

  PeakWidthSeries series;
  for (int b = 0; b < n_bands; ++b) {
    auto& slot = outcomes[static_cast<std::size_t>(b)];
    if (slot.result) {
      series.entries.push_back(std::move(*slot.result));
    } else {
      const int lo = b * band_height_rows;
      series.failures.push_back({b, lo, lo + band_height_rows, slot.error});
    }
  }
  if (series.entries.size() < 2) {
    std::string why = "only " + std::to_string(series.entries.size()) + " of " + std::to_string(n_bands) +
                      " bands produced a usable fit";
    if (!series.failures.empty())
      why += " (band " + std::to_string(series.failures.front().band) + " skipped: " + series.failures.front().reason + ")";
    throw InsufficientDataError(why);
  }
  std::stable_sort(series.entries.begin(), series.entries.end(),
                   [](const BandResult& a, const BandResult& b) { return a.velocity < b.velocity; });
  return series;
}

}  // namespace mwdiff
