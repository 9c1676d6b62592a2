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

// Equally spaced Gaussian comb:
//   y(x) = y0 + sum_i A_i exp(-2 (x - x0 - i d)^2 / w^2)
// with a shared width w and free amplitudes.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mwdiff/levenberg_marquardt.hpp"
#include "mwdiff/trace.hpp"

namespace mwdiff {

/// Parameters: (y0, x0, d, w, A_0 .. A_{K-1}) for the given order indices.
class GaussianCombModel final : public CurveModel {
 public:
  explicit GaussianCombModel(std::vector<double> orders) : orders_(std::move(orders)) {}

  Eigen::Index n_params() const override { return 4 + static_cast<Eigen::Index>(orders_.size()); }
  std::string name() const override { return "gaussian-comb"; }
  Eigen::ArrayXd evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;
  const std::vector<double>& orders() const { return orders_; }

 private:
  std::vector<double> orders_;
};

/// Order indices -n..n.
std::vector<double> symmetric_orders(int n_orders);
/// `count` indices centred on zero (half-integers for even counts).
std::vector<double> centred_orders(int count);

struct CombFit {
  std::vector<double> orders;
  double y0 = 0.0;
  double center_offset = 0.0;  // m
  double spacing = 0.0;        // m, screen-space period
  double width = 0.0;          // m, exp(-2 x^2 / w^2) convention
  Eigen::VectorXd amplitudes;

  double y0_uncertainty = 0.0;
  double center_uncertainty = 0.0;
  double spacing_uncertainty = 0.0;
  double width_uncertainty = 0.0;
  Eigen::VectorXd amplitude_uncertainties;
  Eigen::MatrixXd covariance;

  double residual_rms = 0.0;
  int iterations = 0;
  LmStatus status = LmStatus::MaxIterations;
  std::string message;

  Eigen::VectorXd params() const;
  double fwhm() const;
  /// sum |A_i - A_-i| / sum (A_i + A_-i) over mirrored order pairs; 0 for a symmetric comb.
  double amplitude_asymmetry() const;
};

/// Relative height below the best autocorrelation peak that still counts as a tie.
inline constexpr double kPeriodTieTolerance = 0.1;

/// Autocorrelation peaks below this fraction of the zero-lag value are noise.
inline constexpr double kMinPeriodCorrelation = 0.15;

/// Dominant period from the autocorrelation: among local maxima past the
/// zero-lag lobe, the largest value wins, ties (within kPeriodTieTolerance)
/// go to the shorter lag.
/// Returns the period in samples (sub-sample refined) or nullopt.
std::optional<double> autocorrelation_period(const Eigen::ArrayXd& values);

/// Automatic starting point: period from the autocorrelation, comb phase from
/// the first Fourier component at that period, amplitudes read off the trace.
/// Throws InitializationError when no periodicity is found. A spacing hint
/// replaces the autocorrelation estimate.
CombFit initial_comb_guess(const Trace1D& trace, const std::vector<double>& orders,
                           std::optional<double> spacing_hint = std::nullopt);

/// `fix_spacing` holds the spacing at its initial value (e.g. when it is known
/// from the velocity calibration); a single order never fits a spacing.
CombFit fit_gaussian_comb(const Trace1D& trace, const std::vector<double>& orders,
                          const std::optional<CombFit>& init = std::nullopt, const LmOptions& options = {},
                          bool fix_spacing = false);
CombFit fit_gaussian_comb(const Trace1D& trace, int n_orders, const std::optional<CombFit>& init = std::nullopt,
                          const LmOptions& options = {});

/// Comb model evaluated at the fitted parameters.
Eigen::ArrayXd evaluate_comb(const CombFit& fit, const Eigen::ArrayXd& x);

}  // namespace mwdiff
