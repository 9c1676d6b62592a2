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

#include <string>

#include "mwdiff/diffraction.hpp"
#include "mwdiff/levenberg_marquardt.hpp"
#include "mwdiff/trace.hpp"

namespace mwdiff {

/// Quantities held fixed while fitting the effective slit width.
struct SlitFitKnown {
  double wavelength_m = 0.0;
  int n_slits = 10;
  double period_nm = 0.0;
  double z_m = 0.70;

  void validate() const;
  /// First-order screen spacing lambda z / d.
  double first_order_spacing() const;
};

/// ideal_grating_intensity as a curve model; p = (c1, c2, s_eff_nm).
class IdealGratingModel final : public CurveModel {
 public:
  explicit IdealGratingModel(SlitFitKnown known) : known_(known) {}
  Eigen::Index n_params() const override { return 3; }
  std::string name() const override { return "ideal-grating"; }
  Eigen::ArrayXd evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;

 private:
  IdealGratingParams params_for(const Eigen::VectorXd& p) const;
  SlitFitKnown known_;
};

struct SlitWidthFit {
  double s_eff_nm = 0.0;
  double s_eff_uncertainty_nm = 0.0;
  double c1 = 0.0, c1_uncertainty = 0.0;
  double c2 = 0.0, c2_uncertainty = 0.0;
  SlitFitKnown known;
  double residual_rms = 0.0;
  int iterations = 0;
  int starts_tried = 0;
  int starts_converged = 0;
  LmStatus status = LmStatus::MaxIterations;
  std::string message;
};

/// Multi-start Levenberg-Marquardt fit of (c1, c2, s_eff) with s_eff starts at
/// 5, 10, ... nm up to 0.9 d; the lowest residual wins. s_eff stays in (0, d].
/// Throws ConvergenceError when the trace is flat or no start converges.
SlitWidthFit fit_effective_slit_width(const Trace1D& trace, const SlitFitKnown& known);

}  // namespace mwdiff
