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

// One-dimensional far-field intensity models: the ideal N-slit grating with an
// effective slit width, a numerical Fraunhofer integral over an arbitrary slit
// transmission, an eikonal wall-interaction phase, and Gaussian dephasing.
//
// Gaussian widths everywhere follow the comb convention exp(-2 x^2 / w^2),
// i.e. w is twice the standard deviation.

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "mwdiff/types.hpp"

namespace mwdiff {

double fwhm_from_width(double w);
double width_from_fwhm(double fwhm);
inline double width_from_stddev(double sigma) { return 2.0 * sigma; }
inline double stddev_from_width(double w) { return 0.5 * w; }

/// sin(y) / y with the removable singularity at 0.
double sinc(double y);

struct IdealGratingParams {
  double c1 = 1.0;             // amplitude
  double c2 = 0.0;             // baseline
  double s_eff_nm = 20.0;
  double wavelength_m = 4.6e-12;
  int n_slits = 10;
  double period_nm = 100.0;
  double z_m = 0.70;

  void validate() const;
};

/// Factorised ideal-grating intensity: I = c1 * envelope * interference + c2.
struct IdealGratingTerms {
  double envelope = 0.0;       // sinc^2(pi s_eff x / (lambda z))
  double interference = 0.0;   // [sin(N a) / sin(a)]^2, a = pi d x / (lambda z)
  double d_envelope_d_seff_nm = 0.0;
};

IdealGratingTerms ideal_grating_terms(double x, const IdealGratingParams& params);

double ideal_grating_intensity(double x, const IdealGratingParams& params);
Eigen::ArrayXd ideal_grating_intensity(const Eigen::ArrayXd& x, const IdealGratingParams& params);

/// [sin(N a) / sin(a)]^2 with the principal-maximum limit N^2.
double n_slit_factor(double a, int n_slits);

/// Ideal-grating intensity convolved with a unit-area Gaussian of width
/// `blur_width_m` (comb convention). Evaluated through the aperture
/// autocorrelation, where the blur becomes a Gaussian taper, so the narrow
/// N-slit fringes need no fine sampling. blur_width_m == 0 is the ideal model.
Eigen::ArrayXd blurred_grating_intensity(const Eigen::ArrayXd& x, const IdealGratingParams& params,
                                         double blur_width_m);

double effective_slit_reduction_factor(double geometric_s_nm, double s_eff_nm);

/// Eikonal van der Waals phase across one slit (extension model).
struct VdwSlitModel {
  double c3_meV_nm3 = 0.0;
  double cutoff_nm = 1.0;
  double thickness_nm = 20.0;
  double slit_width_nm = 45.0;
  // false: phase frozen at the cutoff value; true: trajectories closer than the
  // cutoff are absorbed (zero amplitude).
  bool absorb_inside_cutoff = false;

  void validate() const;
};

double vdw_slit_phase(double xi_m, const VdwSlitModel& model, double velocity);
std::complex<double> vdw_slit_transmission(double xi_m, const VdwSlitModel& model, double velocity);

/// Complex transmission sampled at the midpoints of equal cells spanning [0, width].
struct SlitTransmission {
  Eigen::ArrayXcd samples;
  double width_m = 0.0;
};

inline constexpr Eigen::Index kMinTransmissionSamples = 256;

SlitTransmission uniform_transmission(double width_m, Eigen::Index n_samples);
SlitTransmission sample_vdw_transmission(const VdwSlitModel& model, double velocity, Eigen::Index n_samples);

/// |sum_j int t(xi) exp(-2 pi i x (xi + j d) / (lambda z)) dxi|^2 / width^2, so
/// that unit transmission reproduces ideal_grating_intensity with c1 = 1, c2 = 0.
/// Each cell is integrated exactly against the exponential (piecewise-constant t).
Eigen::ArrayXd far_field_from_transmission(const SlitTransmission& transmission, double period_m, int n_slits,
                                           double wavelength_m, double z_m, const Eigen::ArrayXd& x);

struct DephasingModel {
  double kappa = 0.0;         // m (m/s) / D
  double base_width_um = 15.0;

  void validate() const;
};

/// Dephasing width at the detector in metres: kappa * p_el / v.
double dephasing_sigma(const DephasingModel& model, double dipole_debye, double velocity);

/// Undeflected width combined in quadrature with the dephasing width, in metres.
double broadened_width(const DephasingModel& model, double dipole_debye, double velocity);

/// kappa such that a beam of width `width_in` broadens to `width_out` at `velocity`.
double calibrate_kappa(double width_in_m, double width_out_m, double velocity, double dipole_debye);

struct DephasedTrace {
  Eigen::ArrayXd intensities;
  bool edge_loss_warning = false;
};

/// Convolves a uniformly sampled trace with a unit-area Gaussian of width
/// `sigma_m`. Every input sample's weight is redistributed over the grid with
/// the kernel renormalised to the samples that exist, so the sum is conserved
/// exactly; the warning flags kernels that reach past the grid.
DephasedTrace apply_dephasing(const Eigen::ArrayXd& intensities, double step_m, double sigma_m);

}  // namespace mwdiff
