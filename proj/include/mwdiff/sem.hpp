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

// Grating period and slit width from SEM micrographs: vertically averaged
// greyscale trace, dips fitted with a shared-width Gaussian comb.

#include <cstdint>
#include <string>

#include "mwdiff/comb_fit.hpp"
#include "mwdiff/image.hpp"
#include "mwdiff/trace.hpp"

namespace mwdiff {

struct SemImage {
  ImageArray pixels;
  double scale_nm_per_px = 1.0;

  void validate() const;
};

struct GratingMetrology {
  double period_nm = 0.0;
  double period_uncertainty_nm = 0.0;
  double slit_width_nm = 0.0;  // FWHM of the fitted dips
  double slit_width_uncertainty_nm = 0.0;
  // Model-free cross-check: dip width at half depth read off the trace. The
  // Gaussian FWHM above underestimates box-like dips by roughly 10 %.
  double half_depth_width_nm = 0.0;
  int n_slits_fitted = 0;
  double residual_rms = 0.0;
  CombFit fit;
};

/// Column means min-max normalised to [0, 1]; positions in metres from the left edge.
Trace1D sem_trace(const SemImage& image);

/// Uncertainties are floored at `scale_nm_per_px` (fit precision cannot beat
/// the image resolution). Throws DomainError for n_slits < 3.
GratingMetrology fit_periodic_dips(const Trace1D& trace, int n_slits, double scale_nm_per_px);

/// Forward model for tests and demos: bright membrane, dark box-shaped slits
/// with Gaussian-blurred edges, optional Poisson noise.
struct SemSynthesis {
  double period_nm = 97.0;
  double slit_width_nm = 46.0;
  int n_slits = 11;
  double edge_blur_nm = 3.0;  // standard deviation of the point-spread function
  double scale_nm_per_px = 1.0;
  int height_px = 64;
  double margin_nm = 100.0;   // membrane on either side of the slit array
  double membrane_counts = 200.0;
  double slit_counts = 30.0;
  bool shot_noise = true;

  void validate() const;
};

SemImage synthesize_sem(const SemSynthesis& params, std::uint64_t seed);

}  // namespace mwdiff
