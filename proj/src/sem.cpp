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

#include "mwdiff/sem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "mwdiff/constants.hpp"
#include "mwdiff/diffraction.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/synthesis.hpp"

namespace mwdiff {

void SemImage::validate() const {
  if (!(scale_nm_per_px > 0) || !std::isfinite(scale_nm_per_px)) throw DomainError("SEM scale must be positive");
  if (pixels.size() == 0) throw DomainError("SEM image is empty");
  if (!pixels.allFinite()) throw DomainError("SEM image contains non-finite pixels");
}

Trace1D sem_trace(const SemImage& image) {
  image.validate();
  const Eigen::ArrayXd profile = image.pixels.colwise().mean().transpose();
  const double lo = profile.minCoeff();
  const double hi = profile.maxCoeff();
  if (!(hi > lo)) throw DomainError("cannot normalise a trace with no contrast");
  const Eigen::Index n = profile.size();
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1)) *
                           (image.scale_nm_per_px * constants::nm);
  Trace1D trace = make_trace(x, (profile - lo) / (hi - lo));
  trace.row_lo = 0;
  trace.row_hi = static_cast<int>(image.pixels.rows());
  trace.metadata["scale_nm_per_px"] = format_double(image.scale_nm_per_px);
  return trace;
}

namespace {

double sample(const Trace1D& t, double x) {
  const double f = (x - t.positions[0]) / t.step();
  const auto n = t.size();
  if (f <= 0) return t.intensities[0];
  if (f >= static_cast<double>(n - 1)) return t.intensities[n - 1];
  const auto i = static_cast<Eigen::Index>(f);
  const double r = f - static_cast<double>(i);
  return (1.0 - r) * t.intensities[i] + r * t.intensities[i + 1];
}

// Mean width of the dips at half depth, each dip measured between its
// bottom and the membrane level half a period away. NaN if no dip yields
// both crossings.
double half_depth_width(const Trace1D& t, const CombFit& fit) {
  const double d = fit.spacing;
  const double h = 0.05 * t.step();
  double total = 0.0;
  int counted = 0;
  for (double order : fit.orders) {
    const double c = fit.center_offset + order * d;
    const double bottom = sample(t, c);
    const double top = 0.5 * (sample(t, c - 0.5 * d) + sample(t, c + 0.5 * d));
    const double half = 0.5 * (top + bottom);
    if (!(top > bottom)) continue;
    const auto crossing = [&](double dir) -> std::optional<double> {
      double prev = bottom;
      for (double u = h; u <= 0.5 * d; u += h) {
        const double cur = sample(t, c + dir * u);
        if (cur >= half && prev < half) return u - h + h * (half - prev) / (cur - prev);
        prev = cur;
      }
      return std::nullopt;
    };
    const auto left = crossing(-1.0);
    const auto right = crossing(1.0);
    if (!left || !right) continue;
    total += *left + *right;
    ++counted;
  }
  return counted ? total / counted : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

GratingMetrology fit_periodic_dips(const Trace1D& trace, int n_slits, double scale_nm_per_px) {
  if (n_slits < 3) throw DomainError("at least 3 slits are needed to fit a period");
  if (!(scale_nm_per_px > 0)) throw DomainError("SEM scale must be positive");
  trace.validate();

  // Slits are dark: fit the comb to the inverted trace.
  Trace1D inverted = trace;
  inverted.intensities = 1.0 - trace.intensities;
  const CombFit fit = fit_gaussian_comb(inverted, centred_orders(n_slits));
  if (fit.status == LmStatus::Singular) throw ConvergenceError("SEM comb fit is rank deficient: " + fit.message);

  GratingMetrology m;
  m.period_nm = fit.spacing / constants::nm;
  m.slit_width_nm = fit.fwhm() / constants::nm;
  m.period_uncertainty_nm = std::max(fit.spacing_uncertainty / constants::nm, scale_nm_per_px);
  m.slit_width_uncertainty_nm =
      std::max(fwhm_from_width(fit.width_uncertainty) / constants::nm, scale_nm_per_px);
  m.half_depth_width_nm = half_depth_width(trace, fit) / constants::nm;
  m.n_slits_fitted = n_slits;
  m.residual_rms = fit.residual_rms;
  m.fit = fit;
  return m;
}

void SemSynthesis::validate() const {
  if (!(period_nm > 0)) throw DomainError("SEM period must be positive");
  if (!(slit_width_nm > 0 && slit_width_nm < period_nm)) throw DomainError("slit width must lie in (0, period)");
  if (n_slits < 1) throw DomainError("need at least one slit");
  if (!(edge_blur_nm >= 0)) throw DomainError("edge blur must be non-negative");
  if (!(scale_nm_per_px > 0)) throw DomainError("SEM scale must be positive");
  if (height_px < 1) throw DomainError("SEM height must be positive");
  if (!(margin_nm >= 0)) throw DomainError("margin must be non-negative");
  if (!(membrane_counts > slit_counts && slit_counts >= 0)) throw DomainError("membrane must be brighter than slits");
}

SemImage synthesize_sem(const SemSynthesis& p, std::uint64_t seed) {
  p.validate();
  const double span = (p.n_slits - 1) * p.period_nm + p.slit_width_nm + 2.0 * p.margin_nm;
  const int width = static_cast<int>(std::ceil(span / p.scale_nm_per_px));
  const double centre = 0.5 * (width - 1) * p.scale_nm_per_px;

  // Box [a, b] convolved with a Gaussian of standard deviation sigma.
  const auto blurred_box = [&](double x, double a, double b) {
    if (p.edge_blur_nm == 0.0) return (x >= a && x <= b) ? 1.0 : 0.0;
    const double k = 1.0 / (std::sqrt(2.0) * p.edge_blur_nm);
    return 0.5 * (std::erf((x - a) * k) - std::erf((x - b) * k));
  };

  Eigen::ArrayXd profile(width);
  for (int c = 0; c < width; ++c) {
    const double x = c * p.scale_nm_per_px;
    double open = 0.0;
    for (int j = 0; j < p.n_slits; ++j) {
      const double mid = centre + (j - 0.5 * (p.n_slits - 1)) * p.period_nm;
      open += blurred_box(x, mid - 0.5 * p.slit_width_nm, mid + 0.5 * p.slit_width_nm);
    }
    profile(c) = p.membrane_counts - (p.membrane_counts - p.slit_counts) * std::min(open, 1.0);
  }

  ImageArray expected(p.height_px, width);
  expected.rowwise() = profile.transpose();
  SemImage image;
  image.scale_nm_per_px = p.scale_nm_per_px;
  image.pixels = p.shot_noise ? add_poisson_noise(expected, seed) : expected;
  return image;
}

}  // namespace mwdiff
