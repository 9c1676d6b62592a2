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

#include "mwdiff/diffraction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwdiff/constants.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/quadrature.hpp"

namespace mwdiff {

using std::numbers::pi;

double fwhm_from_width(double w) { return w * std::sqrt(2.0 * std::numbers::ln2); }
double width_from_fwhm(double fwhm) { return fwhm / std::sqrt(2.0 * std::numbers::ln2); }

double sinc(double y) {
  if (std::abs(y) < 1e-4) {
    const double y2 = y * y;
    return 1.0 - y2 / 6.0 + y2 * y2 / 120.0;
  }
  return std::sin(y) / y;
}

void IdealGratingParams::validate() const {
  if (!(c1 > 0)) throw DomainError("c1 must be positive");
  if (!(c2 >= 0)) throw DomainError("c2 must be non-negative");
  if (!(s_eff_nm > 0 && s_eff_nm <= period_nm)) throw DomainError("s_eff must lie in (0, d]");
  if (n_slits < 2) throw DomainError("at least two slits are required");
  if (!(wavelength_m > 0 && z_m > 0)) throw DomainError("wavelength and distance must be positive");
}

double n_slit_factor(double a, int n_slits) {
  // Shift by the nearest multiple of pi; both sines only change sign.
  const double eps = a - pi * std::nearbyint(a / pi);
  const double s = std::sin(eps);
  const double n = n_slits;
  if (std::abs(s) < 1e-8) return n * n * (1.0 - (n * n - 1.0) * eps * eps / 3.0);
  const double ratio = std::sin(n * eps) / s;
  return ratio * ratio;
}

IdealGratingTerms ideal_grating_terms(double x, const IdealGratingParams& p) {
  const double scale = pi * x / (p.wavelength_m * p.z_m);
  const double y = scale * p.s_eff_nm * constants::nm;
  const double sc = sinc(y);
  double dsinc;
  if (std::abs(y) < 1e-4)
    dsinc = -y / 3.0 + y * y * y / 30.0;
  else
    dsinc = (std::cos(y) - sc) / y;
  IdealGratingTerms t;
  t.envelope = sc * sc;
  t.d_envelope_d_seff_nm = 2.0 * sc * dsinc * scale * constants::nm;
  t.interference = n_slit_factor(scale * p.period_nm * constants::nm, p.n_slits);
  return t;
}

double ideal_grating_intensity(double x, const IdealGratingParams& params) {
  const auto t = ideal_grating_terms(x, params);
  return params.c1 * t.envelope * t.interference + params.c2;
}

Eigen::ArrayXd ideal_grating_intensity(const Eigen::ArrayXd& x, const IdealGratingParams& params) {
  return x.unaryExpr([&](double xi) { return ideal_grating_intensity(xi, params); });
}

Eigen::ArrayXd blurred_grating_intensity(const Eigen::ArrayXd& x, const IdealGratingParams& p,
                                         double blur_width_m) {
  if (!(blur_width_m >= 0)) throw DomainError("blur width must be non-negative");
  const double s = p.s_eff_nm * constants::nm;
  const double d = p.period_nm * constants::nm;
  const double lz = p.wavelength_m * p.z_m;
  const double sigma_u = stddev_from_width(blur_width_m) / lz;
  const double taper = 2.0 * pi * pi * sigma_u * sigma_u;

  // Nodes per half-triangle scale with the largest phase excursion over s.
  const double x_max = x.size() ? x.abs().maxCoeff() : 0.0;
  const double omega = pi * x_max * s / lz;
  const int n_nodes = std::clamp(static_cast<int>(omega) + 24, 24, 1024);
  const auto rule = gauss_legendre(n_nodes);

  // Autocorrelation of the aperture: triangles of half-width s at k d,
  // weighted N - |k|; +k and -k are folded together (cosine transform).
  std::vector<double> delta;
  std::vector<double> weight;
  for (int k = 0; k < p.n_slits; ++k) {
    const double nearest = std::max(0.0, k * d - s);
    if (k > 0 && taper * nearest * nearest > 46.0) break;  // exp(-46) ~ 1e-20
    const double mult = (k == 0 ? 1.0 : 2.0) * (p.n_slits - k);
    for (int half = 0; half < 2; ++half) {
      for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
        // Map [-1, 1] onto [-s, 0] or [0, s].
        const double offset = 0.5 * s * (rule.nodes[m] + (half == 0 ? -1.0 : 1.0));
        const double lag = k * d + offset;
        const double tri = s - std::abs(offset);
        delta.push_back(lag);
        weight.push_back(mult * 0.5 * s * rule.weights[m] * tri * std::exp(-taper * lag * lag));
      }
    }
  }

  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(x.size());
  const Eigen::ArrayXd phase = (2.0 * pi / lz) * x;
  for (std::size_t t = 0; t < delta.size(); ++t) acc += weight[t] * (delta[t] * phase).cos();
  return p.c1 / (s * s) * acc.max(0.0) + p.c2;
}

double effective_slit_reduction_factor(double geometric_s_nm, double s_eff_nm) {
  if (!(geometric_s_nm > 0 && s_eff_nm > 0)) throw DomainError("slit widths must be positive");
  if (s_eff_nm > geometric_s_nm) throw DomainError("effective slit width exceeds the geometric width");
  return geometric_s_nm / s_eff_nm;
}

void VdwSlitModel::validate() const {
  if (!(c3_meV_nm3 >= 0)) throw DomainError("C3 must be non-negative");
  if (!(thickness_nm > 0 && slit_width_nm > 0)) throw DomainError("slit dimensions must be positive");
  if (!(cutoff_nm > 0 && cutoff_nm < 0.5 * slit_width_nm)) throw DomainError("cutoff must lie in (0, s/2)");
}

double vdw_slit_phase(double xi_m, const VdwSlitModel& model, double velocity) {
  const double s = model.slit_width_nm * constants::nm;
  if (!(xi_m > 0 && xi_m < s)) throw DomainError("position lies outside the slit");
  if (!(velocity > 0)) throw DomainError("velocity must be positive");
  if (model.c3_meV_nm3 == 0.0) return 0.0;
  const double cut = model.cutoff_nm * constants::nm;
  const double xi = std::clamp(xi_m, cut, s - cut);
  const double c3 = model.c3_meV_nm3 * constants::meV * 1e-27;  // J m^3
  const double strength = c3 * model.thickness_nm * constants::nm / (constants::hbar * velocity);
  const double left = xi;
  const double right = s - xi;
  return strength * (1.0 / (left * left * left) + 1.0 / (right * right * right));
}

std::complex<double> vdw_slit_transmission(double xi_m, const VdwSlitModel& model, double velocity) {
  const double phi = vdw_slit_phase(xi_m, model, velocity);
  if (model.absorb_inside_cutoff && model.c3_meV_nm3 > 0) {
    const double cut = model.cutoff_nm * constants::nm;
    const double s = model.slit_width_nm * constants::nm;
    if (xi_m < cut || xi_m > s - cut) return {0.0, 0.0};
  }
  return std::polar(1.0, phi);
}

SlitTransmission uniform_transmission(double width_m, Eigen::Index n_samples) {
  if (!(width_m > 0)) throw DomainError("slit width must be positive");
  return {Eigen::ArrayXcd::Constant(n_samples, {1.0, 0.0}), width_m};
}

SlitTransmission sample_vdw_transmission(const VdwSlitModel& model, double velocity, Eigen::Index n_samples) {
  model.validate();
  SlitTransmission t;
  t.width_m = model.slit_width_nm * constants::nm;
  t.samples.resize(n_samples);
  const double h = t.width_m / static_cast<double>(n_samples);
  for (Eigen::Index i = 0; i < n_samples; ++i)
    t.samples[i] = vdw_slit_transmission((static_cast<double>(i) + 0.5) * h, model, velocity);
  return t;
}

Eigen::ArrayXd far_field_from_transmission(const SlitTransmission& transmission, double period_m, int n_slits,
                                           double wavelength_m, double z_m, const Eigen::ArrayXd& x) {
  const Eigen::Index m = transmission.samples.size();
  if (m < kMinTransmissionSamples)
    throw PrecisionError("slit transmission needs at least " + std::to_string(kMinTransmissionSamples) +
                         " samples");
  if (!(transmission.width_m > 0 && period_m > 0 && wavelength_m > 0 && z_m > 0) || n_slits < 1)
    throw DomainError("invalid far-field geometry");
  if (!x.allFinite()) throw DomainError("screen grid must be finite");

  const double h = transmission.width_m / static_cast<double>(m);
  const Eigen::ArrayXd centres = (Eigen::ArrayXd::LinSpaced(m, 0.0, static_cast<double>(m - 1)) + 0.5) * h;
  Eigen::ArrayXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double q = 2.0 * pi * x[i] / (wavelength_m * z_m);
    // Exact integral of exp(-i q xi) over one cell of width h.
    const double cell = h * sinc(0.5 * q * h);
    std::complex<double> slit{0.0, 0.0};
    for (Eigen::Index k = 0; k < m; ++k) slit += transmission.samples[k] * std::polar(1.0, -q * centres[k]);
    std::complex<double> array{0.0, 0.0};
    for (int j = 0; j < n_slits; ++j) array += std::polar(1.0, -q * j * period_m);
    out[i] = std::norm(cell * slit * array) / (transmission.width_m * transmission.width_m);
  }
  return out;
}

void DephasingModel::validate() const {
  if (!(kappa >= 0)) throw DomainError("kappa must be non-negative");
  if (!(base_width_um > 0)) throw DomainError("base beam width must be positive");
}

double dephasing_sigma(const DephasingModel& model, double dipole_debye, double velocity) {
  if (!(velocity > 0)) throw DomainError("velocity must be positive");
  return model.kappa * dipole_debye / velocity;
}

double broadened_width(const DephasingModel& model, double dipole_debye, double velocity) {
  return std::hypot(model.base_width_um * constants::um, dephasing_sigma(model, dipole_debye, velocity));
}

double calibrate_kappa(double width_in_m, double width_out_m, double velocity, double dipole_debye) {
  if (!(width_out_m >= width_in_m && width_in_m > 0)) throw DomainError("broadened width must exceed the input");
  if (!(velocity > 0 && dipole_debye > 0)) throw DomainError("calibration needs positive velocity and dipole");
  return std::sqrt(width_out_m * width_out_m - width_in_m * width_in_m) * velocity / dipole_debye;
}

DephasedTrace apply_dephasing(const Eigen::ArrayXd& intensities, double step_m, double sigma_m) {
  if (!(sigma_m >= 0)) throw DomainError("dephasing width must be non-negative");
  if (!(step_m > 0)) throw DomainError("grid step must be positive");
  DephasedTrace out;
  if (sigma_m == 0.0 || intensities.size() == 0) {
    out.intensities = intensities;
    return out;
  }
  const Eigen::Index n = intensities.size();
  const double span = step_m * static_cast<double>(n - 1);
  out.edge_loss_warning = sigma_m > 0.25 * span;

  const Eigen::Index reach = static_cast<Eigen::Index>(std::ceil(4.0 * sigma_m / step_m));
  Eigen::ArrayXd kernel(2 * reach + 1);
  for (Eigen::Index k = -reach; k <= reach; ++k) {
    const double u = static_cast<double>(k) * step_m / sigma_m;
    kernel[k + reach] = std::exp(-2.0 * u * u);
  }

  out.intensities = Eigen::ArrayXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (intensities[i] == 0.0) continue;
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - reach);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + reach);
    const auto taps = kernel.segment(lo - i + reach, hi - lo + 1);
    out.intensities.segment(lo, hi - lo + 1) += (intensities[i] / taps.sum()) * taps;
  }
  return out;
}

}  // namespace mwdiff
