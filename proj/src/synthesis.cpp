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

#include "mwdiff/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "mwdiff/constants.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/kinematics.hpp"
#include "mwdiff/random.hpp"

namespace mwdiff {

void VelocityDistribution::validate() const {
  if (kind == Kind::ThermalEffusive && !(temperature_K > 0)) throw DomainError("source temperature must be positive");
  if (kind == Kind::GaussianBand && !(v_center > 0 && v_sigma > 0))
    throw DomainError("velocity band centre and width must be positive");
}

double VelocityDistribution::weight(double velocity, const Molecule& molecule) const {
  if (!(velocity > 0)) return 0.0;
  if (kind == Kind::GaussianBand) {
    const double u = (velocity - v_center) / v_sigma;
    return std::exp(-0.5 * u * u);
  }
  const double beta = molecule.mass_kg() / (2.0 * constants::boltzmann_k * temperature_K);
  return velocity * velocity * velocity * std::exp(-beta * velocity * velocity);
}

double BackgroundModel::value(double nx, double ny) const {
  const auto& c = coefficients;
  return amplitude * (c[0] + c[1] * nx + c[2] * ny + c[3] * nx * nx + c[4] * nx * ny + c[5] * ny * ny);
}

void BackgroundModel::validate() const {
  if (!(amplitude >= 0)) throw DomainError("background amplitude must be non-negative");
  // A quadratic's minimum over the square lies on this grid or between points
  // closer than the tolerance allows to matter.
  constexpr int kGrid = 65;
  for (int i = 0; i < kGrid; ++i)
    for (int j = 0; j < kGrid; ++j) {
      const double nx = -1.0 + 2.0 * i / (kGrid - 1);
      const double ny = -1.0 + 2.0 * j / (kGrid - 1);
      if (value(nx, ny) < -1e-9 * amplitude) throw DomainError("background surface is negative inside the image");
    }
}

ImageArray BackgroundModel::render(int height, int width) const {
  ImageArray out(height, width);
  for (int r = 0; r < height; ++r) {
    const double ny = height > 1 ? -1.0 + 2.0 * r / (height - 1) : 0.0;
    for (int c = 0; c < width; ++c) {
      const double nx = width > 1 ? -1.0 + 2.0 * c / (width - 1) : 0.0;
      out(r, c) = std::max(0.0, value(nx, ny));
    }
  }
  return out;
}

void Scene::validate() const {
  molecule.validate();
  grating.validate();
  geometry.validate();
  detector.validate();
  velocities.validate();
  dephasing.validate();
  background.validate();
  if (effective_slit_width_nm && !(*effective_slit_width_nm > 0 && *effective_slit_width_nm <= grating.period_nm))
    throw DomainError("effective slit width must lie in (0, d]");
}

std::optional<double> row_velocity(const Scene& scene, int row) {
  try {
    return velocity_from_vertical_position(scene.detector.row_offset(row), scene.detector.reference_velocity,
                                           scene.geometry);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

ImageArray expected_image(const Scene& scene, int threads) {
  scene.validate();
  const auto& det = scene.detector;
  const Eigen::ArrayXd x = det.column_positions();
  ImageArray signal = ImageArray::Zero(det.height_px, det.width_px);

  const auto render_rows = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      const auto v = row_velocity(scene, r);
      if (!v) continue;
      const double weight = scene.velocities.weight(*v, scene.molecule);
      if (!(weight > 0)) continue;
      IdealGratingParams params;
      params.s_eff_nm = scene.model_slit_width_nm();
      params.wavelength_m = de_broglie_wavelength(scene.molecule, *v);
      params.n_slits = scene.grating.n_slits;
      params.period_nm = scene.grating.period_nm;
      params.z_m = scene.geometry.grating_to_detector_m;
      const double blur = std::hypot(scene.geometry.beam_width_at_detector_um * constants::um,
                                     dephasing_sigma(scene.dephasing, scene.molecule.dipole_debye, *v));
      signal.row(r) = weight * blurred_grating_intensity(x, params, blur).transpose();
    }
  };

  const int n_threads = std::clamp(threads, 1, det.height_px);
  if (n_threads == 1) {
    render_rows(0, det.height_px);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (det.height_px + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(det.height_px, lo + chunk);
      if (lo < hi) pool.emplace_back(render_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  const double peak = signal.maxCoeff();
  if (peak > 0 && det.exposure_scale > 0)
    signal *= det.exposure_scale / peak;
  else
    signal.setZero();
  if (scene.background.amplitude > 0) signal += scene.background.render(det.height_px, det.width_px);
  return signal;
}

ImageArray add_poisson_noise(const ImageArray& expected, std::uint64_t seed) {
  if (!expected.allFinite() || (expected < 0).any())
    throw DomainError("Poisson expectations must be finite and non-negative");
  ImageArray out(expected.rows(), expected.cols());
  for (Eigen::Index r = 0; r < expected.rows(); ++r)
    for (Eigen::Index c = 0; c < expected.cols(); ++c) {
      CounterStream stream(seed, static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r));
      out(r, c) = static_cast<double>(sample_poisson(expected(r, c), stream));
    }
  return out;
}

DetectorImage add_poisson_noise(const DetectorImage& expected, std::uint64_t seed) {
  DetectorImage out = expected;
  out.pixels = add_poisson_noise(expected.pixels, seed);
  out.seed = seed;
  out.provenance["shot_noise"] = "true";
  return out;
}

DetectorImage synthesize_image(const Scene& scene, std::uint64_t seed, int threads) {
  DetectorImage image;
  image.config = scene.detector;
  image.seed = seed;
  image.pixels = expected_image(scene, threads);
  if (scene.shot_noise) image.pixels = add_poisson_noise(image.pixels, seed);
  image.provenance["shot_noise"] = scene.shot_noise ? "true" : "false";
  return image;
}

}  // namespace mwdiff
