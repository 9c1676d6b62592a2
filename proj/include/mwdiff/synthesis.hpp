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

#include <array>
#include <cstdint>
#include <optional>

#include "mwdiff/diffraction.hpp"
#include "mwdiff/image.hpp"
#include "mwdiff/types.hpp"

namespace mwdiff {

struct VelocityDistribution {
  enum class Kind { ThermalEffusive, GaussianBand };
  Kind kind = Kind::ThermalEffusive;
  double temperature_K = 1000.0;
  double v_center = 250.0;
  double v_sigma = 50.0;

  void validate() const;
  /// Relative flux at `velocity`; effusive form v^3 exp(-m v^2 / (2 k T)).
  double weight(double velocity, const Molecule& molecule) const;
};

/// amplitude * (c0 + c1 X + c2 Y + c3 X^2 + c4 X Y + c5 Y^2) with X, Y in [-1, 1]
/// spanning the image columns and rows.
struct BackgroundModel {
  double amplitude = 0.0;
  std::array<double, 6> coefficients{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};

  double value(double nx, double ny) const;
  void validate() const;
  ImageArray render(int height, int width) const;
};

/// Everything that defines a synthetic detector image.
struct Scene {
  Molecule molecule;
  Grating grating;
  BeamlineGeometry geometry;
  DetectorConfig detector;
  VelocityDistribution velocities;
  DephasingModel dephasing;
  BackgroundModel background;
  // Slit width used in the intensity model; the geometric width when unset.
  std::optional<double> effective_slit_width_nm;
  bool shot_noise = true;

  double model_slit_width_nm() const { return effective_slit_width_nm.value_or(grating.slit_width_nm); }
  void validate() const;
};

/// Velocity of a detector row, or nullopt above the undeflected beam.
std::optional<double> row_velocity(const Scene& scene, int row);

/// Noise-free expected counts, background included.
ImageArray expected_image(const Scene& scene, int threads = 1);

/// Per-pixel Poisson samples; pixel (r, c) draws from Philox stream (c, r).
ImageArray add_poisson_noise(const ImageArray& expected, std::uint64_t seed);
DetectorImage add_poisson_noise(const DetectorImage& expected, std::uint64_t seed);

DetectorImage synthesize_image(const Scene& scene, std::uint64_t seed, int threads = 1);

}  // namespace mwdiff
