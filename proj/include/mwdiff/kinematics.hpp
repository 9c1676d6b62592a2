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

// Closed-form far-field kinematics: de Broglie wavelength, diffraction order
// positions and the gravitational drop that maps detector rows to velocities.
// All screen coordinates use the small-angle relation x / z = angle.

#include <cmath>

#include "mwdiff/constants.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/types.hpp"

namespace mwdiff {

namespace detail {
template <typename Scalar>
void require_positive(const Scalar& value, const char* what) {
  if (!(value > Scalar(0))) throw DomainError(std::string(what) + " must be positive");
}
}  // namespace detail

template <typename Scalar>
Scalar de_broglie_wavelength(const Molecule& molecule, const Scalar& velocity) {
  detail::require_positive(velocity, "velocity");
  return Scalar(constants::planck_h) / (Scalar(molecule.mass_kg()) * velocity);
}

template <typename Scalar>
Scalar velocity_from_wavelength(const Molecule& molecule, const Scalar& wavelength) {
  detail::require_positive(wavelength, "wavelength");
  return Scalar(constants::planck_h) / (Scalar(molecule.mass_kg()) * wavelength);
}

/// Screen position of diffraction order `order` in metres.
template <typename Scalar>
Scalar diffraction_order_position(int order, const Scalar& wavelength, const Grating& grating,
                                  const BeamlineGeometry& geometry) {
  detail::require_positive(wavelength, "wavelength");
  // order * (wavelength z / d) keeps position(n) == n * position(1) bit-exact.
  const Scalar first = wavelength * Scalar(geometry.grating_to_detector_m) / Scalar(grating.period_m());
  return Scalar(order) * first;
}

/// Velocity whose first-order spacing on the screen equals `spacing`.
template <typename Scalar>
Scalar velocity_from_peak_spacing(const Scalar& spacing, const Molecule& molecule, const Grating& grating,
                                  const BeamlineGeometry& geometry) {
  detail::require_positive(spacing, "peak spacing");
  return Scalar(constants::planck_h * geometry.grating_to_detector_m) /
         (Scalar(molecule.mass_kg() * grating.period_m()) * spacing);
}

/// Vertical free-fall drop accumulated between source and detector.
template <typename Scalar>
Scalar gravity_drop(const Scalar& velocity, const BeamlineGeometry& geometry) {
  detail::require_positive(velocity, "velocity");
  const Scalar flight_time = Scalar(geometry.flight_length_m()) / velocity;
  return Scalar(0.5 * constants::gravity_g) * flight_time * flight_time;
}

/// Inverse of gravity_drop anchored at a calibration velocity: `y` is the
/// extra drop (positive = further down) relative to the reference row.
template <typename Scalar>
Scalar velocity_from_vertical_position(const Scalar& y, const Scalar& reference_velocity,
                                       const BeamlineGeometry& geometry) {
  const Scalar drop = gravity_drop(reference_velocity, geometry) + y;
  if (!(drop > Scalar(0)) || !std::isfinite(double(drop)))
    throw DomainError("vertical position lies above the undeflected beam axis");
  using std::sqrt;
  return Scalar(geometry.flight_length_m()) * sqrt(Scalar(0.5 * constants::gravity_g) / drop);
}

}  // namespace mwdiff
