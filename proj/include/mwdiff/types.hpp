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

#include <optional>
#include <string>

#include "mwdiff/constants.hpp"

namespace mwdiff {

/// The diffracting particle. Mass in atomic mass units, dipole moment in Debye.
struct Molecule {
  std::string name;
  double mass_u = 0.0;
  double dipole_debye = 0.0;
  std::optional<double> source_temperature_K;

  double mass_kg() const { return mass_u * constants::atomic_mass_unit; }
  void validate() const;
};

/// Nanomechanical transmission grating. Lengths carry the unit in the field name.
struct Grating {
  std::string name;
  double period_nm = 100.0;
  double slit_width_nm = 45.0;
  double thickness_nm = 20.0;
  int n_slits = 10;  // coherently illuminated slits
  double support_bar_width_um = 0.6;
  double window_width_um = 10.0;
  double window_height_um = 20.0;

  double period_m() const { return period_nm * constants::nm; }
  double slit_width_m() const { return slit_width_nm * constants::nm; }
  double thickness_m() const { return thickness_nm * constants::nm; }
  void validate() const;
};

struct BeamlineGeometry {
  double source_to_grating_m = 0.91;
  double grating_to_detector_m = 0.70;
  double collimation_divergence_rad = 3e-6;
  double beam_width_at_detector_um = 15.0;  // exp(-2 x^2 / w^2) convention

  double flight_length_m() const { return source_to_grating_m + grating_to_detector_m; }
  void validate() const;
};

namespace catalog {

Molecule phthalocyanine();           // M1
Molecule dihydroxy_naphthacenedione();  // M2
Molecule naphthacenequinone();       // M3
Molecule nile_red();                 // M4

Grating g1();
Grating g2();

/// Looks up "M1".."M4" or "G1"/"G2" (case-insensitive); nullopt if unknown.
std::optional<Molecule> molecule(const std::string& label);
std::optional<Grating> grating(const std::string& label);

}  // namespace catalog

}  // namespace mwdiff
