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

#include "mwdiff/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mwdiff/errors.hpp"

namespace mwdiff {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

}  // namespace

void Molecule::validate() const {
  check(std::isfinite(mass_u) && mass_u > 0, "molecule mass must be positive");
  check(std::isfinite(dipole_debye) && dipole_debye >= 0, "dipole moment must be non-negative");
  if (source_temperature_K) check(*source_temperature_K > 0, "source temperature must be positive");
}

void Grating::validate() const {
  check(std::isfinite(period_nm) && period_nm > 0, "grating period must be positive");
  check(slit_width_nm > 0 && slit_width_nm < period_nm, "slit width must lie in (0, period)");
  check(thickness_nm > 0, "grating thickness must be positive");
  check(n_slits >= 2, "at least two coherently illuminated slits are required");
  check(support_bar_width_um >= 0 && window_width_um > 0 && window_height_um > 0,
        "grating window dimensions must be positive");
}

void BeamlineGeometry::validate() const {
  check(source_to_grating_m > 0 && grating_to_detector_m > 0, "beamline distances must be positive");
  check(collimation_divergence_rad >= 0, "collimation divergence must be non-negative");
  check(beam_width_at_detector_um > 0, "collimated beam width must be positive");
}

namespace catalog {

Molecule phthalocyanine() { return {"M1", 514.54, 0.0, std::nullopt}; }
Molecule dihydroxy_naphthacenedione() { return {"M2", 290.27, 0.4, std::nullopt}; }
// Experimental dipole moment; the calculated value is 0.9 D.
Molecule naphthacenequinone() { return {"M3", 258.27, 2.3, std::nullopt}; }
Molecule nile_red() { return {"M4", 318.38, 8.2, std::nullopt}; }

Grating g1() {
  Grating g;
  g.name = "G1";
  g.period_nm = 97.0;
  g.slit_width_nm = 46.0;
  g.thickness_nm = 20.0;
  return g;
}

Grating g2() {
  Grating g;
  g.name = "G2";
  g.period_nm = 99.0;
  g.slit_width_nm = 43.0;
  g.thickness_nm = 55.0;
  return g;
}

std::optional<Molecule> molecule(const std::string& label) {
  const auto key = upper(label);
  if (key == "M1") return phthalocyanine();
  if (key == "M2") return dihydroxy_naphthacenedione();
  if (key == "M3") return naphthacenequinone();
  if (key == "M4") return nile_red();
  return std::nullopt;
}

std::optional<Grating> grating(const std::string& label) {
  const auto key = upper(label);
  if (key == "G1") return g1();
  if (key == "G2") return g2();
  return std::nullopt;
}

}  // namespace catalog

}  // namespace mwdiff
