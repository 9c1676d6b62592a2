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

#include <numbers>

namespace mwdiff::constants {

inline constexpr double planck_h = 6.62607015e-34;          // J s
inline constexpr double hbar = planck_h / (2.0 * std::numbers::pi);
inline constexpr double atomic_mass_unit = 1.66053907e-27;  // kg
inline constexpr double gravity_g = 9.80665;                 // m / s^2
inline constexpr double boltzmann_k = 1.380649e-23;          // J / K
inline constexpr double electron_volt = 1.602176634e-19;     // J

static_assert(planck_h > 0 && atomic_mass_unit > 0 && gravity_g > 0 && boltzmann_k > 0);

// Unit conversions into SI.
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double pm = 1e-12;
inline constexpr double meV = 1e-3 * electron_volt;

}  // namespace mwdiff::constants
