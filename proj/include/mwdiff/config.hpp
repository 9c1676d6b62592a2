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

// Experiment description files: flat "key = value" text with [section]
// headers (or dotted keys), catalog presets and strict key checking.
//
//   seed = 7
//   [molecule]
//   preset = "M1"
//   [grating]
//   preset = "G1"
//   effective_slit_width_nm = 20

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "mwdiff/image.hpp"
#include "mwdiff/synthesis.hpp"

namespace mwdiff {

struct ExperimentConfig {
  Scene scene;
  std::uint64_t seed = 1;
};

/// Throws FormatError (with line number) on syntax errors, unknown keys,
/// duplicate keys and values that violate a module invariant.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved, re-parseable dump (presets expanded, shortest round-trip numbers).
void write_config(std::ostream& out, const ExperimentConfig& config);
std::string config_to_string(const ExperimentConfig& config);

/// `<image>.meta`: the resolved configuration plus an [image] section. SEM
/// sidecars carry only the [image] section.
struct ImageSidecar {
  std::optional<ExperimentConfig> config;
  std::map<std::string, std::string> image;
};

std::string sidecar_path(const std::string& image_path);
void write_sidecar(std::ostream& out, const ExperimentConfig& config, const DetectorImage& image);
ImageSidecar read_sidecar(std::istream& in);
ImageSidecar load_sidecar(const std::string& path);

}  // namespace mwdiff
