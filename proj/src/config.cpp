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

#include "mwdiff/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "mwdiff/errors.hpp"
#include "mwdiff/trace.hpp"
#include "mwdiff/types.hpp"

namespace mwdiff {
namespace {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  bool quoted = false;
  int line = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

// Comments start at '#' outside quotes.
std::string_view strip_comment(std::string_view s) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_quotes = !in_quotes;
    if (s[i] == '#' && !in_quotes) return s.substr(0, i);
  }
  return s;
}

std::vector<Entry> tokenize(std::istream& in) {
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::string section;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(strip_comment(raw));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw FormatError("unterminated section header", line);
      const std::string_view name = trim(text.substr(1, text.size() - 2));
      if (!valid_name(name)) throw FormatError("invalid section name '" + std::string(name) + "'", line);
      section = name;
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected 'key = value'", line);
    Entry e;
    e.line = line;
    std::string_view key = trim(text.substr(0, eq));
    std::string_view value = trim(text.substr(eq + 1));
    e.section = section;
    if (const auto dot = key.find('.'); dot != std::string_view::npos) {
      if (!section.empty()) throw FormatError("dotted keys are only allowed outside sections", line);
      e.section = key.substr(0, dot);
      key = key.substr(dot + 1);
      if (!valid_name(e.section)) throw FormatError("invalid section name '" + e.section + "'", line);
    }
    if (!valid_name(key)) throw FormatError("invalid key '" + std::string(key) + "'", line);
    e.key = key;
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') throw FormatError("unterminated string", line);
      value = value.substr(1, value.size() - 2);
      e.quoted = true;
    }
    if (value.empty() && !e.quoted) throw FormatError("missing value for '" + e.key + "'", line);
    e.value = value;
    const std::string full = e.section.empty() ? e.key : e.section + "." + e.key;
    if (!seen.insert(full).second) throw FormatError("duplicate key '" + full + "'", line);
    entries.push_back(std::move(e));
  }
  return entries;
}

double as_double(const Entry& e) {
  double v = 0.0;
  const std::string_view s = e.value;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (e.quoted || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw FormatError("'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
  return v;
}

int as_int(const Entry& e) {
  int v = 0;
  const std::string_view s = e.value;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (e.quoted || ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("'" + e.key + "' expects an integer, got '" + e.value + "'", e.line);
  return v;
}

std::uint64_t as_u64(const Entry& e) {
  std::uint64_t v = 0;
  const std::string_view s = e.value;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (e.quoted || ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError("'" + e.key + "' expects a non-negative integer, got '" + e.value + "'", e.line);
  return v;
}

bool as_bool(const Entry& e) {
  if (!e.quoted && e.value == "true") return true;
  if (!e.quoted && e.value == "false") return false;
  throw FormatError("'" + e.key + "' expects true or false", e.line);
}

using Setter = std::function<void(ExperimentConfig&, const Entry&)>;

template <typename T>
Setter number(T Scene::*group, double T::*field) {
  return [=](ExperimentConfig& c, const Entry& e) { (c.scene.*group).*field = as_double(e); };
}
template <typename T>
Setter integer(T Scene::*group, int T::*field) {
  return [=](ExperimentConfig& c, const Entry& e) { (c.scene.*group).*field = as_int(e); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["seed"] = [](ExperimentConfig& c, const Entry& e) { c.seed = as_u64(e); };

    t["molecule.name"] = [](ExperimentConfig& c, const Entry& e) { c.scene.molecule.name = e.value; };
    t["molecule.mass_u"] = number(&Scene::molecule, &Molecule::mass_u);
    t["molecule.dipole_debye"] = number(&Scene::molecule, &Molecule::dipole_debye);

    t["grating.name"] = [](ExperimentConfig& c, const Entry& e) { c.scene.grating.name = e.value; };
    t["grating.period_nm"] = number(&Scene::grating, &Grating::period_nm);
    t["grating.slit_width_nm"] = number(&Scene::grating, &Grating::slit_width_nm);
    t["grating.thickness_nm"] = number(&Scene::grating, &Grating::thickness_nm);
    t["grating.n_slits"] = integer(&Scene::grating, &Grating::n_slits);
    t["grating.effective_slit_width_nm"] = [](ExperimentConfig& c, const Entry& e) {
      c.scene.effective_slit_width_nm = as_double(e);
    };

    t["geometry.source_to_grating_m"] = number(&Scene::geometry, &BeamlineGeometry::source_to_grating_m);
    t["geometry.grating_to_detector_m"] = number(&Scene::geometry, &BeamlineGeometry::grating_to_detector_m);
    t["geometry.collimation_divergence_rad"] =
        number(&Scene::geometry, &BeamlineGeometry::collimation_divergence_rad);
    t["geometry.beam_width_at_detector_um"] = number(&Scene::geometry, &BeamlineGeometry::beam_width_at_detector_um);

    t["detector.pixel_pitch_um"] = number(&Scene::detector, &DetectorConfig::pixel_pitch_um);
    t["detector.width_px"] = integer(&Scene::detector, &DetectorConfig::width_px);
    t["detector.height_px"] = integer(&Scene::detector, &DetectorConfig::height_px);
    t["detector.reference_row"] = integer(&Scene::detector, &DetectorConfig::reference_row);
    t["detector.reference_velocity"] = number(&Scene::detector, &DetectorConfig::reference_velocity);
    t["detector.exposure_scale"] = number(&Scene::detector, &DetectorConfig::exposure_scale);

    t["velocity.distribution"] = [](ExperimentConfig& c, const Entry& e) {
      if (e.value == "thermal")
        c.scene.velocities.kind = VelocityDistribution::Kind::ThermalEffusive;
      else if (e.value == "gaussian")
        c.scene.velocities.kind = VelocityDistribution::Kind::GaussianBand;
      else
        throw FormatError("velocity distribution must be \"thermal\" or \"gaussian\"", e.line);
    };
    t["velocity.temperature_K"] = number(&Scene::velocities, &VelocityDistribution::temperature_K);
    t["velocity.center"] = number(&Scene::velocities, &VelocityDistribution::v_center);
    t["velocity.sigma"] = number(&Scene::velocities, &VelocityDistribution::v_sigma);

    t["dephasing.kappa"] = number(&Scene::dephasing, &DephasingModel::kappa);
    t["dephasing.base_width_um"] = number(&Scene::dephasing, &DephasingModel::base_width_um);

    t["background.amplitude"] = number(&Scene::background, &BackgroundModel::amplitude);
    for (int i = 0; i < 6; ++i)
      t["background.c" + std::to_string(i)] = [i](ExperimentConfig& c, const Entry& e) {
        c.scene.background.coefficients[static_cast<std::size_t>(i)] = as_double(e);
      };

    t["noise.shot_noise"] = [](ExperimentConfig& c, const Entry& e) { c.scene.shot_noise = as_bool(e); };
    return t;
  }();
  return table;
}

// Applies the entries (presets first) and validates each group, blaming the
// first line of the offending section.
ExperimentConfig build(const std::vector<Entry>& entries) {
  ExperimentConfig cfg;
  std::map<std::string, int> first_line;
  for (const auto& e : entries) first_line.emplace(e.section, e.line);

  for (const auto& e : entries) {
    if (e.key != "preset") continue;
    if (e.section == "molecule") {
      const auto m = catalog::molecule(e.value);
      if (!m) throw FormatError("unknown molecule preset '" + e.value + "'", e.line);
      cfg.scene.molecule = *m;
    } else if (e.section == "grating") {
      const auto g = catalog::grating(e.value);
      if (!g) throw FormatError("unknown grating preset '" + e.value + "'", e.line);
      cfg.scene.grating = *g;
    } else {
      throw FormatError("presets exist only for [molecule] and [grating]", e.line);
    }
  }
  const auto& table = setters();
  for (const auto& e : entries) {
    if (e.key == "preset") continue;
    const std::string full = e.section.empty() ? e.key : e.section + "." + e.key;
    const auto it = table.find(full);
    if (it == table.end()) throw FormatError("unknown key '" + full + "'", e.line);
    it->second(cfg, e);
  }

  const auto check = [&](const std::string& section, const auto& validate) {
    try {
      validate();
    } catch (const DomainError& err) {
      const auto it = first_line.find(section);
      throw FormatError(std::string(err.what()), it == first_line.end() ? 0 : it->second);
    }
  };
  const Scene& s = cfg.scene;
  check("molecule", [&] { s.molecule.validate(); });
  check("grating", [&] { s.grating.validate(); });
  check("geometry", [&] { s.geometry.validate(); });
  check("detector", [&] { s.detector.validate(); });
  check("velocity", [&] { s.velocities.validate(); });
  check("dephasing", [&] { s.dephasing.validate(); });
  check("background", [&] { s.background.validate(); });
  for (const auto& e : entries)
    if (e.section == "grating" && e.key == "effective_slit_width_nm") {
      try {
        s.validate();
      } catch (const DomainError& err) {
        throw FormatError(err.what(), e.line);
      }
    }
  s.validate();
  return cfg;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  const auto entries = tokenize(in);
  for (const auto& e : entries)
    if (e.section == "image") throw FormatError("[image] is reserved for image sidecars", e.line);
  return build(entries);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& config) {
  const Scene& s = config.scene;
  const auto num = [](double v) { return format_double(v); };
  out << "seed = " << config.seed << "\n";
  out << "\n[molecule]\n"
      << "name = " << quoted(s.molecule.name) << "\n"
      << "mass_u = " << num(s.molecule.mass_u) << "\n"
      << "dipole_debye = " << num(s.molecule.dipole_debye) << "\n";
  out << "\n[grating]\n"
      << "name = " << quoted(s.grating.name) << "\n"
      << "period_nm = " << num(s.grating.period_nm) << "\n"
      << "slit_width_nm = " << num(s.grating.slit_width_nm) << "\n"
      << "thickness_nm = " << num(s.grating.thickness_nm) << "\n"
      << "n_slits = " << s.grating.n_slits << "\n";
  if (s.effective_slit_width_nm) out << "effective_slit_width_nm = " << num(*s.effective_slit_width_nm) << "\n";
  out << "\n[geometry]\n"
      << "source_to_grating_m = " << num(s.geometry.source_to_grating_m) << "\n"
      << "grating_to_detector_m = " << num(s.geometry.grating_to_detector_m) << "\n"
      << "collimation_divergence_rad = " << num(s.geometry.collimation_divergence_rad) << "\n"
      << "beam_width_at_detector_um = " << num(s.geometry.beam_width_at_detector_um) << "\n";
  out << "\n[detector]\n"
      << "pixel_pitch_um = " << num(s.detector.pixel_pitch_um) << "\n"
      << "width_px = " << s.detector.width_px << "\n"
      << "height_px = " << s.detector.height_px << "\n"
      << "reference_row = " << s.detector.reference_row << "\n"
      << "reference_velocity = " << num(s.detector.reference_velocity) << "\n"
      << "exposure_scale = " << num(s.detector.exposure_scale) << "\n";
  out << "\n[velocity]\n"
      << "distribution = "
      << quoted(s.velocities.kind == VelocityDistribution::Kind::ThermalEffusive ? "thermal" : "gaussian") << "\n"
      << "temperature_K = " << num(s.velocities.temperature_K) << "\n"
      << "center = " << num(s.velocities.v_center) << "\n"
      << "sigma = " << num(s.velocities.v_sigma) << "\n";
  out << "\n[dephasing]\n"
      << "kappa = " << num(s.dephasing.kappa) << "\n"
      << "base_width_um = " << num(s.dephasing.base_width_um) << "\n";
  out << "\n[background]\n"
      << "amplitude = " << num(s.background.amplitude) << "\n";
  for (std::size_t i = 0; i < 6; ++i) out << "c" << i << " = " << num(s.background.coefficients[i]) << "\n";
  out << "\n[noise]\n"
      << "shot_noise = " << (s.shot_noise ? "true" : "false") << "\n";
}

std::string config_to_string(const ExperimentConfig& config) {
  std::ostringstream out;
  write_config(out, config);
  return out.str();
}

std::string sidecar_path(const std::string& image_path) { return image_path + ".meta"; }

void write_sidecar(std::ostream& out, const ExperimentConfig& config, const DetectorImage& image) {
  write_config(out, config);
  out << "\n[image]\n"
      << "format = \"pgm16\"\n"
      << "width_px = " << image.pixels.cols() << "\n"
      << "height_px = " << image.pixels.rows() << "\n"
      << "seed = " << image.seed << "\n";
  for (const auto& [key, value] : image.provenance)
    if (valid_name(key)) out << key << " = " << quoted(value) << "\n";
}

ImageSidecar read_sidecar(std::istream& in) {
  auto entries = tokenize(in);
  ImageSidecar sidecar;
  std::vector<Entry> config_entries;
  for (auto& e : entries) {
    if (e.section == "image")
      sidecar.image[e.key] = e.value;
    else
      config_entries.push_back(std::move(e));
  }
  if (!config_entries.empty()) sidecar.config = build(config_entries);
  return sidecar;
}

ImageSidecar load_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sidecar '" + path + "'");
  return read_sidecar(in);
}

}  // namespace mwdiff
