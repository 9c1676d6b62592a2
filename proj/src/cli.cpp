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

#include "mwdiff/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "mwdiff/config.hpp"
#include "mwdiff/constants.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/kinematics.hpp"
#include "mwdiff/pipeline.hpp"
#include "mwdiff/savitzky_golay.hpp"
#include "mwdiff/sem.hpp"
#include "mwdiff/slit_fit.hpp"
#include "mwdiff/svg.hpp"

#ifndef MWDIFF_VERSION
#define MWDIFF_VERSION "0.0.0"
#endif

namespace mwdiff::cli {
namespace {

// Input/output problems map to the usage exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Analysis-stage failures carried up to the exit-code mapping.
struct AnalysisFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "mwdiff";
  for (std::size_t i = 1; i < args.size(); ++i) s += " " + args[i];
  return s;
}

std::string report_header(const std::vector<std::string>& args) {
  return "# mwdiff " + version() + "\n# command = " + join_args(args) + "\n";
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::istringstream in(config_to_string(cfg));
  std::string line, out;
  while (std::getline(in, line))
    if (!line.empty()) out += "# config: " + line + "\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Written to a temporary name first so a failure never leaves a partial file.
void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move output into place at '" + path + "': " + ec.message());
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-")
    out << content;
  else
    write_file(path, content);
}

DetectorImage load_detector_image(const std::string& path, ExperimentConfig* config_out = nullptr) {
  std::istringstream pgm(read_file(path));
  DetectorImage image;
  image.pixels = read_pgm(pgm);
  const std::string meta = sidecar_path(path);
  if (!std::filesystem::exists(meta)) throw IoError("missing sidecar '" + meta + "'");
  const ImageSidecar sidecar = load_sidecar(meta);
  if (!sidecar.config) throw FormatError("sidecar '" + meta + "' carries no experiment configuration", 0);
  image.config = sidecar.config->scene.detector;
  if (const auto it = sidecar.image.find("seed"); it != sidecar.image.end()) image.seed = std::stoull(it->second);
  image.validate();
  if (config_out) *config_out = *sidecar.config;
  return image;
}

std::string kv(const std::string& key, double value) { return key + " = " + format_double(value) + "\n"; }
std::string kv(const std::string& key, const std::string& value) { return key + " = " + value + "\n"; }
std::string kv(const std::string& key, int value) { return key + " = " + std::to_string(value) + "\n"; }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  bool plain = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(a.config);
  } catch (const FormatError& e) {
    throw FormatError(a.config + ": " + e.what(), 0);
  }
  if (a.seed) cfg.seed = *a.seed;
  const DetectorImage image = synthesize_image(cfg.scene, cfg.seed, std::max(1, a.threads));

  std::ostringstream pgm, meta;
  write_pgm(pgm, image.pixels, a.plain);
  write_sidecar(meta, cfg, image);
  write_file(a.out, pgm.str());
  write_file(sidecar_path(a.out), meta.str());
  out << "wrote " << a.out << " (" << image.pixels.cols() << "x" << image.pixels.rows() << ", seed " << cfg.seed
      << ", " << format_double(image.pixels.sum()) << " counts) and " << sidecar_path(a.out) << "\n";
  return kOk;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string image;
  int bands = 40;
  int sg_window = 0;
  int sg_degree = 2;
  int max_orders = 5;
  double background_margin = 0.1;
  bool no_background = false;
  std::string out;
  std::string format = "csv";
  std::string traces;
  int threads = 1;
};

PlotSpec width_plot(const std::vector<double>& v, const std::vector<double>& w, const std::vector<double>& dw,
                    const std::string& title) {
  PlotSeries s;
  s.x = Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  s.y = Eigen::Map<const Eigen::ArrayXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  s.y_error = Eigen::Map<const Eigen::ArrayXd>(dw.data(), static_cast<Eigen::Index>(dw.size()));
  s.markers = true;
  s.label = "fitted width w";
  PlotSpec spec;
  spec.title = title;
  spec.x_label = "velocity (m/s)";
  spec.y_label = "peak width w (um)";
  spec.series.push_back(std::move(s));
  return spec;
}

int cmd_analyze(const AnalyzeArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  const DetectorImage raw = load_detector_image(a.image, &cfg);

  DetectorImage image = raw;
  std::string background = "none";
  try {
    if (!a.no_background) {
      BackgroundFit bg;
      image = background_correct(raw, a.background_margin, &bg);
      background = "quadratic surface on " + std::to_string(bg.masked_pixels) + " margin pixels, rms " +
                   format_double(bg.masked_rms);
    }
  } catch (const InsufficientDataError& e) {
    throw AnalysisFailure(std::string("background correction: ") + e.what());
  }

  BandAnalysisOptions opt;
  opt.molecule = cfg.scene.molecule;
  opt.grating = cfg.scene.grating;
  opt.geometry = cfg.scene.geometry;
  opt.max_orders = a.max_orders;
  opt.sg_window = a.sg_window;
  opt.sg_degree = a.sg_degree;
  opt.threads = std::max(1, a.threads);
  if (a.sg_window > 0) savitzky_golay_weights(a.sg_window, a.sg_degree, a.sg_window / 2);  // validates early

  PeakWidthSeries series;
  try {
    series = peak_width_vs_velocity(image, a.bands, opt);
  } catch (const InsufficientDataError& e) {
    throw AnalysisFailure(e.what());
  }
  for (const auto& f : series.failures)
    err << "band " << f.band << " (rows " << f.row_lo << "-" << f.row_hi - 1 << ") skipped: " << f.reason << "\n";

  if (a.format == "svg") {
    std::vector<double> v, w, dw;
    for (const auto& e : series.entries) {
      v.push_back(e.velocity);
      w.push_back(e.width / constants::um);
      dw.push_back(e.width_uncertainty / constants::um);
    }
    emit(a.out, render_svg(width_plot(v, w, dw, "Peak width vs velocity: " + cfg.scene.molecule.name)), out);
  } else {
    std::string r = report_header(args) + config_echo(cfg);
    r += kv("image", a.image);
    r += kv("band_height_rows", a.bands);
    r += kv("n_slits", cfg.scene.grating.n_slits);
    r += kv("background", background);
    r += kv("savitzky_golay", a.sg_window > 0 ? std::to_string(a.sg_window) + "/" + std::to_string(a.sg_degree)
                                               : std::string("off"));
    r += kv("bands_total", static_cast<int>(series.entries.size() + series.failures.size()));
    r += kv("bands_fitted", static_cast<int>(series.entries.size()));
    r += "band,row_lo,row_hi,velocity_m_s,velocity_uncertainty_m_s,gravity_velocity_m_s,spacing_m,"
         "spacing_uncertainty_m,width_m,width_uncertainty_m,fwhm_m,center_offset_m,y0,n_orders,"
         "amplitude_asymmetry,residual_rms,iterations,status,confidence,init\n";
    for (const auto& e : series.entries) {
      const double dv = e.velocity * e.spacing_uncertainty / e.spacing;
      r += std::to_string(e.band) + "," + std::to_string(e.row_lo) + "," + std::to_string(e.row_hi) + "," +
           format_double(e.velocity) + "," + format_double(dv) + "," + format_double(e.gravity_velocity) + "," +
           format_double(e.spacing) + "," + format_double(e.spacing_uncertainty) + "," + format_double(e.width) +
           "," + format_double(e.width_uncertainty) + "," + format_double(e.fit.fwhm()) + "," +
           format_double(e.fit.center_offset) + "," + format_double(e.fit.y0) + "," +
           std::to_string(e.fit.orders.size()) + "," + format_double(e.fit.amplitude_asymmetry()) + "," +
           format_double(e.fit.residual_rms) + "," + std::to_string(e.fit.iterations) + "," +
           to_string(e.fit.status) + "," + e.confidence + "," + e.init_source + "\n";
    }
    for (const auto& f : series.failures)
      r += "# band " + std::to_string(f.band) + " rows " + std::to_string(f.row_lo) + "-" +
           std::to_string(f.row_hi - 1) + " skipped: " + f.reason + "\n";
    emit(a.out, r, out);
  }

  if (!a.traces.empty()) {
    std::filesystem::create_directories(a.traces);
    for (const auto& e : series.entries) {
      std::ostringstream t;
      write_trace_csv(t, vertical_bin(image, e.row_lo, e.row_hi));
      write_file((std::filesystem::path(a.traces) / ("band_" + std::to_string(e.band) + ".csv")).string(), t.str());
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- fit-slit

struct FitSlitArgs {
  std::string trace;
  std::optional<double> wavelength_pm;
  std::optional<double> velocity;
  std::string molecule = "M1";
  std::string grating;
  std::optional<double> period_nm;
  std::optional<double> slit_width_nm;
  double z = 0.70;
  int n_slits = 10;
  std::string out;
};

int cmd_fit_slit(const FitSlitArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::istringstream text(read_file(a.trace));
  const Trace1D trace = read_trace_csv(text);

  SlitFitKnown known;
  known.n_slits = a.n_slits;
  known.z_m = a.z;
  std::optional<double> geometric_s = a.slit_width_nm;
  if (!a.grating.empty()) {
    const auto g = catalog::grating(a.grating);
    if (!g) throw DomainError("unknown grating '" + a.grating + "'");
    known.period_nm = g->period_nm;
    if (!geometric_s) geometric_s = g->slit_width_nm;
  }
  if (a.period_nm) known.period_nm = *a.period_nm;
  if (!(known.period_nm > 0)) throw DomainError("a grating period is required (--period-nm or --grating)");
  if (a.wavelength_pm) {
    known.wavelength_m = *a.wavelength_pm * constants::pm;
  } else if (a.velocity) {
    const auto m = catalog::molecule(a.molecule);
    if (!m) throw DomainError("unknown molecule '" + a.molecule + "'");
    known.wavelength_m = de_broglie_wavelength(*m, *a.velocity);
  } else {
    throw DomainError("a wavelength is required (--wavelength-pm or --velocity)");
  }
  known.validate();

  // Independent check of the assumed wavelength: the trace's own period
  // against lambda z / d.
  const double expected_spacing = known.first_order_spacing();
  std::optional<double> measured_spacing;
  if (const auto period = autocorrelation_period(trace.intensities)) measured_spacing = *period * trace.step();
  std::string spacing_check = "undetermined";
  if (measured_spacing) {
    const double mismatch = std::abs(*measured_spacing / expected_spacing - 1.0);
    spacing_check = mismatch > 0.05 ? "mismatch" : "ok";
    if (mismatch > 0.05)
      err << "warning: trace period " << format_double(*measured_spacing) << " m differs from lambda z / d = "
          << format_double(expected_spacing) << " m by " << format_double(100 * mismatch)
          << " %; check the wavelength and geometry\n";
  }

  SlitWidthFit fit;
  try {
    fit = fit_effective_slit_width(trace, known);
  } catch (const ConvergenceError& e) {
    throw AnalysisFailure(e.what());
  }

  std::string r = report_header(args);
  r += kv("trace", a.trace);
  r += kv("wavelength_m", known.wavelength_m);
  r += kv("period_nm", known.period_nm);
  r += kv("z_m", known.z_m);
  r += kv("n_slits", known.n_slits);
  r += kv("s_eff_nm", fit.s_eff_nm);
  r += kv("s_eff_uncertainty_nm", fit.s_eff_uncertainty_nm);
  r += kv("c1", fit.c1);
  r += kv("c1_uncertainty", fit.c1_uncertainty);
  r += kv("c2", fit.c2);
  r += kv("c2_uncertainty", fit.c2_uncertainty);
  r += kv("residual_rms", fit.residual_rms);
  r += kv("iterations", fit.iterations);
  r += kv("starts_tried", fit.starts_tried);
  r += kv("starts_converged", fit.starts_converged);
  r += kv("status", to_string(fit.status));
  if (geometric_s) {
    r += kv("geometric_slit_width_nm", *geometric_s);
    r += kv("reduction_factor", effective_slit_reduction_factor(*geometric_s, fit.s_eff_nm));
  }
  r += kv("expected_spacing_m", expected_spacing);
  if (measured_spacing) r += kv("measured_spacing_m", *measured_spacing);
  r += kv("spacing_check", spacing_check);
  emit(a.out, r, out);
  return kOk;
}

// --------------------------------------------------------------------- sem

struct SemArgs {
  std::string image;
  std::optional<double> scale;
  int n_slits = 11;
  std::string out;
};

int cmd_sem(const SemArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if (a.n_slits < 3) throw DomainError("--n-slits must be at least 3");
  SemImage sem;
  std::istringstream pgm(read_file(a.image));
  sem.pixels = read_pgm(pgm);
  if (a.scale) {
    sem.scale_nm_per_px = *a.scale;
  } else {
    const std::string meta = sidecar_path(a.image);
    if (!std::filesystem::exists(meta)) throw DomainError("no --scale given and no sidecar '" + meta + "'");
    const auto sidecar = load_sidecar(meta);
    const auto it = sidecar.image.find("scale_nm_per_px");
    if (it == sidecar.image.end()) throw DomainError("sidecar '" + meta + "' has no scale_nm_per_px");
    sem.scale_nm_per_px = std::stod(it->second);
  }

  GratingMetrology m;
  try {
    m = fit_periodic_dips(sem_trace(sem), a.n_slits, sem.scale_nm_per_px);
  } catch (const InitializationError& e) {
    throw AnalysisFailure(e.what());
  } catch (const ConvergenceError& e) {
    throw AnalysisFailure(e.what());
  }

  std::string r = report_header(args);
  r += kv("image", a.image);
  r += kv("scale_nm_per_px", sem.scale_nm_per_px);
  r += kv("n_slits", m.n_slits_fitted);
  r += kv("period_nm", m.period_nm);
  r += kv("period_uncertainty_nm", m.period_uncertainty_nm);
  r += kv("slit_width_fwhm_nm", m.slit_width_nm);
  r += kv("slit_width_uncertainty_nm", m.slit_width_uncertainty_nm);
  r += kv("dip_half_depth_width_nm", m.half_depth_width_nm);
  r += kv("residual_rms", m.residual_rms);
  r += kv("iterations", m.fit.iterations);
  r += kv("status", to_string(m.fit.status));
  emit(a.out, r, out);
  return kOk;
}

// --------------------------------------------------------------- synth-sem

struct SynthSemArgs {
  std::string grating = "G1";
  std::optional<double> period_nm;
  std::optional<double> slit_width_nm;
  SemSynthesis params;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_synth_sem(SynthSemArgs a, std::ostream& out) {
  const auto g = catalog::grating(a.grating);
  if (!g) throw DomainError("unknown grating '" + a.grating + "'");
  a.params.period_nm = a.period_nm.value_or(g->period_nm);
  a.params.slit_width_nm = a.slit_width_nm.value_or(g->slit_width_nm);
  const SemImage image = synthesize_sem(a.params, a.seed);

  std::ostringstream pgm;
  write_pgm(pgm, image.pixels);
  std::string meta = "[image]\n";
  meta += kv("format", std::string("\"pgm16\""));
  meta += kv("kind", std::string("\"sem\""));
  meta += kv("scale_nm_per_px", image.scale_nm_per_px);
  meta += kv("period_nm", a.params.period_nm);
  meta += kv("slit_width_nm", a.params.slit_width_nm);
  meta += kv("n_slits", a.params.n_slits);
  meta += kv("edge_blur_nm", a.params.edge_blur_nm);
  meta += "seed = " + std::to_string(a.seed) + "\n";
  write_file(a.out, pgm.str());
  write_file(sidecar_path(a.out), meta);
  out << "wrote " << a.out << " (" << image.pixels.cols() << "x" << image.pixels.rows() << ")\n";
  return kOk;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::string input;
  std::string format;  // from the --out extension when empty, else svg
  std::string out;
  std::string rows;
  bool no_background = false;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

int cmd_report(ReportArgs a, std::ostream& out) {
  if (a.format.empty()) a.format = std::filesystem::path(a.out).extension() == ".csv" ? "csv" : "svg";
  const bool is_image = std::filesystem::path(a.input).extension() == ".pgm";
  const std::string text = is_image ? std::string() : read_file(a.input);

  if (!is_image && text.find("\nband,") != std::string::npos) {
    // Analyze report: width against velocity.
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> cols;
    std::vector<double> v, w, dw;
    std::string title = "Peak width vs velocity";
    while (std::getline(in, line)) {
      if (line.rfind("# config: name = ", 0) == 0 && title.find(':') == std::string::npos)
        title += ": " + line.substr(17);
      if (line.rfind("band,", 0) == 0) {
        cols = split(line, ',');
        continue;
      }
      if (cols.empty() || line.empty() || line[0] == '#') continue;
      const auto f = split(line, ',');
      if (f.size() != cols.size()) throw FormatError("malformed report row", 0);
      const auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
          if (cols[i] == name) return std::stod(f[i]);
        throw FormatError("report lacks column '" + name + "'", 0);
      };
      v.push_back(col("velocity_m_s"));
      w.push_back(col("width_m") / constants::um);
      dw.push_back(col("width_uncertainty_m") / constants::um);
    }
    if (a.format == "svg") {
      emit(a.out, render_svg(width_plot(v, w, dw, title)), out);
    } else {
      std::string csv = "velocity_m_s,width_um,width_uncertainty_um\n";
      for (std::size_t i = 0; i < v.size(); ++i)
        csv += format_double(v[i]) + "," + format_double(w[i]) + "," + format_double(dw[i]) + "\n";
      emit(a.out, csv, out);
    }
    return kOk;
  }

  Trace1D trace;
  if (is_image) {
    DetectorImage image = load_detector_image(a.input);
    if (!a.no_background) image = background_correct(image);
    int lo = 0, hi = static_cast<int>(image.pixels.rows());
    if (!a.rows.empty()) {
      const auto parts = split(a.rows, ':');
      if (parts.size() != 2) throw DomainError("--rows expects lo:hi");
      lo = std::stoi(parts[0]);
      hi = std::stoi(parts[1]);
    }
    trace = vertical_bin(image, lo, hi);
  } else {
    std::istringstream in(text);
    trace = read_trace_csv(in);
  }
  if (a.format == "svg") {
    PlotSeries s;
    s.x = trace.positions / constants::um;
    s.y = trace.intensities;
    PlotSpec spec;
    spec.title = "Trace " + std::filesystem::path(a.input).filename().string();
    spec.x_label = "position (um)";
    spec.y_label = "intensity";
    spec.series.push_back(std::move(s));
    emit(a.out, render_svg(spec), out);
  } else {
    std::ostringstream o;
    write_trace_csv(o, trace);
    emit(a.out, o.str(), out);
  }
  return kOk;
}

}  // namespace

std::string version() { return MWDIFF_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Molecular diffraction: synthesis, analysis and grating metrology", "mwdiff"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Synthesize a detector image from a configuration file");
  simulate->add_option("--config", sim.config, "Experiment configuration")->required();
  simulate->add_option("--seed", sim.seed, "Override the configured seed");
  simulate->add_option("--out", sim.out, "Output PGM (sidecar written to <out>.meta)")->required();
  simulate->add_option("--threads", sim.threads, "Worker threads (output does not depend on it)");
  simulate->add_flag("--plain", sim.plain, "Write ASCII PGM (P2)");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Peak width against velocity from a detector image");
  analyze->add_option("image", an.image, "PGM image with sidecar")->required();
  analyze->add_option("--bands", an.bands, "Rows per velocity band");
  analyze->add_option("--sg-window", an.sg_window, "Savitzky-Golay window for initialisation (0 = off)");
  analyze->add_option("--sg-degree", an.sg_degree, "Savitzky-Golay polynomial degree");
  analyze->add_option("--max-orders", an.max_orders, "Largest diffraction order fitted");
  analyze->add_option("--background-margin", an.background_margin, "Width fraction of each signal-free side strip");
  analyze->add_flag("--no-background", an.no_background, "Skip background correction");
  analyze->add_option("--out", an.out, "Report path (stdout if omitted)");
  analyze->add_option("--format", an.format, "Report format")->check(CLI::IsMember({"csv", "svg"}));
  analyze->add_option("--traces", an.traces, "Directory for per-band trace CSVs");
  analyze->add_option("--threads", an.threads, "Worker threads for band fits");

  FitSlitArgs fs;
  auto* fit_slit = app.add_subcommand("fit-slit", "Effective slit width from a diffraction trace");
  fit_slit->add_option("trace", fs.trace, "Trace CSV")->required();
  auto* wl = fit_slit->add_option("--wavelength-pm", fs.wavelength_pm, "de Broglie wavelength");
  fit_slit->add_option("--velocity", fs.velocity, "Velocity (wavelength from --molecule)")->excludes(wl);
  fit_slit->add_option("--molecule", fs.molecule, "Catalog molecule for --velocity");
  fit_slit->add_option("--grating", fs.grating, "Catalog grating supplying d and s");
  fit_slit->add_option("--period-nm", fs.period_nm, "Grating period d");
  fit_slit->add_option("--slit-width-nm", fs.slit_width_nm, "Geometric slit width s for the reduction factor");
  fit_slit->add_option("--z", fs.z, "Grating-detector distance in metres");
  fit_slit->add_option("--n-slits", fs.n_slits, "Coherently illuminated slits N");
  fit_slit->add_option("--out", fs.out, "Report path (stdout if omitted)");

  SemArgs sm;
  auto* sem = app.add_subcommand("sem", "Grating period and slit width from an SEM image");
  sem->add_option("image", sm.image, "PGM image")->required();
  sem->add_option("--scale", sm.scale, "nm per pixel (default: from the sidecar)");
  sem->add_option("--n-slits", sm.n_slits, "Number of slits in the image");
  sem->add_option("--out", sm.out, "Report path (stdout if omitted)");

  SynthSemArgs ss;
  auto* synth_sem = app.add_subcommand("synth-sem", "Synthesize an SEM image of a grating");
  synth_sem->add_option("--grating", ss.grating, "Catalog grating");
  synth_sem->add_option("--period-nm", ss.period_nm, "Override the period");
  synth_sem->add_option("--slit-width-nm", ss.slit_width_nm, "Override the slit width");
  synth_sem->add_option("--n-slits", ss.params.n_slits, "Number of slits");
  synth_sem->add_option("--blur-nm", ss.params.edge_blur_nm, "Edge blur (Gaussian standard deviation)");
  synth_sem->add_option("--scale", ss.params.scale_nm_per_px, "nm per pixel");
  synth_sem->add_option("--height", ss.params.height_px, "Image height in pixels");
  synth_sem->add_option("--seed", ss.seed, "Noise seed");
  synth_sem->add_option("--out", ss.out, "Output PGM")->required();

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Render a trace, image band or analyze report");
  report->add_option("input", rp.input, "Trace CSV, analyze report or PGM image")->required();
  report->add_option("--format", rp.format, "Output format (default: from the --out extension, else svg)")->check(CLI::IsMember({"csv", "svg"}));
  report->add_option("--out", rp.out, "Output path (stdout if omitted)");
  report->add_option("--rows", rp.rows, "Row range lo:hi for image inputs");
  report->add_flag("--no-background", rp.no_background, "Skip background correction for image inputs");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*analyze) return cmd_analyze(an, args, out, err);
    if (*fit_slit) return cmd_fit_slit(fs, args, out, err);
    if (*sem) return cmd_sem(sm, args, out);
    if (*synth_sem) return cmd_synth_sem(ss, out);
    if (*report) return cmd_report(rp, out);
  } catch (const AnalysisFailure& e) {
    err << "analysis failed: " << e.what() << "\n";
    return kAnalysisFailure;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace mwdiff::cli
