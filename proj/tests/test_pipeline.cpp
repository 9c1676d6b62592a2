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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "mwdiff/config.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/kinematics.hpp"
#include "mwdiff/pipeline.hpp"
#include "mwdiff/synthesis.hpp"

using namespace mwdiff;
using doctest::Approx;

namespace {

DetectorImage as_image(const ImageArray& pixels) {
  DetectorImage img;
  img.pixels = pixels;
  img.config.width_px = static_cast<int>(pixels.cols());
  img.config.height_px = static_cast<int>(pixels.rows());
  return img;
}

BandAnalysisOptions options_for(const Scene& s) {
  BandAnalysisOptions o;
  o.molecule = s.molecule;
  o.grating = s.grating;
  o.geometry = s.geometry;
  return o;
}

Scene config_scene(const char* name) {
  return load_config(std::string(MWDIFF_SOURCE_DIR) + "/configs/" + name).scene;
}

double rms(const ImageArray& a) { return std::sqrt(a.square().mean()); }

// M1 through G1 on a short detector whose centre row is anchored at `v`.
Scene m1_band_scene(double v) {
  Scene s;
  s.molecule = *catalog::molecule("M1");
  s.grating = *catalog::grating("G1");
  s.detector.height_px = 80;
  s.detector.reference_row = 40;
  s.detector.reference_velocity = v;
  return s;
}

}  // namespace

// ------------------------------------------------------------- background

TEST_CASE("margin mask") {
  const MaskArray m = margin_column_mask(10, 100, 0.1);
  CHECK(m.count() == 10 * 20);
  CHECK(m(3, 0));
  CHECK(m(3, 9));
  CHECK_FALSE(m(3, 10));
  CHECK_FALSE(m(3, 89));
  CHECK(m(3, 90));
  CHECK_THROWS_AS(margin_column_mask(10, 100, 0.6), DomainError);
}

TEST_CASE("background correction of an empty image is a no-op") {
  const DetectorImage img = as_image(ImageArray::Zero(60, 120));
  BackgroundFit fit;
  const DetectorImage out = background_correct(img, 0.1, &fit);
  CHECK(out.pixels.abs().maxCoeff() == 0.0);
  for (double c : fit.coefficients) CHECK(c == Approx(0.0));
  CHECK(out.provenance.count("background") == 1);
}

TEST_CASE("a pure quadratic background is removed") {
  BackgroundModel bg;
  bg.amplitude = 40.0;
  bg.coefficients = {1.0, 0.2, -0.3, 0.4, 0.1, 0.25};

  const DetectorImage clean = as_image(bg.render(120, 300));
  BackgroundFit fit;
  const DetectorImage out = background_correct(clean, 0.1, &fit);
  CHECK(rms(out.pixels) < 1e-9 * bg.amplitude);
  for (std::size_t k = 0; k < 6; ++k) CHECK(fit.coefficients[k] == Approx(bg.amplitude * bg.coefficients[k]));
  CHECK(fit.masked_pixels == 120 * 60);

  // With shot noise the recovered surface stays within 1 % of the amplitude.
  const DetectorImage noisy = add_poisson_noise(clean, 21);
  background_correct(noisy, 0.1, &fit);
  BackgroundModel recovered;
  recovered.amplitude = 1.0;
  recovered.coefficients = fit.coefficients;
  CHECK(rms(recovered.render(120, 300) - clean.pixels) < 0.01 * bg.amplitude);
  CHECK(fit.masked_rms == Approx(std::sqrt(50.0)).epsilon(0.3));
}

TEST_CASE("corrected pixels are clamped at zero") {
  ImageArray px = ImageArray::Constant(40, 100, 10.0);
  px.block(10, 40, 20, 20).setZero();  // a hole below the background level
  const DetectorImage out = background_correct(as_image(px), 0.1);
  CHECK(out.pixels.minCoeff() == 0.0);
  CHECK(out.pixels.block(10, 40, 20, 20).abs().maxCoeff() == 0.0);
}

TEST_CASE("background correction needs enough independent pixels") {
  const DetectorImage img = as_image(ImageArray::Constant(40, 100, 3.0));
  MaskArray few = MaskArray::Constant(40, 100, false);
  few.block(0, 0, 5, 5).setConstant(true);
  CHECK_THROWS_AS(background_correct(img, few), InsufficientDataError);
  // Plenty of pixels, but a single column cannot pin down the x terms.
  MaskArray tall = MaskArray::Constant(40, 100, false);
  tall.col(7).setConstant(true);
  tall.col(8).setConstant(true);
  CHECK_THROWS_AS(background_correct(img, tall), InsufficientDataError);
  CHECK_THROWS_AS(background_correct(img, MaskArray::Constant(20, 100, true)), DomainError);
}

// --------------------------------------------------------------- binning

TEST_CASE("vertical binning") {
  ImageArray px(50, 600);
  for (int r = 0; r < 50; ++r)
    for (int c = 0; c < 600; ++c) px(r, c) = 1.0 + 0.01 * r + 0.001 * c;
  const DetectorImage img = as_image(px);

  const Trace1D ones = vertical_bin(as_image(ImageArray::Ones(50, 600)), 0, 50);
  CHECK((ones.intensities == 50.0).all());
  CHECK(ones.positions.size() == 600);
  CHECK(ones.positions[0] == Approx(img.config.column_position(0)));

  const Trace1D single = vertical_bin(img, 17, 18);
  CHECK((single.intensities == px.row(17).transpose()).all());
  CHECK(single.row_lo == 17);
  CHECK(single.row_hi == 18);

  // Partitioning the rows conserves the total.
  double parts = 0.0;
  for (int lo = 0; lo < 50; lo += 10) parts += vertical_bin(img, lo, lo + 10).intensities.sum();
  CHECK(parts == Approx(px.sum()).epsilon(1e-13));

  CHECK_THROWS_AS(vertical_bin(img, 10, 10), DomainError);
  CHECK_THROWS_AS(vertical_bin(img, -1, 5), DomainError);
  CHECK_THROWS_AS(vertical_bin(img, 40, 51), DomainError);
}

// ---------------------------------------------------------- band analysis

TEST_CASE("a band at the 4.6 pm anchor gives its velocity back") {
  const Scene s = m1_band_scene(168.6);
  const DetectorImage img = synthesize_image(s, 5);
  const BandResult b = analyze_band(img, 20, 60, options_for(s));
  CHECK(b.spacing == Approx(33.2e-6).epsilon(0.01));
  CHECK(b.velocity == Approx(168.6).epsilon(0.01));
  CHECK(b.gravity_velocity == Approx(168.6).epsilon(1e-3));
  CHECK(b.velocity == Approx(velocity_from_peak_spacing(b.spacing, s.molecule, s.grating, s.geometry)));
  CHECK(b.width == Approx(15e-6).epsilon(0.05));
  CHECK(b.fit.status == LmStatus::Converged);
  CHECK(b.confidence == "high");
  CHECK(b.row_lo == 20);
  CHECK(b.row_hi == 60);
}

TEST_CASE("band analysis rejects an empty band") {
  Scene s = m1_band_scene(200.0);
  s.detector.exposure_scale = 0.0;
  s.shot_noise = false;
  const DetectorImage img = synthesize_image(s, 1);
  CHECK_THROWS_AS(analyze_band(img, 0, 40, options_for(s)), InitializationError);
  BandAnalysisOptions bad = options_for(s);
  bad.max_orders = 0;
  CHECK_THROWS_AS(analyze_band(img, 0, 40, bad), DomainError);
}

TEST_CASE("background correction does not bias the comb fit") {
  // Paired synthesis: the same pattern with and without an illumination
  // background. The pattern is narrow enough to leave the margins dark.
  Scene s = m1_band_scene(300.0);
  s.detector.width_px = 1000;
  s.detector.exposure_scale = 400.0;
  const BandAnalysisOptions opt = options_for(s);
  const BandResult noisy = analyze_band(synthesize_image(s, 3), 20, 60, opt);

  s.shot_noise = false;
  const BandResult plain = analyze_band(synthesize_image(s, 3), 20, 60, opt);
  s.background.amplitude = 30.0;
  s.background.coefficients = {1.0, 0.3, -0.2, 0.4, 0.1, 0.2};
  const BandResult corrected = analyze_band(background_correct(synthesize_image(s, 3)), 20, 60, opt);
  const BandResult uncorrected = analyze_band(synthesize_image(s, 3), 20, 60, opt);

  CHECK(std::abs(corrected.spacing - plain.spacing) < noisy.spacing_uncertainty);
  CHECK(std::abs(corrected.width - plain.width) < noisy.width_uncertainty);
  CHECK(std::abs(corrected.fit.center_offset - plain.fit.center_offset) < noisy.fit.center_uncertainty);
  // The tilted background left in place does shift the fit.
  CHECK(std::abs(uncorrected.width - plain.width) > noisy.width_uncertainty);
}

TEST_CASE("non-polar widths do not depend on velocity") {
  const Scene s = config_scene("m1_g1.cfg");
  const DetectorImage img = background_correct(synthesize_image(s, 7));
  const PeakWidthSeries series = peak_width_vs_velocity(img, 40, options_for(s));
  REQUIRE(series.entries.size() >= 10);
  double lo = 1e9, hi = 0.0;
  for (const auto& e : series.entries) {
    lo = std::min(lo, e.width);
    hi = std::max(hi, e.width);
  }
  CHECK(series.entries.front().velocity < 200.0);
  CHECK(series.entries.back().velocity > 330.0);
  CHECK((hi - lo) / lo < 0.05);
  CHECK(std::is_sorted(series.entries.begin(), series.entries.end(),
                       [](const BandResult& a, const BandResult& b) { return a.velocity < b.velocity; }));
}

TEST_CASE("polar molecules broaden towards low velocity") {
  const Scene s = config_scene("m4_g1.cfg");
  const DetectorImage img = background_correct(synthesize_image(s, 11));
  const PeakWidthSeries series = peak_width_vs_velocity(img, 40, options_for(s));
  REQUIRE(series.entries.size() >= 10);
  const auto near_300 = std::min_element(series.entries.begin(), series.entries.end(), [](const auto& a, const auto& b) {
    return std::abs(a.velocity - 300.0) < std::abs(b.velocity - 300.0);
  });
  CHECK(near_300->width >= 30e-6);
  // Widths fall monotonically with velocity.
  for (std::size_t i = 1; i < series.entries.size(); ++i)
    CHECK(series.entries[i].width < series.entries[i - 1].width);
}

TEST_CASE("without dephasing the dipole moment is irrelevant") {
  Scene a = m1_band_scene(250.0);
  a.detector.height_px = 160;
  a.dephasing.kappa = 0.0;
  Scene b = a;
  b.molecule.dipole_debye = 8.2;
  const DetectorImage ia = synthesize_image(a, 9);
  const DetectorImage ib = synthesize_image(b, 9);
  CHECK((ia.pixels == ib.pixels).all());
  const PeakWidthSeries sa = peak_width_vs_velocity(ia, 40, options_for(a));
  const PeakWidthSeries sb = peak_width_vs_velocity(ib, 40, options_for(b));
  REQUIRE(sa.entries.size() == sb.entries.size());
  for (std::size_t i = 0; i < sa.entries.size(); ++i) {
    CHECK(sa.entries[i].width == sb.entries[i].width);
    CHECK(sa.entries[i].velocity == sb.entries[i].velocity);
  }
}

TEST_CASE("series needs three bands and two fits") {
  const Scene s = m1_band_scene(250.0);
  const DetectorImage img = synthesize_image(s, 2);
  CHECK_THROWS_AS(peak_width_vs_velocity(img, 40, options_for(s)), InsufficientDataError);
  CHECK_THROWS_AS(peak_width_vs_velocity(img, 0, options_for(s)), DomainError);

  // Signal confined to a narrow velocity range: the dark bands fail, with reasons.
  Scene narrow = s;
  narrow.detector.height_px = 200;
  narrow.detector.reference_row = 100;
  narrow.velocities.kind = VelocityDistribution::Kind::GaussianBand;
  narrow.velocities.v_center = 250.0;
  narrow.velocities.v_sigma = 4.0;
  const PeakWidthSeries series = peak_width_vs_velocity(synthesize_image(narrow, 2), 40, options_for(narrow));
  CHECK(series.entries.size() >= 2);
  CHECK(series.failures.size() >= 1);
  for (const auto& f : series.failures) {
    CHECK_FALSE(f.reason.empty());
    CHECK(f.row_hi - f.row_lo == 40);
  }
  CHECK(series.entries.size() + series.failures.size() == 5);

  Scene dark = narrow;
  dark.velocities.v_center = 900.0;
  CHECK_THROWS_AS(peak_width_vs_velocity(synthesize_image(dark, 2), 40, options_for(dark)), InsufficientDataError);
}

TEST_CASE("results do not depend on the thread count") {
  Scene s = m1_band_scene(250.0);
  s.detector.height_px = 240;
  const DetectorImage img = synthesize_image(s, 4);
  BandAnalysisOptions opt = options_for(s);
  const PeakWidthSeries one = peak_width_vs_velocity(img, 40, opt);
  opt.threads = 3;
  const PeakWidthSeries three = peak_width_vs_velocity(img, 40, opt);
  REQUIRE(one.entries.size() == three.entries.size());
  for (std::size_t i = 0; i < one.entries.size(); ++i) {
    CHECK(one.entries[i].band == three.entries[i].band);
    CHECK(one.entries[i].spacing == three.entries[i].spacing);
    CHECK(one.entries[i].width == three.entries[i].width);
    CHECK(one.entries[i].fit.iterations == three.entries[i].fit.iterations);
  }
}
