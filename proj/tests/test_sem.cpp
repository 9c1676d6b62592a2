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

#include <cmath>

#include "mwdiff/constants.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/sem.hpp"

using namespace mwdiff;
using doctest::Approx;

namespace {

SemSynthesis grating_sem(double d, double s, double blur, bool noise) {
  SemSynthesis p;
  p.period_nm = d;
  p.slit_width_nm = s;
  p.edge_blur_nm = blur;
  p.shot_noise = noise;
  return p;
}

}  // namespace

TEST_CASE("trace of an image with identical rows") {
  SemImage img;
  img.scale_nm_per_px = 2.5;
  Eigen::ArrayXd profile(6);
  profile << 4.0, 8.0, 6.0, 4.0, 12.0, 5.0;
  img.pixels.resize(7, 6);
  img.pixels.rowwise() = profile.transpose();
  const Trace1D t = sem_trace(img);
  CHECK((t.intensities - (profile - 4.0) / 8.0).abs().maxCoeff() < 1e-15);
  CHECK(t.positions[3] == Approx(7.5e-9));
  CHECK(t.step() == Approx(2.5e-9));
}

TEST_CASE("degenerate SEM input") {
  SemImage flat;
  flat.pixels = ImageArray::Constant(5, 20, 3.0);
  CHECK_THROWS_AS(sem_trace(flat), DomainError);
  SemImage empty;
  CHECK_THROWS_AS(sem_trace(empty), DomainError);
  SemImage bad_scale;
  bad_scale.pixels = ImageArray::Random(5, 20);
  bad_scale.scale_nm_per_px = 0.0;
  CHECK_THROWS_AS(sem_trace(bad_scale), DomainError);

  SemSynthesis p;
  p.slit_width_nm = 120.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = SemSynthesis{};
  p.slit_counts = 300.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("slits show up as minima at their centres") {
  const SemSynthesis p = grating_sem(97, 46, 3, false);
  const Trace1D t = sem_trace(synthesize_sem(p, 1));
  const double span = 10 * p.period_nm + p.slit_width_nm + 2 * p.margin_nm;
  const double centre = 0.5 * (std::ceil(span) - 1);
  for (int j = 0; j < p.n_slits; ++j) {
    const double mid = centre + (j - 5) * p.period_nm;
    const auto c = static_cast<Eigen::Index>(std::lround(mid));
    CHECK(t.intensities[c] < 1e-6);
    // Dark plateau over the slit, bright membrane half a period away.
    CHECK(t.intensities[c - 15] < 0.01);
    CHECK(t.intensities[c + 15] < 0.01);
    if (j < p.n_slits - 1) CHECK(t.intensities[static_cast<Eigen::Index>(std::lround(mid + 48.5))] > 0.99);
  }
}

TEST_CASE("Gaussian-comb metrology matches an independent least-squares oracle") {
  // Reference values from a separate least-squares fit of the same comb
  // model to the same noise-free profiles.
  struct Case {
    double d, s, blur, period, fwhm;
  };
  const Case cases[] = {{97, 46, 0, 97.004364, 41.493520},
                        {97, 46, 3, 97.004563, 41.655310},
                        {99, 43, 0, 99.000898, 38.436864},
                        {99, 43, 3, 99.000989, 38.659355}};
  for (const auto& c : cases) {
    const GratingMetrology m = fit_periodic_dips(sem_trace(synthesize_sem(grating_sem(c.d, c.s, c.blur, false), 1)), 11, 1.0);
    CHECK(m.period_nm == Approx(c.period).epsilon(1e-6));
    CHECK(m.slit_width_nm == Approx(c.fwhm).epsilon(1e-5));
  }
}

TEST_CASE("G1 and G2 round trip with shot noise") {
  struct Case {
    double d, s;
  };
  for (const auto& c : {Case{97, 46}, Case{99, 43}}) {
    const GratingMetrology m = fit_periodic_dips(sem_trace(synthesize_sem(grating_sem(c.d, c.s, 3, true), 8)), 11, 1.0);
    CHECK(std::abs(m.period_nm - c.d) < 2.0);
    CHECK(m.n_slits_fitted == 11);
    // The half-depth width reads s back; the Gaussian FWHM of box-like dips
    // sits about 10 % low.
    CHECK(std::abs(m.half_depth_width_nm - c.s) < 1.0);
    CHECK(m.slit_width_nm / c.s == Approx(0.903).epsilon(0.01));
    CHECK(m.period_uncertainty_nm >= 1.0);
    CHECK(m.slit_width_uncertainty_nm >= 1.0);
    CHECK(m.fit.status == LmStatus::Converged);
  }
}

TEST_CASE("vanishing edge blur") {
  // The half-depth width converges on the geometric width; the Gaussian FWHM
  // converges on its fixed box-fit bias instead.
  for (double blur : {2.0, 1.0, 0.5, 0.0}) {
    const GratingMetrology m = fit_periodic_dips(sem_trace(synthesize_sem(grating_sem(97, 46, blur, false), 1)), 11, 1.0);
    CHECK(std::abs(m.half_depth_width_nm - 46.0) < 1.0);
    CHECK(m.slit_width_nm == Approx(41.5).epsilon(0.01));
  }
}

TEST_CASE("metrology is equivariant under the pixel scale") {
  const SemImage img = synthesize_sem(grating_sem(97, 46, 3, true), 5);
  SemImage coarse = img;
  coarse.scale_nm_per_px = 2.0;
  const GratingMetrology a = fit_periodic_dips(sem_trace(img), 11, 1.0);
  const GratingMetrology b = fit_periodic_dips(sem_trace(coarse), 11, 2.0);
  CHECK(b.period_nm == Approx(2.0 * a.period_nm).epsilon(1e-9));
  CHECK(b.slit_width_nm == Approx(2.0 * a.slit_width_nm).epsilon(1e-9));
  CHECK(b.half_depth_width_nm == Approx(2.0 * a.half_depth_width_nm).epsilon(1e-9));
  CHECK(b.period_uncertainty_nm >= 2.0);
}

TEST_CASE("period holds for edge blur up to a tenth of the slit width") {
  for (double frac : {0.0, 0.025, 0.05, 0.075, 0.1})
    for (unsigned seed : {1u, 2u, 3u}) {
      const GratingMetrology m =
          fit_periodic_dips(sem_trace(synthesize_sem(grating_sem(97, 46, frac * 46, true), seed)), 11, 1.0);
      CHECK(m.period_nm == Approx(97.0).epsilon(0.02));
    }
}

TEST_CASE("dip fitting preconditions") {
  const Trace1D t = sem_trace(synthesize_sem(grating_sem(97, 46, 3, false), 1));
  CHECK_THROWS_AS(fit_periodic_dips(t, 2, 1.0), DomainError);
  CHECK_THROWS_AS(fit_periodic_dips(t, 11, 0.0), DomainError);
  // A single ramp has no period.
  SemImage ramp;
  ramp.pixels.resize(4, 300);
  for (int c = 0; c < 300; ++c) ramp.pixels.col(c).setConstant(c);
  CHECK_THROWS_AS(fit_periodic_dips(sem_trace(ramp), 5, 1.0), InitializationError);
}
