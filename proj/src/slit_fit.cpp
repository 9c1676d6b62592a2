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

#include "mwdiff/slit_fit.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "mwdiff/constants.hpp"
#include "mwdiff/errors.hpp"

namespace mwdiff {

void SlitFitKnown::validate() const {
  if (!(wavelength_m > 0 && period_nm > 0 && z_m > 0)) throw DomainError("wavelength, period and distance must be positive");
  if (n_slits < 2) throw DomainError("at least two slits are required");
}

double SlitFitKnown::first_order_spacing() const { return wavelength_m * z_m / (period_nm * constants::nm); }

IdealGratingParams IdealGratingModel::params_for(const Eigen::VectorXd& p) const {
  IdealGratingParams ip;
  ip.c1 = p[0];
  ip.c2 = p[1];
  ip.s_eff_nm = p[2];
  ip.wavelength_m = known_.wavelength_m;
  ip.n_slits = known_.n_slits;
  ip.period_nm = known_.period_nm;
  ip.z_m = known_.z_m;
  return ip;
}

Eigen::ArrayXd IdealGratingModel::evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const {
  const auto ip = params_for(p);
  return x.unaryExpr([&](double xi) { return ideal_grating_intensity(xi, ip); });
}

Eigen::MatrixXd IdealGratingModel::jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const {
  const auto ip = params_for(p);
  Eigen::MatrixXd j(x.size(), 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto t = ideal_grating_terms(x[i], ip);
    j(i, 0) = t.envelope * t.interference;
    j(i, 1) = 1.0;
    j(i, 2) = p[0] * t.interference * t.d_envelope_d_seff_nm;
  }
  return j;
}

SlitWidthFit fit_effective_slit_width(const Trace1D& trace, const SlitFitKnown& known) {
  trace.validate();
  known.validate();
  const IdealGratingModel model(known);
  // A featureless trace leaves the slit width undetermined.
  if (!(trace.intensities.maxCoeff() > trace.intensities.minCoeff()))
    throw ConvergenceError("effective slit width fit: the trace has no contrast");

  LmOptions opt;
  opt.lower = Eigen::Vector3d(-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                              1e-3);
  opt.upper = Eigen::Vector3d(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                              known.period_nm);

  SlitWidthFit out;
  out.known = known;
  std::optional<LmResult> best;
  std::ostringstream diag;
  const Eigen::VectorXd y = trace.intensities.matrix();
  for (double start = 5.0; start <= 0.9 * known.period_nm + 1e-9; start += 5.0) {
    ++out.starts_tried;
    // c1 and c2 enter linearly: solve for them at the starting width.
    Eigen::VectorXd p(3);
    p << 1.0, 0.0, start;
    const Eigen::MatrixXd j = model.jacobian(trace.positions, p);
    Eigen::MatrixXd design(j.rows(), 2);
    design.col(0) = j.col(0);
    design.col(1) = j.col(1);
    const Eigen::Vector2d lin = design.colPivHouseholderQr().solve(y);
    p[0] = lin[0] > 0 ? lin[0] : std::max(1e-12, y.maxCoeff());
    p[1] = lin[1];

    LmResult res;
    try {
      res = levenberg_marquardt(model, trace, p, opt);
    } catch (const std::exception& e) {
      diag << " start " << start << " nm: " << e.what() << ';';
      continue;
    }
    if (res.status != LmStatus::Converged || !(res.params[2] > 0)) {
      diag << " start " << start << " nm: " << to_string(res.status) << ';';
      continue;
    }
    ++out.starts_converged;
    if (!best || res.rss < best->rss) best = std::move(res);
  }
  if (!best) throw ConvergenceError("effective slit width fit failed from every start:" + diag.str());

  out.c1 = best->params[0];
  out.c2 = best->params[1];
  out.s_eff_nm = best->params[2];
  out.c1_uncertainty = best->uncertainties[0];
  out.c2_uncertainty = best->uncertainties[1];
  out.s_eff_uncertainty_nm = best->uncertainties[2];
  out.residual_rms = best->residual_rms;
  out.iterations = best->iterations;
  out.status = best->status;
  out.message = best->message;
  return out;
}

}  // namespace mwdiff
