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

#include "mwdiff/comb_fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "mwdiff/diffraction.hpp"
#include "mwdiff/errors.hpp"
#include "mwdiff/savitzky_golay.hpp"

namespace mwdiff {

Eigen::ArrayXd GaussianCombModel::evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const {
  Eigen::ArrayXd y = Eigen::ArrayXd::Constant(x.size(), p[0]);
  const double w2 = p[3] * p[3];
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const Eigen::ArrayXd u = x - p[1] - orders_[i] * p[2];
    y += p[4 + static_cast<Eigen::Index>(i)] * (-2.0 * u.square() / w2).exp();
  }
  return y;
}

Eigen::MatrixXd GaussianCombModel::jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(x.size(), n_params());
  j.col(0).setOnes();
  const double w2 = p[3] * p[3];
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const Eigen::Index k = 4 + static_cast<Eigen::Index>(i);
    const Eigen::ArrayXd u = x - p[1] - orders_[i] * p[2];
    const Eigen::ArrayXd g = (-2.0 * u.square() / w2).exp();
    const Eigen::ArrayXd slope = p[k] * g * 4.0 * u / w2;
    j.col(1).array() += slope;
    j.col(2).array() += orders_[i] * slope;
    j.col(3).array() += slope * u / p[3];
    j.col(k) = g.matrix();
  }
  return j;
}

std::vector<double> symmetric_orders(int n_orders) {
  if (n_orders < 0) throw DomainError("order count must be non-negative");
  std::vector<double> orders;
  for (int i = -n_orders; i <= n_orders; ++i) orders.push_back(i);
  return orders;
}

std::vector<double> centred_orders(int count) {
  if (count < 1) throw DomainError("order count must be positive");
  std::vector<double> orders;
  for (int i = 0; i < count; ++i) orders.push_back(i - 0.5 * (count - 1));
  return orders;
}

Eigen::VectorXd CombFit::params() const {
  Eigen::VectorXd p(4 + amplitudes.size());
  p << y0, center_offset, spacing, width, amplitudes;
  return p;
}

double CombFit::fwhm() const { return fwhm_from_width(width); }

double CombFit::amplitude_asymmetry() const {
  double diff = 0.0, total = 0.0;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] <= 0) continue;
    for (std::size_t j = 0; j < orders.size(); ++j) {
      if (orders[j] != -orders[i]) continue;
      const double a = amplitudes[static_cast<Eigen::Index>(i)];
      const double b = amplitudes[static_cast<Eigen::Index>(j)];
      diff += std::abs(a - b);
      total += std::abs(a) + std::abs(b);
    }
  }
  return total > 0 ? diff / total : 0.0;
}

std::optional<double> autocorrelation_period(const Eigen::ArrayXd& values) {
  const Eigen::Index n = values.size();
  if (n < 8) return std::nullopt;
  const Eigen::ArrayXd z = values - values.mean();
  const Eigen::Index max_lag = n / 2;
  Eigen::ArrayXd r(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag; ++k) r[k] = (z.head(n - k) * z.tail(n - k)).sum();
  if (!(r[0] > 0)) return std::nullopt;

  // End of the zero-lag lobe: first local minimum below half the peak.
  Eigen::Index lobe_end = -1;
  for (Eigen::Index k = 1; k < max_lag; ++k) {
    if (r[k] < r[k - 1] && r[k] <= r[k + 1] && r[k] < 0.5 * r[0]) {
      lobe_end = k;
      break;
    }
  }
  if (lobe_end < 0) return std::nullopt;

  // Candidate maxima, compared on their parabola-refined heights so that a
  // lag landing exactly on an integer does not beat a truer fractional one.
  struct Candidate {
    double lag, height;
  };
  std::vector<Candidate> candidates;
  for (Eigen::Index k = lobe_end + 1; k < max_lag; ++k) {
    if (!(r[k] > r[k - 1] && r[k] >= r[k + 1] && r[k] > kMinPeriodCorrelation * r[0])) continue;
    const double left = r[k - 1], mid = r[k], right = r[k + 1];
    const double curvature = left - 2.0 * mid + right;
    const double shift = curvature < 0 ? std::clamp(0.5 * (left - right) / curvature, -0.5, 0.5) : 0.0;
    const double height = mid - 0.25 * (left - right) * shift;
    candidates.push_back({static_cast<double>(k) + shift, height});
  }
  if (candidates.empty()) return std::nullopt;
  double top = 0.0;
  for (const auto& c : candidates) top = std::max(top, c.height);
  // Near-equal heights count as a tie and go to the shorter lag.
  for (const auto& c : candidates)
    if (c.height >= (1.0 - kPeriodTieTolerance) * top) return c.lag;
  return std::nullopt;
}

namespace {

double interpolate(const Eigen::ArrayXd& values, double index) {
  if (index < 0 || index > static_cast<double>(values.size() - 1)) return 0.0;
  const auto i = static_cast<Eigen::Index>(std::floor(index));
  if (i >= values.size() - 1) return values[values.size() - 1];
  const double f = index - static_cast<double>(i);
  return (1.0 - f) * values[i] + f * values[i + 1];
}

double percentile(Eigen::ArrayXd values, double q) {
  std::vector<double> v(values.data(), values.data() + values.size());
  const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

// Negative local curvature from a sliding quadratic fit. Overlapping peaks on
// a broad envelope show their period far more clearly here than in the raw
// profile, whose autocorrelation is dominated by the envelope.
Eigen::ArrayXd negative_curvature(const Eigen::ArrayXd& values, int window) {
  const Eigen::Index n = values.size();
  const int half = window / 2;
  Eigen::ArrayXd weights(window);
  double mean_sq = 0.0;
  for (int j = -half; j <= half; ++j) mean_sq += static_cast<double>(j * j);
  mean_sq /= window;
  for (int j = -half; j <= half; ++j) weights[j + half] = mean_sq - static_cast<double>(j * j);
  Eigen::ArrayXd out(n);
  for (Eigen::Index i = half; i < n - half; ++i) out[i] = (weights * values.segment(i - half, window)).sum();
  // A quadratic has one curvature over its window, so the edges repeat it.
  out.head(half).setConstant(out[half]);
  out.tail(half).setConstant(out[n - half - 1]);
  return out;
}

// Width from the half-maximum crossings around `centre_x`, searched within `reach_m`.
double half_max_width(const Trace1D& trace, const Eigen::ArrayXd& z, double centre_x, double amplitude,
                      double reach_m) {
  const double h = trace.step();
  const double centre = (centre_x - trace.positions[0]) / h;
  const double half = 0.5 * amplitude;
  const double reach = reach_m / h;
  const auto crossing = [&](double dir) -> std::optional<double> {
    for (double t = 1.0; t <= reach; t += 1.0) {
      const double prev = interpolate(z, centre + dir * (t - 1.0));
      const double cur = interpolate(z, centre + dir * t);
      if (cur <= half && prev > half) return t - 1.0 + (prev - half) / (prev - cur);
    }
    return std::nullopt;
  };
  const auto left = crossing(-1.0);
  const auto right = crossing(1.0);
  double w = 0.5 * reach_m;
  if (left && right && half > 0) w = width_from_fwhm((*left + *right) * h);
  return std::clamp(w, 2.0 * h, 1.5 * reach_m);
}

CombFit single_peak_guess(const Trace1D& trace, const Eigen::ArrayXd& z, double baseline,
                          const std::vector<double>& orders) {
  Eigen::Index peak = 0;
  z.maxCoeff(&peak);
  CombFit guess;
  guess.orders = orders;
  guess.y0 = baseline;
  guess.center_offset = trace.positions[peak] - orders.front() * (trace.positions[trace.size() - 1] - trace.positions[0]);
  guess.spacing = trace.positions[trace.size() - 1] - trace.positions[0];
  guess.amplitudes = Eigen::VectorXd::Constant(1, z[peak]);
  guess.width = half_max_width(trace, z, trace.positions[peak], z[peak], 0.5 * guess.spacing);
  return guess;
}

}  // namespace

CombFit initial_comb_guess(const Trace1D& trace, const std::vector<double>& orders,
                           std::optional<double> spacing_hint) {
  trace.validate();
  if (orders.empty()) throw DomainError("comb needs at least one order");
  const Eigen::Index n = trace.size();
  const double h = trace.step();
  int window = std::max(5, static_cast<int>(n / 100) | 1);
  if (window > n) window = static_cast<int>(n) % 2 ? static_cast<int>(n) : static_cast<int>(n) - 1;
  if (window < 3) throw InitializationError("trace too short to initialise a comb fit");
  const Eigen::ArrayXd smooth = savitzky_golay(trace.intensities, window, std::min(2, window - 1));
  const double baseline = percentile(smooth, 0.05);
  const Eigen::ArrayXd z = (smooth - baseline).max(0.0);
  if (!(z.sum() > 0)) throw InitializationError("trace carries no signal above its baseline");

  if (orders.size() == 1) return single_peak_guess(trace, z, baseline, orders);

  double d = 0.0;
  if (spacing_hint) {
    if (!(*spacing_hint > 0)) throw DomainError("spacing hint must be positive");
    d = *spacing_hint;
  } else {
    std::optional<double> period;
    const int curvature_window = std::max(7, static_cast<int>(n / 20) | 1);
    if (n >= 3 * curvature_window) {
      const Eigen::ArrayXd curvature = negative_curvature(trace.intensities, curvature_window);
      // A straight line leaves only rounding noise, whose "period" is meaningless.
      const double scale = trace.intensities.abs().maxCoeff() * curvature_window * curvature_window;
      if (curvature.abs().maxCoeff() > 1e-9 * scale) period = autocorrelation_period(curvature);
    }
    if (!period) period = autocorrelation_period(z);
    if (!period || *period < 2.0) throw InitializationError("no detectable periodicity in the trace");
    d = *period * h;
  }

  // Comb phase from the first Fourier component at the detected period.
  std::complex<double> s{0.0, 0.0};
  for (Eigen::Index i = 0; i < n; ++i)
    s += z[i] * std::polar(1.0, 2.0 * std::numbers::pi * trace.positions[i] / d);
  const double peak_phase = std::arg(s) * d / (2.0 * std::numbers::pi);
  const double centroid = (z * trace.positions).sum() / z.sum();
  const double frac = orders.front() - std::floor(orders.front());
  const double lattice = peak_phase - frac * d;
  const double x0 = lattice + std::nearbyint((centroid - lattice) / d) * d;

  CombFit guess;
  guess.orders = orders;
  guess.y0 = baseline;
  guess.center_offset = x0;
  guess.spacing = d;
  guess.amplitudes.resize(static_cast<Eigen::Index>(orders.size()));
  const auto to_index = [&](double x) { return (x - trace.positions[0]) / h; };
  Eigen::Index strongest = 0;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    guess.amplitudes[k] = interpolate(z, to_index(x0 + orders[i] * d));
    if (guess.amplitudes[k] > guess.amplitudes[strongest]) strongest = k;
  }

  guess.width = half_max_width(trace, z, x0 + orders[static_cast<std::size_t>(strongest)] * d,
                               guess.amplitudes[strongest], d);
  return guess;
}

Eigen::ArrayXd evaluate_comb(const CombFit& fit, const Eigen::ArrayXd& x) {
  return GaussianCombModel(fit.orders).evaluate(x, fit.params());
}

CombFit fit_gaussian_comb(const Trace1D& trace, const std::vector<double>& orders, const std::optional<CombFit>& init,
                          const LmOptions& options, bool fix_spacing) {
  trace.validate();
  CombFit start = init ? *init : initial_comb_guess(trace, orders);
  if (start.orders != orders) throw DomainError("initial comb does not match the requested orders");
  if (!(start.spacing > 0 && start.width > 0)) throw DomainError("initial comb spacing and width must be positive");

  const GaussianCombModel model(orders);
  const Eigen::Index np = model.n_params();
  // A lone peak has no spacing to fit.
  std::vector<Eigen::Index> free;
  for (Eigen::Index k = 0; k < np; ++k)
    if (!(k == 2 && (orders.size() == 1 || fix_spacing))) free.push_back(k);
  const auto nf = static_cast<Eigen::Index>(free.size());

  const Eigen::ArrayXd x = trace.positions;
  const Eigen::ArrayXd y = trace.intensities;
  Eigen::VectorXd full = start.params();
  const auto expand = [&full, &free](const Eigen::VectorXd& pf) {
    Eigen::VectorXd p = full;
    for (std::size_t i = 0; i < free.size(); ++i) p[free[i]] = pf[static_cast<Eigen::Index>(i)];
    return p;
  };
  LeastSquaresProblem problem;
  problem.residuals = [&](const Eigen::VectorXd& pf) -> Eigen::VectorXd {
    return (model.evaluate(x, expand(pf)) - y).matrix();
  };
  problem.jacobian = [&](const Eigen::VectorXd& pf) -> Eigen::MatrixXd {
    const Eigen::MatrixXd j = model.jacobian(x, expand(pf));
    Eigen::MatrixXd out(j.rows(), nf);
    for (Eigen::Index i = 0; i < nf; ++i) out.col(i) = j.col(free[static_cast<std::size_t>(i)]);
    return out;
  };

  LmOptions opt = options;
  if (!opt.lower) {
    Eigen::VectorXd lower = Eigen::VectorXd::Constant(nf, -std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < nf; ++i) {
      if (free[static_cast<std::size_t>(i)] == 2) lower[i] = 0.25 * start.spacing;
      if (free[static_cast<std::size_t>(i)] == 3) lower[i] = 0.05 * start.spacing;
    }
    opt.lower = lower;
  }

  // A few width starts guard against the amplitude/width trade-off of
  // overlapping peaks.
  std::vector<double> widths{start.width};
  if (!init && orders.size() > 1)
    for (double f : {0.4, 0.8})
      if (std::abs(f * start.spacing - start.width) > 0.1 * start.width) widths.push_back(f * start.spacing);

  std::optional<LmResult> best;
  for (double w : widths) {
    full[3] = w;
    Eigen::VectorXd pf(nf);
    for (Eigen::Index i = 0; i < nf; ++i) pf[i] = full[free[static_cast<std::size_t>(i)]];
    auto res = levenberg_marquardt(problem, pf, opt);
    const bool singular = res.status == LmStatus::Singular;
    const bool best_singular = best && best->status == LmStatus::Singular;
    if (!best || (best_singular && !singular) || (singular == best_singular && res.rss < best->rss)) {
      res.params = expand(res.params);
      Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(np, np);
      for (Eigen::Index i = 0; i < nf; ++i)
        for (Eigen::Index j = 0; j < nf; ++j)
          cov(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]) = res.covariance(i, j);
      res.covariance = cov;
      res.uncertainties = cov.diagonal().cwiseAbs().cwiseSqrt();
      best = std::move(res);
    }
  }

  const auto& res = *best;
  CombFit fit;
  fit.orders = orders;
  fit.y0 = res.params[0];
  fit.center_offset = res.params[1];
  fit.spacing = res.params[2];
  fit.width = std::abs(res.params[3]);
  fit.amplitudes = res.params.tail(np - 4);
  fit.y0_uncertainty = res.uncertainties[0];
  fit.center_uncertainty = res.uncertainties[1];
  fit.spacing_uncertainty = res.uncertainties[2];
  fit.width_uncertainty = res.uncertainties[3];
  fit.amplitude_uncertainties = res.uncertainties.tail(np - 4);
  fit.covariance = res.covariance;
  fit.residual_rms = res.residual_rms;
  fit.iterations = res.iterations;
  fit.status = res.status;
  fit.message = res.message;
  return fit;
}

CombFit fit_gaussian_comb(const Trace1D& trace, int n_orders, const std::optional<CombFit>& init,
                          const LmOptions& options) {
  return fit_gaussian_comb(trace, symmetric_orders(n_orders), init, options, false);
}

}  // namespace mwdiff
