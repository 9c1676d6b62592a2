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

#include "mwdiff/savitzky_golay.hpp"

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "mwdiff/errors.hpp"

namespace mwdiff {

namespace {

void check_window(int window, int degree) {
  if (window < 1 || window % 2 == 0) throw DomainError("Savitzky-Golay window must be a positive odd count");
  if (degree < 0 || degree >= window) throw DomainError("Savitzky-Golay degree must be below the window length");
}

}  // namespace

Eigen::VectorXd savitzky_golay_weights(int window, int degree, int position) {
  check_window(window, degree);
  if (position < 0 || position >= window) throw DomainError("evaluation position outside the window");
  const int half = window / 2;
  // Offsets scaled to [-1, 1] keep the Vandermonde matrix well conditioned.
  const double unit = half > 0 ? static_cast<double>(half) : 1.0;
  Eigen::MatrixXd vander(window, degree + 1);
  for (int i = 0; i < window; ++i) {
    const double t = (i - half) / unit;
    double power = 1.0;
    for (int k = 0; k <= degree; ++k, power *= t) vander(i, k) = power;
  }
  Eigen::VectorXd basis(degree + 1);
  const double t = (position - half) / unit;
  double power = 1.0;
  for (int k = 0; k <= degree; ++k, power *= t) basis[k] = power;
  // weights^T = basis^T (V^T V)^-1 V^T, via QR of V.
  const Eigen::MatrixXd coeff = vander.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  return coeff.transpose() * basis;
}

Eigen::ArrayXd savitzky_golay(const Eigen::ArrayXd& values, int window, int degree) {
  check_window(window, degree);
  const Eigen::Index n = values.size();
  if (window > n) throw DomainError("Savitzky-Golay window longer than the trace");
  const int half = window / 2;

  std::vector<Eigen::VectorXd> weights(window);
  for (int pos = 0; pos < window; ++pos) weights[pos] = savitzky_golay_weights(window, degree, pos);

  Eigen::ArrayXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index start = std::clamp<Eigen::Index>(i - half, 0, n - window);
    const auto& w = weights[static_cast<std::size_t>(i - start)];
    out[i] = values.segment(start, window).matrix().dot(w);
  }
  return out;
}

Trace1D savitzky_golay(const Trace1D& trace, int window, int degree) {
  Trace1D out = trace;
  out.intensities = savitzky_golay(trace.intensities, window, degree);
  out.metadata["savitzky_golay"] = std::to_string(window) + "/" + std::to_string(degree);
  return out;
}

}  // namespace mwdiff
