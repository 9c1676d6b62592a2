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

#include <Eigen/Core>

#include "mwdiff/trace.hpp"

namespace mwdiff {

/// Convolution weights that evaluate the least-squares polynomial of `degree`
/// over `window` samples at sample `position` (0-based within the window).
Eigen::VectorXd savitzky_golay_weights(int window, int degree, int position);

/// Savitzky-Golay smoothing. Edge samples use a window shifted inside the
/// data, so polynomials up to `degree` are reproduced everywhere.
Eigen::ArrayXd savitzky_golay(const Eigen::ArrayXd& values, int window, int degree);
Trace1D savitzky_golay(const Trace1D& trace, int window, int degree);

}  // namespace mwdiff
