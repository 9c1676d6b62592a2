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

// Self-contained Levenberg-Marquardt least-squares engine on Eigen dense types.

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mwdiff/trace.hpp"

namespace mwdiff {

struct LeastSquaresProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  // Optional; central finite differences are used when empty.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

struct LmOptions {
  int max_iterations = 200;
  double ftol = 1e-14;  // relative reduction of the squared residual
  double xtol = 1e-12;  // relative step size
  double gtol = 1e-12;  // scaled gradient
  double damping = 1e-3;  // initial lambda relative to max diag(J^T J); 0 = Gauss-Newton first step
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
};

enum class LmStatus { Converged, MaxIterations, Singular };

std::string to_string(LmStatus status);

struct LmResult {
  Eigen::VectorXd params;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd covariance;    // (J^T J)^-1 * rss / (m - n)
  Eigen::VectorXd uncertainties; // sqrt(diag(covariance))
  double rss = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LmStatus status = LmStatus::MaxIterations;
  std::string message;

  bool converged() const { return status == LmStatus::Converged; }
};

LmResult levenberg_marquardt(const LeastSquaresProblem& problem, const Eigen::VectorXd& init,
                             const LmOptions& options = {});

Eigen::MatrixXd finite_difference_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& params, double relative_step = 1e-6);

/// Parametric curve y = f(x; p) with an analytic Jacobian.
class CurveModel {
 public:
  virtual ~CurveModel() = default;
  virtual Eigen::Index n_params() const = 0;
  virtual std::string name() const = 0;
  virtual Eigen::ArrayXd evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const = 0;
  virtual Eigen::MatrixXd jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const = 0;
};

/// Least-squares problem for model(x) - y over a trace, optionally weighted.
LeastSquaresProblem curve_problem(const CurveModel& model, const Trace1D& data, bool analytic_jacobian = true);

LmResult levenberg_marquardt(const CurveModel& model, const Trace1D& data, const Eigen::VectorXd& init,
                             const LmOptions& options = {});

/// y = slope * x + intercept; p = (slope, intercept).
class LinearModel final : public CurveModel {
 public:
  Eigen::Index n_params() const override { return 2; }
  std::string name() const override { return "linear"; }
  Eigen::ArrayXd evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;
};

/// y = y0 + A exp(-2 (x - mu)^2 / w^2); p = (y0, A, mu, w).
class GaussianModel final : public CurveModel {
 public:
  Eigen::Index n_params() const override { return 4; }
  std::string name() const override { return "gaussian"; }
  Eigen::ArrayXd evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const override;
};

}  // namespace mwdiff
