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

#include "mwdiff/levenberg_marquardt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwdiff/errors.hpp"

namespace mwdiff {

std::string to_string(LmStatus status) {
  switch (status) {
    case LmStatus::Converged:
      return "converged";
    case LmStatus::MaxIterations:
      return "max-iterations";
    case LmStatus::Singular:
      return "singular";
  }
  return "unknown";
}

Eigen::MatrixXd finite_difference_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& params, double relative_step) {
  Eigen::MatrixXd jac;
  Eigen::VectorXd probe = params;
  for (Eigen::Index j = 0; j < params.size(); ++j) {
    const double h = relative_step * (params[j] != 0.0 ? std::abs(params[j]) : 1.0);
    probe[j] = params[j] + h;
    const Eigen::VectorXd up = f(probe);
    probe[j] = params[j] - h;
    const Eigen::VectorXd down = f(probe);
    probe[j] = params[j];
    if (jac.size() == 0) jac.resize(up.size(), params.size());
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

namespace {

Eigen::VectorXd project(Eigen::VectorXd p, const LmOptions& opt) {
  if (opt.lower) p = p.cwiseMax(*opt.lower);
  if (opt.upper) p = p.cwiseMin(*opt.upper);
  return p;
}

}  // namespace

LmResult levenberg_marquardt(const LeastSquaresProblem& problem, const Eigen::VectorXd& init,
                             const LmOptions& opt) {
  if (!init.allFinite()) throw DomainError("initial parameters must be finite");
  const Eigen::Index n = init.size();
  if ((opt.lower && opt.lower->size() != n) || (opt.upper && opt.upper->size() != n))
    throw DomainError("bound vectors must match the parameter count");

  LmResult res;
  const auto jacobian_at = [&](const Eigen::VectorXd& p) -> Eigen::MatrixXd {
    if (problem.jacobian) return problem.jacobian(p);
    res.evaluations += 2 * static_cast<int>(n);
    return finite_difference_jacobian(problem.residuals, p);
  };

  Eigen::VectorXd p = project(init, opt);
  Eigen::VectorXd r = problem.residuals(p);
  ++res.evaluations;
  if (!r.allFinite()) throw DomainError("residuals are not finite at the initial parameters");
  const Eigen::Index m = r.size();
  double cost = r.squaredNorm();
  // Residuals this far below the starting ones are rounding noise.
  const double noise_floor = cost * 1e-28;

  Eigen::MatrixXd jac = jacobian_at(p);
  Eigen::VectorXd scale(n);
  Eigen::MatrixXd a;
  Eigen::VectorXd g;
  // Work in variables scaled so that diag(J^T J) == 1.
  const auto refresh = [&] {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double norm = jac.col(j).norm();
      scale[j] = norm > 0 && std::isfinite(norm) ? 1.0 / norm : 1.0;
    }
    const Eigen::MatrixXd js = jac * scale.asDiagonal();
    a = js.transpose() * js;
    g = js.transpose() * r;
  };
  refresh();

  double lambda = opt.damping;
  double nu = 2.0;
  res.status = LmStatus::MaxIterations;
  res.message = "iteration limit reached";
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    if (cost == 0.0 || g.lpNorm<Eigen::Infinity>() <= opt.gtol * std::sqrt(cost)) {
      res.status = LmStatus::Converged;
      res.message = cost == 0.0 ? "zero residual" : "gradient below tolerance";
      break;
    }
    res.iterations = iter;

    Eigen::MatrixXd damped = a;
    damped.diagonal().array() += lambda;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
    Eigen::VectorXd step_scaled;
    bool solved = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (solved) {
      step_scaled = -ldlt.solve(g);
      solved = step_scaled.allFinite();
    }
    if (!solved) {
      lambda = lambda == 0.0 ? 1e-3 : lambda * nu;
      nu *= 2.0;
      continue;
    }
    const Eigen::VectorXd candidate = project(p + scale.asDiagonal() * step_scaled, opt);
    const Eigen::VectorXd step = candidate - p;
    const Eigen::VectorXd r_new = problem.residuals(candidate);
    ++res.evaluations;
    const double cost_new = r_new.allFinite() ? r_new.squaredNorm() : std::numeric_limits<double>::infinity();
    const bool tiny_step = step.norm() <= opt.xtol * (p.norm() + opt.xtol);

    if (cost_new < cost) {
      const Eigen::VectorXd ss = scale.cwiseInverse().asDiagonal() * step;
      const double predicted = -(2.0 * ss.dot(g) + ss.dot(a * ss));
      const double rho = predicted > 0 ? (cost - cost_new) / predicted : 0.0;
      const double reduction = (cost - cost_new) / cost;
      p = candidate;
      r = r_new;
      cost = cost_new;
      jac = jacobian_at(p);
      refresh();
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (cost <= noise_floor || reduction < opt.ftol || tiny_step) {
        res.status = LmStatus::Converged;
        res.message = cost <= noise_floor ? "zero residual" : (tiny_step ? "step below tolerance" : "cost reduction below tolerance");
        break;
      }
    } else {
      if (tiny_step || lambda > 1e20) {
        res.status = LmStatus::Converged;
        res.message = "no further decrease possible";
        break;
      }
      lambda = lambda == 0.0 ? 1e-3 : lambda * nu;
      nu *= 2.0;
    }
  }

  res.params = p;
  res.residuals = r;
  res.rss = cost;
  res.residual_rms = std::sqrt(cost / static_cast<double>(std::max<Eigen::Index>(m, 1)));

  const Eigen::MatrixXd js = jac * scale.asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(js);
  // Difference quotients carry ~sqrt(eps) relative error, so their rank test is looser.
  qr.setThreshold(problem.jacobian ? 1e-10 : 1e-7);
  const double dof = static_cast<double>(std::max<Eigen::Index>(m - n, 1));
  if (qr.rank() < n) {
    res.status = LmStatus::Singular;
    res.message = "rank-deficient Jacobian (rank " + std::to_string(qr.rank()) + " of " + std::to_string(n) + ")";
    res.covariance = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  } else {
    const Eigen::MatrixXd inv_scaled = (js.transpose() * js).ldlt().solve(Eigen::MatrixXd::Identity(n, n));
    res.covariance = scale.asDiagonal() * inv_scaled * scale.asDiagonal() * (cost / dof);
  }
  res.uncertainties = res.covariance.diagonal().cwiseAbs().cwiseSqrt();
  return res;
}

LeastSquaresProblem curve_problem(const CurveModel& model, const Trace1D& data, bool analytic_jacobian) {
  LeastSquaresProblem prob;
  const Eigen::ArrayXd x = data.positions;
  const Eigen::ArrayXd y = data.intensities;
  prob.residuals = [&model, x, y](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    return (model.evaluate(x, p) - y).matrix();
  };
  if (analytic_jacobian)
    prob.jacobian = [&model, x](const Eigen::VectorXd& p) { return model.jacobian(x, p); };
  return prob;
}

LmResult levenberg_marquardt(const CurveModel& model, const Trace1D& data, const Eigen::VectorXd& init,
                             const LmOptions& options) {
  if (init.size() != model.n_params()) throw DomainError("parameter count does not match the model");
  return levenberg_marquardt(curve_problem(model, data), init, options);
}

Eigen::ArrayXd LinearModel::evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const {
  return p[0] * x + p[1];
}

Eigen::MatrixXd LinearModel::jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd&) const {
  Eigen::MatrixXd j(x.size(), 2);
  j.col(0) = x.matrix();
  j.col(1).setOnes();
  return j;
}

Eigen::ArrayXd GaussianModel::evaluate(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const {
  return p[0] + p[1] * (-2.0 * (x - p[2]).square() / (p[3] * p[3])).exp();
}

Eigen::MatrixXd GaussianModel::jacobian(const Eigen::ArrayXd& x, const Eigen::VectorXd& p) const {
  const Eigen::ArrayXd u = x - p[2];
  const double w2 = p[3] * p[3];
  const Eigen::ArrayXd g = (-2.0 * u.square() / w2).exp();
  Eigen::MatrixXd j(x.size(), 4);
  j.col(0).setOnes();
  j.col(1) = g.matrix();
  j.col(2) = (p[1] * g * 4.0 * u / w2).matrix();
  j.col(3) = (p[1] * g * 4.0 * u.square() / (w2 * p[3])).matrix();
  return j;
}

}  // namespace mwdiff
