// SPDX-License-Identifier: Apache-2.0
//
// mmfbeam: max-min fair multigroup multicast beamforming
// Copyright (C) 2026 the mmfbeam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Dense interior-point method for small convex QCQPs:
//
//   minimize    c^T y
//   subject to  f_j(y) = 0.5 y^T Q_j y + q_j^T y + d_j <= 0,   Q_j PSD
//
// Log-barrier path following with damped Newton centering. Steps are capped
// at a fraction of the exact distance to the constraint boundary along the
// search direction, then Armijo-backtracked on the barrier merit function,
// so every centering makes guaranteed progress. Sized for the WMMSE
// subproblems (tens of variables, tens of constraints), everything dense.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace mmfbeam::detail {

struct QuadraticConstraint {
    Eigen::MatrixXd hessian;  // Q; 0 x 0 for linear constraints
    Eigen::VectorXd linear;   // q
    double offset = 0.0;      // d

    bool is_linear() const { return hessian.size() == 0; }

    double value(const Eigen::VectorXd& y) const
    {
        double v = linear.dot(y) + offset;
        if (!is_linear())
            v += 0.5 * y.dot(hessian * y);
        return v;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& y) const
    {
        if (is_linear())
            return linear;
        return hessian * y + linear;
    }
};

struct IpmOptions {
    int max_newton_iters = 600;  // total, across all centering stages
    double gap_abs = 5e-9;       // absolute duality-gap target (objective units)
    double mu = 20.0;            // barrier growth factor per stage
    double center_tol = 1e-13;   // Newton-decrement^2 / 2 at a finished centering
    double ls_alpha = 0.25;
    double ls_beta = 0.5;
};

struct IpmResult {
    Eigen::VectorXd y;
    Eigen::VectorXd multipliers;
    double gap = std::numeric_limits<double>::infinity();           // duality gap bound
    double dual_residual = std::numeric_limits<double>::infinity(); // scaled stationarity
    int iterations = 0;
    bool converged = false;
};

/// Solves the QCQP from a strictly feasible y0 (f_j(y0) < 0 for all j).
/// Iterates stay strictly feasible throughout; on hitting the iteration cap
/// the best point reached is returned with converged = false.
inline IpmResult solve_qcqp(const Eigen::VectorXd& cost,
                            const std::vector<QuadraticConstraint>& constraints,
                            const Eigen::VectorXd& y0, const IpmOptions& opts = {})
{
    const int n = static_cast<int>(y0.size());
    const int m = static_cast<int>(constraints.size());
    if (m == 0)
        throw std::invalid_argument("solve_qcqp: unconstrained problem not supported");

    Eigen::VectorXd y = y0;
    Eigen::VectorXd f(m);
    for (int j = 0; j < m; j++)
        f[j] = constraints[j].value(y);
    if ((f.array() >= 0.0).any())
        throw std::invalid_argument("solve_qcqp: start point is not strictly feasible");

    // exact largest step keeping f_j(y + s dy) < 0 for a quadratic f_j
    auto boundary_step = [&](const QuadraticConstraint& con, double fj,
                             const Eigen::VectorXd& point, const Eigen::VectorXd& dy) {
        const double b = con.gradient(point).dot(dy);
        double a = 0.0;
        if (!con.is_linear())
            a = 0.5 * dy.dot(con.hessian * dy);
        if (a <= 1e-300)
            return b > 0.0 ? -fj / b : std::numeric_limits<double>::infinity();
        const double disc = b * b - 4.0 * a * fj;  // fj < 0 so disc > 0
        return (-b + std::sqrt(disc)) / (2.0 * a);
    };

    IpmResult result;
    result.y = y;

    // start the path where the barrier and the objective are balanced
    double t = std::max(1.0, static_cast<double>(m) / (1.0 + std::abs(cost.dot(y))));

    Eigen::MatrixXd h(n, n);
    Eigen::VectorXd grad(n), f_trial(m);
    int iters = 0;
    bool budget_exhausted = false;
    bool center_ok = false;

    while (true)
    {
        // centering for the current t; the objective is shifted by its value
        // at the stage entry so the merit function keeps full precision even
        // at very large t
        center_ok = false;
        const double obj_ref = cost.dot(y);
        for (;;)
        {
            if (iters >= opts.max_newton_iters)
            {
                budget_exhausted = true;
                break;
            }
            iters++;

            grad = t * cost;
            h.setZero();
            for (int j = 0; j < m; j++)
            {
                const Eigen::VectorXd g = constraints[j].gradient(y);
                const double inv_slack = 1.0 / (-f[j]);
                grad += inv_slack * g;
                h.noalias() += (inv_slack * inv_slack) * g * g.transpose();
                if (!constraints[j].is_linear())
                    h += inv_slack * constraints[j].hessian;
            }
            const double ridge = 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
            h.diagonal().array() += ridge;

            Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
            if (ldlt.info() != Eigen::Success)
            {
                h.diagonal().array() += 1e4 * ridge;
                ldlt.compute(h);
                if (ldlt.info() != Eigen::Success)
                {
                    budget_exhausted = true;
                    break;
                }
            }
            const Eigen::VectorXd dy = ldlt.solve(-grad);
            const double decrement_sq = -grad.dot(dy);  // lambda(y)^2 of the Newton step
            if (!(decrement_sq > 0.0) || 0.5 * decrement_sq <= opts.center_tol)
            {
                center_ok = true;
                break;
            }

            double step = 1.0;
            for (int j = 0; j < m; j++)
                step = std::min(step, 0.99 * boundary_step(constraints[j], f[j], y, dy));

            // Armijo backtracking on the barrier merit function
            const double phi0 = t * (cost.dot(y) - obj_ref) - (-f.array()).log().sum();
            const double slope = grad.dot(dy);  // negative
            bool accepted = false;
            while (step > 1e-14)
            {
                const Eigen::VectorXd y_trial = y + step * dy;
                for (int j = 0; j < m; j++)
                    f_trial[j] = constraints[j].value(y_trial);
                if ((f_trial.array() < 0.0).all())
                {
                    const double phi =
                        t * (cost.dot(y_trial) - obj_ref) - (-f_trial.array()).log().sum();
                    if (phi <= phi0 + opts.ls_alpha * step * slope)
                    {
                        y = y_trial;
                        f = f_trial;
                        accepted = true;
                        break;
                    }
                }
                step *= opts.ls_beta;
            }
            if (!accepted)
                break; // cannot improve this centering any further
        }

        result.y = y;
        result.gap = m / t;
#ifdef MMFBEAM_IPM_DEBUG
        std::fprintf(stderr, "stage t %.3e iters %d center_ok %d obj %.9f\n", t, iters,
                     center_ok ? 1 : 0, cost.dot(y));
#endif
        if (budget_exhausted || m / t <= opts.gap_abs)
            break;
        t *= opts.mu;
    }

    // duals from the barrier: lambda_j = 1 / (t * slack_j)
    result.multipliers.resize(m);
    Eigen::VectorXd r_dual = cost;
    double dual_scale = 1.0 + cost.lpNorm<Eigen::Infinity>();
    for (int j = 0; j < m; j++)
    {
        result.multipliers[j] = 1.0 / (t * -f[j]);
        const Eigen::VectorXd g = constraints[j].gradient(y);
        r_dual += result.multipliers[j] * g;
        dual_scale = std::max(dual_scale, result.multipliers[j] * g.lpNorm<Eigen::Infinity>());
    }
    result.dual_residual = r_dual.lpNorm<Eigen::Infinity>() / dual_scale;
    result.iterations = iters;
    result.converged = !budget_exhausted && center_ok && result.gap <= opts.gap_abs;
    return result;
}

} // namespace mmfbeam::detail
