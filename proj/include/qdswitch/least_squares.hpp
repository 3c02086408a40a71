#ifndef QDSWITCH_LEAST_SQUARES_HPP
#define QDSWITCH_LEAST_SQUARES_HPP

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.
// Minimizes 0.5*|r(x)|^2 with Marquardt diagonal scaling and multiplicative
// damping updates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace qdswitch {

struct LmOptions {
    int max_iterations = 500;
    double relative_residual_tolerance = 1e-9;
    double gradient_tolerance = 1e-8;
    double initial_damping = 1e-3;
    double damping_increase = 10.0;
    double damping_decrease = 0.1;
};

struct LmReport {
    Eigen::VectorXd x;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd jacobian;   // at x
    double residual_norm = 0.0; // |r|
    double gradient_norm = 0.0; // |J^T r|_inf
    int iterations = 0;
    bool converged = false;
};

// Central-difference Jacobian of f at x.
template <class Residuals>
Eigen::MatrixXd numeric_jacobian(Residuals&& f, const Eigen::VectorXd& x, double relative_step = 1e-6)
{
    const Eigen::VectorXd r0 = f(x);
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = relative_step * std::max(1.0, std::abs(x[j]));
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return jac;
}

template <class Residuals, class Jacobian>
LmReport levenberg_marquardt(Residuals&& f, Jacobian&& jac, Eigen::VectorXd x, const LmOptions& opt = {})
{
    LmReport rep;
    Eigen::VectorXd r = f(x);
    Eigen::MatrixXd J = jac(x);
    double cost = r.squaredNorm();
    double lambda = opt.initial_damping;

    auto finish = [&](bool converged) {
        rep.x = x;
        rep.residuals = r;
        rep.jacobian = J;
        rep.residual_norm = std::sqrt(cost);
        rep.gradient_norm = (J.transpose() * r).cwiseAbs().maxCoeff();
        rep.converged = converged;
        return rep;
    };

    if (!std::isfinite(cost))
        return finish(false);

    for (rep.iterations = 0; rep.iterations < opt.max_iterations; ++rep.iterations) {
        const Eigen::VectorXd grad = J.transpose() * r;
        if (cost == 0.0 || grad.cwiseAbs().maxCoeff() < opt.gradient_tolerance)
            return finish(true);

        const Eigen::MatrixXd jtj = J.transpose() * J;
        Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-300);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * scale;
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            if (!step.allFinite())
                return finish(false);

            // Step too small to change x at double precision: stationary.
            if (step.norm() <= 1e-15 * (x.norm() + 1e-15))
                return finish(true);

            const Eigen::VectorXd x_new = x + step;
            const Eigen::VectorXd r_new = f(x_new);
            const double cost_new = r_new.squaredNorm();
            if (std::isfinite(cost_new) && cost_new < cost) {
                const double rel_change = (cost - cost_new) / cost;
                x = x_new;
                r = r_new;
                J = jac(x);
                cost = cost_new;
                lambda = std::max(lambda * opt.damping_decrease, 1e-15);
                accepted = true;
                if (rel_change < opt.relative_residual_tolerance) {
                    ++rep.iterations;
                    return finish(true);
                }
            } else {
                lambda *= opt.damping_increase;
                if (lambda > 1e16)
                    return finish(false);
            }
        }
    }
    return finish(false);
}

} // namespace qdswitch

#endif
