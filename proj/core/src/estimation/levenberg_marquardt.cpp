#include "qplas/estimation/levenberg_marquardt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qplas/errors.hpp"

namespace qplas::estimation {

std::string_view to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::Gradient: return "gradient";
        case StopReason::Step: return "step";
        case StopReason::MaxIterations: return "max_iterations";
        case StopReason::Singular: return "singular";
        case StopReason::NonFinite: return "non_finite";
    }
    return "unknown";
}

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Extended-precision 0.5 |r|^2, so decreases near the optimum stay visible.
long double half_squared_norm(const Eigen::VectorXd& r) {
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += static_cast<long double>(r[i]) * r[i];
    return 0.5L * acc;
}

void finish(FitResult& out, const Eigen::MatrixXd& J, const Eigen::VectorXd& r) {
    const auto n = static_cast<double>(r.size());
    const auto p = static_cast<double>(out.params.size());
    out.residual_norm = r.norm();
    out.gradient_norm = (J.transpose() * r).cwiseAbs().maxCoeff();
    out.param_std = Eigen::VectorXd::Zero(out.params.size());
    if (n > p) {
        const Eigen::MatrixXd A = J.transpose() * J;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.isInvertible()) {
            const double sigma2 = r.squaredNorm() / (n - p);
            const Eigen::MatrixXd cov = lu.inverse() * sigma2;
            for (Eigen::Index i = 0; i < cov.rows(); ++i) out.param_std[i] = std::sqrt(std::max(0.0, cov(i, i)));
        } else {
            out.param_std.setConstant(std::numeric_limits<double>::infinity());
        }
    }
}

}  // namespace

FitResult levenberg_marquardt(std::size_t n_residuals, const ResidualFn& residual, const JacobianFn& jacobian,
                              const Eigen::VectorXd& init, const LmOptions& opt) {
    if (!all_finite(init)) throw DomainError("levenberg_marquardt: initial parameters must be finite");
    if (init.size() == 0) throw DomainError("levenberg_marquardt: no parameters");

    const auto np = init.size();
    const auto nr = static_cast<Eigen::Index>(n_residuals);

    FitResult out;
    out.params = init;

    Eigen::VectorXd r(nr);
    Eigen::MatrixXd J(nr, np);
    residual(out.params, r);
    if (r.size() != nr) throw DomainError("levenberg_marquardt: residual size mismatch");
    jacobian(out.params, J);
    if (J.rows() != nr || J.cols() != np) throw DomainError("levenberg_marquardt: jacobian shape mismatch");

    if (!all_finite(r) || !J.allFinite()) {
        out.stop = StopReason::NonFinite;
        out.residual_norm = std::numeric_limits<double>::quiet_NaN();
        out.gradient_norm = std::numeric_limits<double>::quiet_NaN();
        out.param_std = Eigen::VectorXd::Constant(np, std::numeric_limits<double>::quiet_NaN());
        return out;
    }

    long double cost = half_squared_norm(r);
    out.accepted_costs.push_back(static_cast<double>(cost));
    double lambda = opt.initial_damping;

    Eigen::VectorXd r_trial(nr);
    Eigen::VectorXd x_trial(np);
    bool done = false;

    while (!done) {
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.cwiseAbs().maxCoeff() < opt.gradient_tol) {
            out.stop = StopReason::Gradient;
            break;
        }
        if (out.iterations >= opt.max_iterations) {
            out.stop = StopReason::MaxIterations;
            break;
        }

        const Eigen::MatrixXd A = J.transpose() * J;
        Eigen::VectorXd d = A.diagonal();
        const double dmax = d.maxCoeff();
        if (!(dmax > 0.0)) {
            out.stop = StopReason::Singular;
            break;
        }
        d = d.cwiseMax(1e-12 * dmax);

        while (true) {
            Eigen::MatrixXd H = A;
            H.diagonal() += lambda * d;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
            Eigen::VectorXd step;
            bool solved = ldlt.info() == Eigen::Success && ldlt.isPositive();
            if (solved) {
                step = ldlt.solve(-g);
                solved = step.allFinite();
            }
            if (solved) {
                x_trial = out.params + step;
                residual(x_trial, r_trial);
                const long double trial_cost = half_squared_norm(r_trial);
                if (std::isfinite(trial_cost) && trial_cost < cost) {
                    const bool tiny = step.norm() <= opt.step_tol * (out.params.norm() + opt.step_tol);
                    out.params = x_trial;
                    r = r_trial;
                    cost = trial_cost;
                    jacobian(out.params, J);
                    ++out.iterations;
                    out.accepted_costs.push_back(static_cast<double>(cost));
                    lambda = std::max(lambda / opt.damping_decrease, 1e-20);
                    if (!J.allFinite()) {
                        out.stop = StopReason::NonFinite;
                        done = true;
                    } else if (tiny) {
                        out.stop = StopReason::Step;
                        done = true;
                    }
                    break;
                }
                // A rejected step already below the step tolerance means the
                // model cannot improve further in floating point.
                if (step.norm() <= opt.step_tol * (out.params.norm() + opt.step_tol)) {
                    out.stop = StopReason::Step;
                    done = true;
                    break;
                }
            }
            lambda *= opt.damping_increase;
            if (lambda > opt.max_damping) {
                out.stop = StopReason::Singular;
                done = true;
                break;
            }
        }
    }

    finish(out, J, r);
    out.converged = (out.stop == StopReason::Gradient || out.stop == StopReason::Step) &&
                    std::isfinite(out.residual_norm) && out.gradient_norm < opt.gradient_tol;
    return out;
}

}  // namespace qplas::estimation
