#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qplas::estimation {

using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;
using JacobianFn = std::function<void(const Eigen::VectorXd& params, Eigen::MatrixXd& jacobian)>;

struct LmOptions {
    double gradient_tol = 1e-10;   // on max |J^T r|
    double step_tol = 1e-12;       // on |step| / (|x| + step_tol)
    int max_iterations = 200;
    double initial_damping = 1e-9; // lambda, relative to diag(J^T J)
    double damping_increase = 10.0;
    double damping_decrease = 10.0;
    double max_damping = 1e16;
};

enum class StopReason { Gradient, Step, MaxIterations, Singular, NonFinite };
std::string_view to_string(StopReason r) noexcept;

struct FitResult {
    Eigen::VectorXd params;
    Eigen::VectorXd param_std;     // sqrt(diag((J^T J)^-1) * |r|^2 / (n - p))
    double residual_norm = 0.0;    // |r|_2 at params
    double gradient_norm = 0.0;    // |J^T r|_inf at params
    int iterations = 0;            // accepted steps
    bool converged = false;
    StopReason stop = StopReason::MaxIterations;
    std::vector<double> accepted_costs;  // 0.5 |r|^2 after each accepted step, starting with the initial cost
};

// Marquardt-scaled damped Gauss-Newton. The damping shrinks after an accepted
// step and grows after a rejected one; the iteration ends on a small gradient,
// a small relative step, the iteration cap, or damping overflow. Never throws
// on numerical failure: it reports converged = false instead.
FitResult levenberg_marquardt(std::size_t n_residuals, const ResidualFn& residual, const JacobianFn& jacobian,
                              const Eigen::VectorXd& init, const LmOptions& options = {});

}  // namespace qplas::estimation
