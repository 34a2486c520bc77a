#include "qplas/estimation/association_fit.hpp"

#include <cmath>

#include "qplas/errors.hpp"
#include "qplas/kinetics.hpp"

namespace qplas::estimation {

std::array<double, 3> association_gradient(double t, double /*T0*/, double Tinf, double ks) noexcept {
    const double e = std::exp(-ks * t);
    return {1.0, -std::expm1(-ks * t), Tinf * t * e};
}

Eigen::Vector3d association_initial_guess(std::span<const double> time_s, std::span<const double> T) {
    if (time_s.size() != T.size() || T.empty()) throw DomainError("association_initial_guess: bad input sizes");
    const double first = T.front();
    const double last = T.back();
    const double rise = last - first;
    const double t0 = time_s.front();
    const double span = time_s.back() - t0;

    double t_half = span > 0.0 ? 0.5 * span : 1.0;
    if (rise != 0.0) {
        const double half = first + 0.5 * rise;
        for (std::size_t i = 1; i < T.size(); ++i) {
            const bool crossed = rise > 0.0 ? T[i] >= half : T[i] <= half;
            if (crossed) {
                const double dy = T[i] - T[i - 1];
                const double frac = dy != 0.0 ? (half - T[i - 1]) / dy : 0.0;
                t_half = time_s[i - 1] + frac * (time_s[i] - time_s[i - 1]);
                break;
            }
        }
    }
    if (!(t_half > 0.0)) t_half = span > 0.0 ? span / static_cast<double>(T.size()) : 1.0;
    return {first, rise, 1.0 / t_half};
}

FitResult fit_association(std::span<const double> time_s, std::span<const double> T, const LmOptions& options) {
    return fit_association(time_s, T, association_initial_guess(time_s, T), options);
}

FitResult fit_association(std::span<const double> time_s, std::span<const double> T, const Eigen::Vector3d& init,
                          const LmOptions& options) {
    if (time_s.size() != T.size()) throw DomainError("fit_association: time and T differ in length");
    if (time_s.size() < 3) throw DomainError("fit_association: need at least 3 points");
    const auto n = time_s.size();
    auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        r.resize(static_cast<Eigen::Index>(n));
        // Extended precision keeps the residuals' rounding below the cost changes near the optimum.
        for (std::size_t i = 0; i < n; ++i) {
            const long double model = static_cast<long double>(p[kT0]) -
                                      static_cast<long double>(p[kTinf]) * std::expm1(-static_cast<long double>(p[kKs]) * time_s[i]);
            r[static_cast<Eigen::Index>(i)] = static_cast<double>(model - T[i]);
        }
    };
    auto jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& J) {
        J.resize(static_cast<Eigen::Index>(n), 3);
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = association_gradient(time_s[i], p[kT0], p[kTinf], p[kKs]);
            const auto row = static_cast<Eigen::Index>(i);
            J(row, 0) = g[0];
            J(row, 1) = g[1];
            J(row, 2) = g[2];
        }
    };
    return levenberg_marquardt(n, residual, jacobian, Eigen::VectorXd(init), options);
}

}  // namespace qplas::estimation
