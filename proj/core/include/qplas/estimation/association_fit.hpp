#pragma once

#include <array>
#include <span>

#include "qplas/estimation/levenberg_marquardt.hpp"

namespace qplas::estimation {

// Parameter order for association fits.
enum AssociationParam : int { kT0 = 0, kTinf = 1, kKs = 2 };

// d/d(T0, Tinf, ks) of T0 + Tinf (1 - exp(-ks t)).
std::array<double, 3> association_gradient(double t, double T0, double Tinf, double ks) noexcept;

// T0 from the first point, Tinf from last minus first, ks from the inverse of
// the time to half rise.
Eigen::Vector3d association_initial_guess(std::span<const double> time_s, std::span<const double> T);

// Unweighted least-squares fit of the baseline association curve.
FitResult fit_association(std::span<const double> time_s, std::span<const double> T, const LmOptions& options = {});
FitResult fit_association(std::span<const double> time_s, std::span<const double> T, const Eigen::Vector3d& init,
                          const LmOptions& options = {});

}  // namespace qplas::estimation
