#pragma once

#include <span>

namespace qplas::estimation {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double std_slope = 0.0;
    double std_intercept = 0.0;
};

// Ordinary least squares y = slope x + intercept; standard errors from the
// residual variance with n - 2 degrees of freedom. Needs >= 3 points and at
// least two distinct x values (DegenerateFitError otherwise).
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

}  // namespace qplas::estimation
