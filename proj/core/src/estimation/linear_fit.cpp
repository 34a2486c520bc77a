#include "qplas/estimation/linear_fit.hpp"

#include <cmath>

#include "qplas/errors.hpp"

namespace qplas::estimation {

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DomainError("linear_fit: xs and ys differ in length");
    if (xs.size() < 3) throw DomainError("linear_fit: need at least 3 points");
    const double n = static_cast<double>(xs.size());

    double xbar = 0.0;
    double ybar = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= n;
    ybar /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - xbar;
        sxx += dx * dx;
        sxy += dx * (ys[i] - ybar);
    }
    if (!(sxx > 0.0) || !std::isfinite(sxx)) throw DegenerateFitError("linear_fit: x values are all equal");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;

    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ssr += e * e;
    }
    const double s2 = ssr / (n - 2.0);
    fit.std_slope = std::sqrt(s2 / sxx);
    fit.std_intercept = std::sqrt(s2 * (1.0 / n + xbar * xbar / sxx));
    return fit;
}

}  // namespace qplas::estimation
