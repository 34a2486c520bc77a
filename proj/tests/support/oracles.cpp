#include "oracles.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>

namespace oracle {

std::vector<qplas::timetag::Pair> brute_force_match(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                                                    std::int64_t window_ps, bool symmetric) {
    // Matched B timestamps are overwritten with a sentinel that can never
    // satisfy 0 <= tb - ta <= window.
    std::vector<std::int64_t> tb(b.begin(), b.end());
    constexpr std::int64_t kUsed = std::numeric_limits<std::int64_t>::min() / 2;
    std::vector<qplas::timetag::Pair> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::int64_t ta = a[i];
        std::size_t best = tb.size();
        std::int64_t best_t = std::numeric_limits<std::int64_t>::max();
        for (std::size_t j = 0; j < tb.size(); ++j) {
            const bool inside = symmetric ? (tb[j] != kUsed && std::abs(tb[j] - ta) <= window_ps)
                                          : static_cast<std::uint64_t>(tb[j] - ta) <= static_cast<std::uint64_t>(window_ps);
            if (inside && tb[j] < best_t) {
                best_t = tb[j];
                best = j;
            }
        }
        if (best < tb.size()) {
            out.push_back({i, best});
            tb[best] = kUsed;
        }
    }
    return out;
}

double interface_recursion_reflectance(const qplas::optics::LayerStack& stack, double theta) {
    using cplx = std::complex<double>;
    const double k0 = 2.0 * std::numbers::pi / stack.wavelength_nm;
    const double kx = stack.prism_index * std::sin(theta);

    std::vector<cplx> eps;
    std::vector<double> thick;
    eps.push_back(stack.prism_index * stack.prism_index);
    thick.push_back(0.0);
    for (const auto& l : stack.layers) {
        eps.push_back(l.permittivity);
        thick.push_back(l.thickness_nm);
    }
    eps.push_back(stack.analyte_index * stack.analyte_index);
    thick.push_back(0.0);

    std::vector<cplx> kz(eps.size());
    for (std::size_t j = 0; j < eps.size(); ++j) {
        cplx z = std::sqrt(eps[j] - kx * kx);
        if (z.imag() < 0.0 || (z.imag() == 0.0 && z.real() < 0.0)) z = -z;
        kz[j] = z;
    }
    auto fresnel_p = [&](std::size_t i, std::size_t j) {
        return (eps[j] * kz[i] - eps[i] * kz[j]) / (eps[j] * kz[i] + eps[i] * kz[j]);
    };

    const std::size_t last = eps.size() - 1;
    cplx r = fresnel_p(last - 1, last);
    for (std::size_t j = last - 1; j-- > 0;) {
        const cplx phase = std::exp(cplx(0.0, 2.0) * k0 * thick[j + 1] * kz[j + 1]);
        const cplx rij = fresnel_p(j, j + 1);
        r = (rij + r * phase) / (1.0 + rij * r * phase);
    }
    return std::norm(r);
}

double integrate_binding_ode(double ka, double kd, double L0, double Tinf, double T0, double t_end, double dt) {
    const double kon = ka * L0;
    const double bmax = Tinf * (kon + kd) / kon;
    auto f = [&](double B) { return kon * (bmax - B) - kd * B; };
    double B = 0.0;
    double t = 0.0;
    while (t < t_end - 1e-15) {
        const double h = std::min(dt, t_end - t);
        const double k1 = f(B);
        const double k2 = f(B + 0.5 * h * k1);
        const double k3 = f(B + 0.5 * h * k2);
        const double k4 = f(B + h * k3);
        B += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
    }
    return T0 + B;
}

std::vector<double> central_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> x, double h_rel) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double h = h_rel * std::max(std::abs(xi), 1e-8);
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

std::pair<double, double> grid_min_reflectance(const qplas::optics::LayerStack& stack, double lo, double hi,
                                               std::size_t n) {
    double best_t = lo;
    double best_r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double th = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double r = interface_recursion_reflectance(stack, th);
        if (r < best_r) {
            best_r = r;
            best_t = th;
        }
    }
    return {best_t, best_r};
}

std::vector<double> bernoulli_convolution_pmf(double T, int nu) {
    std::vector<double> pmf{1.0};
    for (int k = 0; k < nu; ++k) {
        std::vector<double> next(pmf.size() + 1, 0.0);
        for (std::size_t j = 0; j < pmf.size(); ++j) {
            next[j] += pmf[j] * (1.0 - T);
            next[j + 1] += pmf[j] * T;
        }
        pmf.swap(next);
    }
    return pmf;
}

std::vector<double> binomial_pmf(double T, int nu) {
    std::vector<double> pmf(static_cast<std::size_t>(nu) + 1);
    for (int k = 0; k <= nu; ++k) {
        const double logc = std::lgamma(nu + 1.0) - std::lgamma(k + 1.0) - std::lgamma(nu - k + 1.0);
        pmf[static_cast<std::size_t>(k)] = std::exp(logc + k * std::log(T) + (nu - k) * std::log1p(-T));
    }
    return pmf;
}

}  // namespace oracle
