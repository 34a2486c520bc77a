#include "qplas/spr_optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qplas/csv.hpp"
#include "qplas/errors.hpp"

namespace qplas::optics {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kGrazingMargin = 1e-6;

// Normal wavevector component in units of k0, on the decaying/outgoing branch.
cplx normal_component(cplx eps, double kx2) {
    cplx kz = std::sqrt(eps - kx2);
    if (kz.imag() < 0.0 || (kz.imag() == 0.0 && kz.real() < 0.0)) kz = -kz;
    return kz;
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

constexpr double kInvPhi = 0.6180339887498949;

template <class F>
double golden_section_min(F&& f, double lo, double hi, double tol) {
    double c = hi - kInvPhi * (hi - lo);
    double d = lo + kInvPhi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > tol) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - kInvPhi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + kInvPhi * (hi - lo);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (lo + hi);
    return f(mid) <= std::min(fc, fd) ? mid : (fc <= fd ? c : d);
}

struct Bracket {
    double lo;
    double hi;
    std::size_t index;
    double value;
    double spread;
};

// Coarse scan locating the smallest sample of f on [lo, hi].
template <class F>
Bracket scan_min(F&& f, double lo, double hi, std::size_t n) {
    const double step = (hi - lo) / static_cast<double>(n - 1);
    std::size_t best = 0;
    double best_v = f(lo);
    double worst_v = best_v;
    for (std::size_t i = 1; i < n; ++i) {
        const double v = f(lo + step * static_cast<double>(i));
        if (v < best_v) {
            best_v = v;
            best = i;
        }
        worst_v = std::max(worst_v, v);
    }
    const double a = lo + step * static_cast<double>(best == 0 ? 0 : best - 1);
    const double b = lo + step * static_cast<double>(std::min(best + 1, n - 1));
    return {a, b, best, best_v, worst_v - best_v};
}

constexpr std::size_t kScanPoints = 4001;

}  // namespace

void LayerStack::validate() const {
    if (!(std::isfinite(prism_index) && prism_index > 0.0)) throw DomainError("prism index must be finite and > 0");
    if (!(std::isfinite(analyte_index) && analyte_index > 0.0)) throw DomainError("analyte index must be finite and > 0");
    if (!(std::isfinite(wavelength_nm) && wavelength_nm > 0.0)) throw DomainError("wavelength must be > 0");
    for (const auto& l : layers) {
        if (!finite(l.permittivity)) throw DomainError("layer permittivity is not finite");
        if (!(std::isfinite(l.thickness_nm) && l.thickness_nm > 0.0)) throw DomainError("layer thickness must be > 0");
    }
}

bool LayerStack::supports_tir() const noexcept { return prism_index > analyte_index; }

double LayerStack::critical_angle() const {
    if (!supports_tir()) throw DomainError("no total internal reflection: prism index <= analyte index");
    return std::asin(analyte_index / prism_index);
}

LayerStack LayerStack::with_analyte_index(double n) const {
    LayerStack s = *this;
    s.analyte_index = n;
    return s;
}

void EfficiencyBudget::validate() const {
    for (double f : {prism_bulk, prism_surfaces, detector_and_coupling, residual}) {
        if (!(f > 0.0 && f <= 1.0)) throw DomainError("efficiency factors must lie in (0, 1]");
    }
}

double EfficiencyBudget::product() const noexcept {
    return prism_bulk * prism_surfaces * detector_and_coupling * residual;
}

EfficiencyBudget reference_budget() {
    EfficiencyBudget b;
    b.prism_bulk = 0.71;
    b.prism_surfaces = 0.64 / 0.71;
    b.detector_and_coupling = 0.20;
    b.residual = 0.10 / 0.128;
    return b;
}

cplx reflection_coefficient(const LayerStack& stack, double theta) {
    stack.validate();
    if (!(theta >= 0.0 && theta < kPi / 2)) throw DomainError("reflectance: theta must lie in [0, pi/2)");

    const double k0 = 2.0 * kPi / stack.wavelength_nm;
    const double s = stack.prism_index * std::sin(theta);
    const double kx2 = s * s;

    const cplx eps_in = stack.prism_index * stack.prism_index;
    const cplx eps_out = stack.analyte_index * stack.analyte_index;
    const cplx q_in = normal_component(eps_in, kx2) / eps_in;
    const cplx q_out = normal_component(eps_out, kx2) / eps_out;

    // Characteristic matrix of the film sequence (p-polarization, q = kz/eps).
    cplx m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
    const cplx i(0.0, 1.0);
    for (const auto& layer : stack.layers) {
        const cplx kz = normal_component(layer.permittivity, kx2);
        const cplx q = kz / layer.permittivity;
        const cplx beta = k0 * layer.thickness_nm * kz;
        const cplx c = std::cos(beta);
        const cplx sn = std::sin(beta);
        // sin(beta)/q -> k0 d eps as kz -> 0
        const cplx sin_over_q = std::abs(kz) > 1e-12 ? sn / q : k0 * layer.thickness_nm * layer.permittivity;
        const cplx a11 = c, a12 = -i * sin_over_q, a21 = -i * q * sn, a22 = c;
        const cplx n11 = m11 * a11 + m12 * a21;
        const cplx n12 = m11 * a12 + m12 * a22;
        const cplx n21 = m21 * a11 + m22 * a21;
        const cplx n22 = m21 * a12 + m22 * a22;
        m11 = n11;
        m12 = n12;
        m21 = n21;
        m22 = n22;
    }
    const cplx left = (m11 + m12 * q_out) * q_in;
    const cplx right = m21 + m22 * q_out;
    const cplx r = (left - right) / (left + right);
    if (!finite(r)) throw DomainError("reflectance: non-finite result");
    return r;
}

double reflectance(const LayerStack& stack, double theta) {
    return std::norm(reflection_coefficient(stack, theta));
}

double find_resonance_angle(const LayerStack& stack) {
    const double lo = stack.critical_angle();
    const double hi = kPi / 2 - kGrazingMargin;
    auto R = [&](double th) { return reflectance(stack, th); };
    const auto br = scan_min(R, lo, hi, kScanPoints);
    if (br.spread < 1e-9 || br.index == 0 || br.index == kScanPoints - 1) {
        throw NoResonanceError("no reflectance minimum between the critical angle and grazing incidence");
    }
    return golden_section_min(R, br.lo, br.hi, 1e-12);
}

OperatingPoint operating_point(const LayerStack& stack, double drop_fraction) {
    if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) throw DomainError("drop_fraction must lie in [0, 1)");
    OperatingPoint op;
    op.theta_resonance = find_resonance_angle(stack);
    op.R_resonance = reflectance(stack, op.theta_resonance);

    const double lo = stack.critical_angle();
    auto negR = [&](double th) { return -reflectance(stack, th); };
    const auto br = scan_min(negR, lo, op.theta_resonance, kScanPoints);
    op.theta_plateau = golden_section_min(negR, br.lo, br.hi, 1e-12);
    op.R_offres = reflectance(stack, op.theta_plateau);

    const double target = (1.0 - drop_fraction) * op.R_offres;
    if (drop_fraction == 0.0) {
        op.theta = op.theta_plateau;
        op.reflectance = op.R_offres;
        return op;
    }
    if (target < op.R_resonance) {
        throw DomainError("operating_point: dip is shallower than the requested drop");
    }
    double a = op.theta_plateau;  // R(a) >= target
    double b = op.theta_resonance;  // R(b) <= target
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        if (reflectance(stack, m) >= target) {
            a = m;
        } else {
            b = m;
        }
    }
    op.theta = 0.5 * (a + b);
    op.reflectance = reflectance(stack, op.theta);
    return op;
}

double system_transmission(double R, const EfficiencyBudget& budget) {
    if (!(R >= 0.0 && R <= 1.0)) throw DomainError("system_transmission: R must lie in [0, 1]");
    budget.validate();
    return R * budget.prism_bulk * budget.prism_surfaces * budget.detector_and_coupling * budget.residual;
}

double analyte_index_trajectory(double fraction_bound, double n_buffer, double delta_n_max) {
    if (!(fraction_bound >= 0.0 && fraction_bound <= 1.0)) throw DomainError("fraction_bound must lie in [0, 1]");
    if (!(std::isfinite(n_buffer) && n_buffer > 0.0)) throw DomainError("buffer index must be > 0");
    if (!std::isfinite(delta_n_max)) throw DomainError("delta_n_max must be finite");
    return n_buffer + fraction_bound * delta_n_max;
}

std::vector<SweepPoint> angle_sweep(const LayerStack& stack, double theta_lo, double theta_hi, std::size_t n_points) {
    if (n_points < 2 || !(theta_hi > theta_lo)) throw DomainError("angle_sweep: need n_points >= 2 and hi > lo");
    std::vector<SweepPoint> out;
    out.reserve(n_points);
    const double step = (theta_hi - theta_lo) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double th = theta_lo + step * static_cast<double>(i);
        out.push_back({th, reflectance(stack, th)});
    }
    return out;
}

std::string format_sweep_csv(const std::vector<SweepPoint>& sweep) {
    std::ostringstream out;
    out << "theta_rad,R\n";
    for (const auto& p : sweep) out << csv::format_number(p.theta) << ',' << csv::format_number(p.R) << '\n';
    return out.str();
}

}  // namespace qplas::optics
