#include "qplas/kinetics.hpp"

#include <cmath>
#include <sstream>

#include "qplas/csv.hpp"
#include "qplas/errors.hpp"

namespace qplas::kinetics {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

KineticParams KineticParams::from_rates(double ka, double kd, double L0, double Tinf) {
    KineticParams p;
    p.ka = ka;
    p.kd = kd;
    p.L0 = L0;
    p.Tinf = Tinf;
    p.ks = observable_rate(ka, L0, kd);
    p.KA = kd > 0.0 ? ka / kd : 0.0;
    return p;
}

void KineticParams::validate() const {
    require(finite_nonneg(ka), "ka must be finite and >= 0");
    require(finite_nonneg(kd), "kd must be finite and >= 0");
    require(finite_nonneg(L0), "L0 must be finite and >= 0");
    require(std::isfinite(ks) && ks >= kd * (1.0 - 1e-12), "ks must be >= kd");
    require(std::isfinite(Tinf) && Tinf >= 0.0 && Tinf <= 1.0, "Tinf must lie in [0, 1]");
    if (kd > 0.0 && KA != 0.0) {
        const double expected = ka / kd;
        require(std::abs(KA - expected) <= 1e-9 * std::abs(expected), "KA inconsistent with ka/kd");
    }
}

std::vector<InjectionRecipe> reference_recipes() {
    const double solvent = 10e-3;
    const double injected = 0.13e-3;
    const double cavity = 0.5e-3;
    return {
        {"1.5%", 0.15, kBsaMolarMass, solvent, injected, cavity},
        {"1%", 0.10, kBsaMolarMass, solvent, injected, cavity},
        {"0.75%", 0.075, kBsaMolarMass, solvent, injected, cavity},
        {"0.5%", 0.05, kBsaMolarMass, solvent, injected, cavity},
    };
}

double observable_rate(double ka, double L0, double kd) {
    require(finite_nonneg(ka) && finite_nonneg(L0) && finite_nonneg(kd),
            "observable_rate: ka, L0 and kd must be finite and >= 0");
    return ka * L0 + kd;
}

double association_curve(double t, double T0, double Tinf, double ks) noexcept {
    return T0 + Tinf * -std::expm1(-ks * t);
}

double model_transmission(double t, double Tinf, double ks, double T0) {
    require(std::isfinite(t) && t >= 0.0, "model_transmission: t must be >= 0");
    require(finite_nonneg(ks), "model_transmission: ks must be >= 0");
    require(finite_nonneg(T0) && finite_nonneg(Tinf) && T0 + Tinf <= 1.0,
            "model_transmission: need T0, Tinf >= 0 and T0 + Tinf <= 1");
    return association_curve(t, T0, Tinf, ks);
}

Sensorgram generate_sensorgram(const KineticParams& params, double T0, std::span<const double> time_grid) {
    require(!time_grid.empty(), "generate_sensorgram: empty time grid");
    for (std::size_t i = 1; i < time_grid.size(); ++i) {
        require(time_grid[i] > time_grid[i - 1], "generate_sensorgram: time grid must be strictly increasing");
    }
    Sensorgram s;
    s.time_s.assign(time_grid.begin(), time_grid.end());
    s.T_mean.reserve(time_grid.size());
    for (double t : time_grid) s.T_mean.push_back(model_transmission(t, params.Tinf, params.ks, T0));
    s.T_std.assign(time_grid.size(), 0.0);
    return s;
}

double cavity_concentration(const InjectionRecipe& r) {
    require(std::isfinite(r.dry_mass_g) && r.dry_mass_g >= 0.0, "cavity_concentration: dry mass must be >= 0");
    require(r.molar_mass_g_per_mol > 0.0 && r.solvent_volume_l > 0.0 && r.injected_volume_l > 0.0 &&
                r.cavity_volume_l > 0.0,
            "cavity_concentration: molar mass and volumes must be > 0");
    require(r.injected_volume_l <= r.solvent_volume_l, "cavity_concentration: injected volume exceeds solvent volume");
    const double stock = r.dry_mass_g / (r.molar_mass_g_per_mol * r.solvent_volume_l);
    return stock * r.injected_volume_l / (r.injected_volume_l + r.cavity_volume_l);
}

ReciprocalAffinity affinity_from_reciprocal_fit(double slope, double intercept) {
    if (slope == 0.0 || intercept == 0.0 || !std::isfinite(slope) || !std::isfinite(intercept)) {
        throw DegenerateFitError("double-reciprocal fit has zero or non-finite slope/intercept");
    }
    return {intercept / slope, intercept};
}

double steady_state_amplitude(double Tmax, double KA, double L0) {
    require(finite_nonneg(Tmax) && finite_nonneg(KA) && finite_nonneg(L0),
            "steady_state_amplitude: inputs must be finite and >= 0");
    const double occupancy = KA * L0;
    return Tmax * occupancy / (1.0 + occupancy);
}

RateConstants rates_from_affinity(double ks, double KA, double L0) {
    require(std::isfinite(ks) && ks > 0.0, "rates_from_affinity: ks must be > 0");
    require(std::isfinite(KA) && KA > 0.0, "rates_from_affinity: KA must be > 0");
    require(std::isfinite(L0) && L0 > 0.0, "rates_from_affinity: L0 must be > 0");
    RateConstants r;
    r.kd = ks / (KA * L0 + 1.0);
    r.ka = KA * r.kd;
    return r;
}

std::string format_sensorgram_csv(const Sensorgram& s) {
    std::ostringstream out;
    out << "time_s,T_mean,T_std\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << csv::format_number(s.time_s[i]) << ',' << csv::format_number(s.T_mean[i]) << ','
            << csv::format_number(s.T_std[i]) << '\n';
    }
    return out.str();
}

Sensorgram parse_sensorgram_csv(std::string_view text, const std::string& source) {
    const auto table = csv::parse(text, source);
    const auto ct = table.column("time_s");
    const auto cm = table.column("T_mean");
    const auto cs = table.column("T_std");
    Sensorgram s;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto line = table.lines[r];
        s.time_s.push_back(csv::parse_number(table.rows[r][ct], source, line));
        s.T_mean.push_back(csv::parse_number(table.rows[r][cm], source, line));
        const double sd = csv::parse_number(table.rows[r][cs], source, line);
        if (sd < 0.0) throw ParseError(source, line, "T_std must be >= 0");
        s.T_std.push_back(sd);
    }
    return s;
}

}  // namespace qplas::kinetics
