#pragma once

// One-site association model for a ligand injected over a receptor surface,
// together with the concentration chemistry of an injection and the algebra
// that links observable rate, affinity and the two rate constants.
//
// Units: concentrations in mol/L (M), rates in 1/s (kd, ks) and 1/(M s) (ka),
// affinity in 1/M, transmissions dimensionless.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qplas::kinetics {

struct KineticParams {
    double ka = 0.0;    // association rate, 1/(M s)
    double kd = 0.0;    // dissociation rate, 1/s
    double KA = 0.0;    // affinity ka/kd, 1/M
    double L0 = 0.0;    // ligand concentration in the sensing cavity, M
    double ks = 0.0;    // observable rate ka*L0 + kd, 1/s
    double Tinf = 0.0;  // steady-state rise amplitude of the transmission

    // Fills KA and ks from ka, kd and L0. KA is left at 0 when kd == 0.
    static KineticParams from_rates(double ka, double kd, double L0, double Tinf);

    // Throws DomainError if any invariant is violated.
    void validate() const;
};

struct InjectionRecipe {
    std::string label;             // display only, e.g. "1.5%"
    double dry_mass_g = 0.0;
    double molar_mass_g_per_mol = 0.0;
    double solvent_volume_l = 0.0;
    double injected_volume_l = 0.0;
    double cavity_volume_l = 0.0;
};

// Molar mass of bovine serum albumin used for the reference recipes.
inline constexpr double kBsaMolarMass = 66430.0;

// 0.15/0.10/0.075/0.05 g of BSA in 10 ml, 0.13 ml injected into a 0.5 ml cavity.
std::vector<InjectionRecipe> reference_recipes();

struct Sensorgram {
    std::vector<double> time_s;
    std::vector<double> T_mean;
    std::vector<double> T_std;

    std::size_t size() const noexcept { return time_s.size(); }
};

double observable_rate(double ka, double L0, double kd);

// T0 + Tinf (1 - exp(-ks t)) without argument checks, for use inside fits.
double association_curve(double t, double T0, double Tinf, double ks) noexcept;

double model_transmission(double t, double Tinf, double ks, double T0);

// Noiseless sensorgram on `time_grid` (strictly increasing, t >= 0).
Sensorgram generate_sensorgram(const KineticParams& params, double T0, std::span<const double> time_grid);

// Concentration after the injected volume mixes into the cavity, in M.
double cavity_concentration(const InjectionRecipe& recipe);

struct ReciprocalAffinity {
    double KA = 0.0;
    double alpha = 0.0;
};

// Inverts 1/Tinf = (alpha/KA) (1/L0) + alpha given slope and intercept of the
// double-reciprocal line.
ReciprocalAffinity affinity_from_reciprocal_fit(double slope, double intercept);

// Steady-state amplitude implied by the same relation: Tmax KA L0 / (1 + KA L0),
// with Tmax = 1/alpha the saturation amplitude.
double steady_state_amplitude(double Tmax, double KA, double L0);

struct RateConstants {
    double kd = 0.0;
    double ka = 0.0;
};

// Solves ks = KA kd L0 + kd for kd, then ka = KA kd.
RateConstants rates_from_affinity(double ks, double KA, double L0);

// CSV with header `time_s,T_mean,T_std`.
std::string format_sensorgram_csv(const Sensorgram& s);
Sensorgram parse_sensorgram_csv(std::string_view text, const std::string& source);

}  // namespace qplas::kinetics
