#include "qplas/estimation/dataset.hpp"

#include <cmath>
#include <sstream>

#include "qplas/csv.hpp"
#include "qplas/errors.hpp"
#include "qplas/photon_stats.hpp"

namespace qplas::estimation {

void ExperimentDataset::validate() const {
    if (time_s.size() != samples.size()) throw DomainError("dataset: time and sample lists differ in length");
    for (std::size_t b = 0; b < samples.size(); ++b) {
        if (samples[b].empty()) throw DomainError("dataset: empty time bin");
        for (double x : samples[b]) {
            if (!std::isfinite(x) || x < 0.0) throw DomainError("dataset: T_i must be finite and >= 0");
        }
        if (!std::isfinite(time_s[b])) throw DomainError("dataset: non-finite time");
    }
    if (time_s.size() >= 2) {
        const double step = time_s[1] - time_s[0];
        if (!(step > 0.0)) throw DomainError("dataset: times must be strictly increasing");
        for (std::size_t b = 2; b < time_s.size(); ++b) {
            const double d = time_s[b] - time_s[b - 1];
            if (!(d > 0.0)) throw DomainError("dataset: times must be strictly increasing");
            if (std::abs(d - step) > 1e-6 * step) throw DomainError("dataset: bins are not uniformly spaced");
        }
    }
    if (L0 && !(std::isfinite(*L0) && *L0 >= 0.0)) throw DomainError("dataset: L0 must be >= 0");
}

kinetics::Sensorgram ExperimentDataset::mean_sensorgram() const {
    kinetics::Sensorgram s;
    s.time_s = time_s;
    s.T_mean.reserve(bins());
    s.T_std.reserve(bins());
    for (const auto& bin : samples) {
        const auto st = photon::set_statistics(bin);
        s.T_mean.push_back(st.mean_T);
        s.T_std.push_back(st.std_T);
    }
    return s;
}

std::string format_dataset_csv(const ExperimentDataset& ds) {
    std::ostringstream out;
    out << "time_s,set_index,T_i";
    if (ds.L0) out << ",L0_M";
    out << '\n';
    const std::string l0 = ds.L0 ? "," + csv::format_number(*ds.L0) : std::string{};
    for (std::size_t b = 0; b < ds.bins(); ++b) {
        const std::string t = csv::format_number(ds.time_s[b]);
        for (std::size_t i = 0; i < ds.samples[b].size(); ++i) {
            out << t << ',' << i << ',' << csv::format_number(ds.samples[b][i]) << l0 << '\n';
        }
    }
    return out.str();
}

ExperimentDataset parse_dataset_csv(std::string_view text, const std::string& source) {
    const auto table = csv::parse(text, source);
    const auto ct = table.column("time_s");
    const auto cs = table.column("set_index");
    const auto cv = table.column("T_i");
    const auto cl = table.find_column("L0_M");

    ExperimentDataset ds;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto line = table.lines[r];
        const double t = csv::parse_number(row[ct], source, line);
        const auto idx = csv::parse_integer(row[cs], source, line);
        const double v = csv::parse_number(row[cv], source, line);
        if (idx < 0) throw ParseError(source, line, "set_index must be >= 0");
        if (!std::isfinite(v) || v < 0.0) throw ParseError(source, line, "T_i must be finite and >= 0");
        if (cl) {
            const double l0 = csv::parse_number(row[*cl], source, line);
            if (!ds.L0) {
                if (l0 < 0.0) throw ParseError(source, line, "L0_M must be >= 0");
                ds.L0 = l0;
            } else if (l0 != *ds.L0) {
                throw ParseError(source, line, "L0_M differs from earlier rows");
            }
        }
        if (ds.time_s.empty() || t != ds.time_s.back()) {
            if (!ds.time_s.empty() && t < ds.time_s.back()) {
                throw ParseError(source, line, "time_s must be non-decreasing with each bin's rows contiguous");
            }
            ds.time_s.push_back(t);
            ds.samples.emplace_back();
        }
        ds.samples.back().push_back(v);
    }
    try {
        ds.validate();
    } catch (const DomainError& e) {
        throw ParseError(source, table.lines.empty() ? 1 : table.lines.back(), e.what());
    }
    return ds;
}

double baseline_transmission(const ExperimentDataset& ds) {
    if (ds.bins() == 0) throw DomainError("baseline_transmission: empty dataset");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < ds.bins() && ds.time_s[b] < 0.0; ++b) {
        sum += photon::set_statistics(ds.samples[b]).mean_T;
        ++n;
    }
    if (n == 0) return photon::set_statistics(ds.samples.front()).mean_T;
    return sum / static_cast<double>(n);
}

AlignedDataset align_dataset(const ExperimentDataset& ds, double injection_time_s,
                             std::optional<double> target_baseline) {
    if (!std::isfinite(injection_time_s)) throw DomainError("align_dataset: injection time must be finite");
    AlignedDataset out;
    out.dataset = ds;
    out.offsets.time_shift_s = injection_time_s;
    for (double& t : out.dataset.time_s) t -= injection_time_s;
    if (target_baseline) {
        out.offsets.T_shift = *target_baseline - baseline_transmission(out.dataset);
        for (auto& bin : out.dataset.samples) {
            for (double& x : bin) {
                x += out.offsets.T_shift;
                if (x < 0.0) throw DomainError("align_dataset: baseline shift makes a transmission negative");
            }
        }
    }
    return out;
}

}  // namespace qplas::estimation
