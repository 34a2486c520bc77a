#include "qplas/runner/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qplas/csv.hpp"
#include "qplas/errors.hpp"

namespace qplas::runner {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Where {
    const std::string& source;
    std::size_t line;
    const std::string& key;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(source + ":" + std::to_string(line) + ": " + key + ": " + what);
    }
};

double to_double(std::string_view v, const Where& w) {
    try {
        const double x = csv::parse_number(v, w.source, w.line);
        if (!std::isfinite(x)) w.fail("value must be finite");
        return x;
    } catch (const ParseError&) {
        w.fail("expected a number, got '" + std::string(v) + "'");
    }
}

std::int64_t to_int(std::string_view v, const Where& w) {
    try {
        return csv::parse_integer(v, w.source, w.line);
    } catch (const ParseError&) {
        w.fail("expected an integer, got '" + std::string(v) + "'");
    }
}

bool to_bool(std::string_view v, const Where& w) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    w.fail("expected true or false, got '" + std::string(v) + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }
std::string num(double x) { return csv::format_number(x); }
std::string num(std::int64_t x) { return std::to_string(x); }

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

struct Field {
    const char* key;
    bool echoed;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, const Where&)> set;
};

#define QPLAS_DOUBLE(KEY, MEMBER)                                                                             \
    Field {                                                                                                   \
        KEY, true, [](const RunConfig& c) { return num(c.MEMBER); },                                          \
            [](RunConfig& c, const std::string& v, const Where& w) { c.MEMBER = to_double(v, w); }            \
    }
#define QPLAS_INT(KEY, MEMBER)                                                                                \
    Field {                                                                                                   \
        KEY, true, [](const RunConfig& c) { return num(static_cast<std::int64_t>(c.MEMBER)); },               \
            [](RunConfig& c, const std::string& v, const Where& w) { c.MEMBER = to_int(v, w); }               \
    }
#define QPLAS_BOOL(KEY, MEMBER)                                                                               \
    Field {                                                                                                   \
        KEY, true, [](const RunConfig& c) { return from_bool(c.MEMBER); },                                    \
            [](RunConfig& c, const std::string& v, const Where& w) { c.MEMBER = to_bool(v, w); }              \
    }

// Recipe columns share one value across all injections.
template <class Member>
Field recipe_scalar(const char* key, Member member) {
    return Field{key, true,
                 [member](const RunConfig& c) { return c.recipes.empty() ? std::string("0") : num(c.recipes.front().*member); },
                 [member](RunConfig& c, const std::string& v, const Where& w) {
                     const double x = to_double(v, w);
                     for (auto& r : c.recipes) r.*member = x;
                 }};
}

std::string optional_number(const std::optional<double>& x) { return x ? num(*x) : "none"; }
std::optional<double> parse_optional(const std::string& v, const Where& w) {
    if (v == "none" || v.empty()) return std::nullopt;
    return to_double(v, w);
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        Field{"seed", true, [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string("none"); },
              [](RunConfig& c, const std::string& v, const Where& w) {
                  if (v == "none") {
                      c.seed.reset();
                      return;
                  }
                  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
                      w.fail("expected a non-negative integer");
                  }
                  try {
                      c.seed = std::stoull(v);
                  } catch (const std::exception&) {
                      w.fail("seed out of range");
                  }
              }},
        Field{"probe.kind", true, [](const RunConfig& c) { return std::string(photon::to_string(c.probe)); },
              [](RunConfig& c, const std::string& v, const Where& w) {
                  try {
                      c.probe = photon::parse_probe_kind(v);
                  } catch (const DomainError& e) {
                      w.fail(e.what());
                  }
              }},
        QPLAS_INT("sampling.nu", sampling.nu),
        QPLAS_INT("sampling.mu", sampling.mu),
        QPLAS_DOUBLE("sampling.bin_seconds", sampling.bin_seconds),
        QPLAS_DOUBLE("time.duration_s", duration_s),
        QPLAS_DOUBLE("time.pre_injection_s", pre_injection_s),
        Field{"transmission.source", true,
              [](const RunConfig& c) { return std::string(c.source == TransmissionSource::Direct ? "direct" : "stack"); },
              [](RunConfig& c, const std::string& v, const Where& w) {
                  if (v == "direct") c.source = TransmissionSource::Direct;
                  else if (v == "stack") c.source = TransmissionSource::Stack;
                  else w.fail("expected direct or stack");
              }},
        QPLAS_DOUBLE("direct.T0", direct_T0),
        QPLAS_DOUBLE("direct.Tinf", direct_Tinf),
        QPLAS_DOUBLE("stack.prism_index", stack.prism_index),
        QPLAS_DOUBLE("stack.film_permittivity_re", stack.film_permittivity_re),
        QPLAS_DOUBLE("stack.film_permittivity_im", stack.film_permittivity_im),
        QPLAS_DOUBLE("stack.film_thickness_nm", stack.film_thickness_nm),
        QPLAS_DOUBLE("stack.buffer_index", stack.buffer_index),
        QPLAS_DOUBLE("stack.wavelength_nm", stack.wavelength_nm),
        QPLAS_DOUBLE("stack.operating_drop", stack.operating_drop),
        QPLAS_DOUBLE("stack.delta_n_max", stack.delta_n_max),
        QPLAS_DOUBLE("stack.budget.prism_bulk", stack.budget.prism_bulk),
        QPLAS_DOUBLE("stack.budget.prism_surfaces", stack.budget.prism_surfaces),
        QPLAS_DOUBLE("stack.budget.detector_and_coupling", stack.budget.detector_and_coupling),
        QPLAS_DOUBLE("stack.budget.residual", stack.budget.residual),
        QPLAS_DOUBLE("kinetics.kd", kd),
        QPLAS_DOUBLE("kinetics.KA", KA),
        Field{"injection.labels", true,
              [](const RunConfig& c) {
                  std::vector<std::string> v;
                  for (const auto& r : c.recipes) v.push_back(r.label);
                  return join(v);
              },
              [](RunConfig& c, const std::string& v, const Where& w) {
                  const auto labels = split_list(v);
                  const auto base = c.recipes.empty() ? kinetics::reference_recipes().front() : c.recipes.front();
                  c.recipes.resize(labels.size(), base);
                  for (std::size_t i = 0; i < labels.size(); ++i) {
                      if (labels[i].empty()) w.fail("empty label");
                      if (labels[i].find_first_of("\"\n") != std::string::npos) w.fail("labels may not contain quotes");
                      c.recipes[i].label = labels[i];
                  }
              }},
        Field{"injection.dry_mass_g", true,
              [](const RunConfig& c) {
                  std::vector<std::string> v;
                  for (const auto& r : c.recipes) v.push_back(num(r.dry_mass_g));
                  return join(v);
              },
              [](RunConfig& c, const std::string& v, const Where& w) {
                  const auto parts = split_list(v);
                  if (parts.size() != c.recipes.size()) {
                      w.fail("expected " + std::to_string(c.recipes.size()) + " values (one per label)");
                  }
                  for (std::size_t i = 0; i < parts.size(); ++i) c.recipes[i].dry_mass_g = to_double(parts[i], w);
              }},
        recipe_scalar("injection.molar_mass_g_per_mol", &kinetics::InjectionRecipe::molar_mass_g_per_mol),
        recipe_scalar("injection.solvent_volume_l", &kinetics::InjectionRecipe::solvent_volume_l),
        recipe_scalar("injection.injected_volume_l", &kinetics::InjectionRecipe::injected_volume_l),
        recipe_scalar("injection.cavity_volume_l", &kinetics::InjectionRecipe::cavity_volume_l),
        QPLAS_INT("bootstrap.m", bootstrap_m),
        QPLAS_INT("bootstrap.p", bootstrap_p),
        Field{"bootstrap.threads", false, [](const RunConfig& c) { return std::to_string(c.threads); },
              [](RunConfig& c, const std::string& v, const Where& w) {
                  const auto n = to_int(v, w);
                  if (n < 1 || n > 1024) w.fail("must be in [1, 1024]");
                  c.threads = static_cast<unsigned>(n);
              }},
        QPLAS_DOUBLE("estimate.fit_from_s", fit_from_s),
        QPLAS_DOUBLE("estimate.injection_time_s", injection_time_s),
        Field{"estimate.target_baseline", true, [](const RunConfig& c) { return optional_number(c.target_baseline); },
              [](RunConfig& c, const std::string& v, const Where& w) { c.target_baseline = parse_optional(v, w); }},
        QPLAS_DOUBLE("affinity.steady_center_s", steady_center_s),
        QPLAS_DOUBLE("affinity.steady_width_s", steady_width_s),
        QPLAS_BOOL("affinity.raw_steady_state", raw_steady_state),
        QPLAS_BOOL("timetag.enabled", timetag.enabled),
        QPLAS_DOUBLE("timetag.herald_rate_hz", timetag.herald_rate_hz),
        QPLAS_INT("timetag.window_ps", timetag.window_ps),
        QPLAS_BOOL("timetag.symmetric_window", timetag.symmetric_window),
        QPLAS_INT("timetag.jitter_ps", timetag.jitter_ps),
        QPLAS_DOUBLE("timetag.background_rate_hz", timetag.background_rate_hz),
        QPLAS_DOUBLE("timetag.origin_s", timetag.origin_s),
        Field{"timetag.L0_M", true, [](const RunConfig& c) { return optional_number(c.timetag.L0); },
              [](RunConfig& c, const std::string& v, const Where& w) { c.timetag.L0 = parse_optional(v, w); }},
        Field{"output.dir", false, [](const RunConfig& c) { return c.output_dir; },
              [](RunConfig& c, const std::string& v, const Where& w) {
                  if (v.empty()) w.fail("must not be empty");
                  c.output_dir = v;
              }},
    };
    return table;
}

#undef QPLAS_DOUBLE
#undef QPLAS_INT
#undef QPLAS_BOOL

const Field* find_field(std::string_view key) {
    for (const auto& f : fields()) {
        if (key == f.key) return &f;
    }
    return nullptr;
}

// Lists must be set before the per-entry values that are checked against them.
int apply_order(std::string_view key) {
    if (key == "injection.labels") return 0;
    return 1;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

optics::LayerStack StackSettings::stack() const {
    optics::LayerStack s;
    s.prism_index = prism_index;
    s.layers = {optics::Layer{{film_permittivity_re, film_permittivity_im}, film_thickness_nm}};
    s.analyte_index = buffer_index;
    s.wavelength_nm = wavelength_nm;
    return s;
}

void RunConfig::validate() const {
    require(seed.has_value(), "seed", "a seed is required (config key `seed` or --seed)");
    require(sampling.nu >= 1, "sampling.nu", "must be >= 1");
    require(sampling.mu >= 1, "sampling.mu", "must be >= 1");
    require(sampling.bin_seconds > 0.0, "sampling.bin_seconds", "must be > 0");
    require(duration_s >= 0.0, "time.duration_s", "must be >= 0");
    require(pre_injection_s >= 0.0, "time.pre_injection_s", "must be >= 0");
    require(direct_T0 >= 0.0 && direct_T0 <= 1.0, "direct.T0", "must be in [0, 1]");
    require(direct_Tinf >= 0.0 && direct_T0 + direct_Tinf <= 1.0, "direct.Tinf", "must be >= 0 with T0 + Tinf <= 1");
    require(kd > 0.0, "kinetics.kd", "must be > 0");
    require(KA > 0.0, "kinetics.KA", "must be > 0");
    require(!recipes.empty(), "injection.labels", "at least one injection is required");
    std::set<std::string> seen;
    for (const auto& r : recipes) {
        require(seen.insert(r.label).second, "injection.labels", "duplicate label '" + r.label + "'");
        try {
            static_cast<void>(kinetics::cavity_concentration(r));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("injection: ") + e.what());
        }
    }
    require(bootstrap_m >= 1, "bootstrap.m", "must be >= 1");
    require(bootstrap_p >= 1, "bootstrap.p", "must be >= 1");
    require(threads >= 1, "bootstrap.threads", "must be >= 1");
    require(std::isfinite(fit_from_s), "estimate.fit_from_s", "must be finite");
    require(steady_width_s > 0.0, "affinity.steady_width_s", "must be > 0");
    require(timetag.herald_rate_hz > 0.0, "timetag.herald_rate_hz", "must be > 0");
    require(timetag.window_ps > 0, "timetag.window_ps", "must be > 0");
    require(timetag.jitter_ps >= 0, "timetag.jitter_ps", "must be >= 0");
    require(timetag.background_rate_hz >= 0.0, "timetag.background_rate_hz", "must be >= 0");
    require(!timetag.L0 || *timetag.L0 > 0.0, "timetag.L0_M", "must be > 0");
    if (target_baseline) require(*target_baseline >= 0.0, "estimate.target_baseline", "must be >= 0");
    if (source == TransmissionSource::Stack) {
        require(stack.operating_drop >= 0.0 && stack.operating_drop < 1.0, "stack.operating_drop", "must be in [0, 1)");
        require(stack.delta_n_max >= 0.0, "stack.delta_n_max", "must be >= 0");
        try {
            stack.stack().validate();
            stack.budget.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("stack: ") + e.what());
        }
        require(stack.stack().supports_tir(), "stack.buffer_index", "must be below the prism index");
    }
}

std::vector<std::pair<std::string, std::string>> to_key_values(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields()) {
        if (f.echoed) out.emplace_back(f.key, f.get(config));
    }
    return out;
}

std::string format_config(const RunConfig& config) {
    std::ostringstream out;
    for (const auto& [k, v] : to_key_values(config)) out << k << " = " << v << '\n';
    return out.str();
}

namespace {

struct Entry {
    std::string key, value;
    std::size_t line;
};

RunConfig apply_entries(std::vector<Entry> entries, const std::string& source) {
    std::set<std::string> seen;
    for (const auto& e : entries) {
        const auto at = source + ":" + std::to_string(e.line) + ": ";
        if (!find_field(e.key)) throw ConfigError(at + "unknown key '" + e.key + "'");
        if (!seen.insert(e.key).second) throw ConfigError(at + "duplicate key '" + e.key + "'");
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return apply_order(a.key) < apply_order(b.key); });
    RunConfig config;
    for (const auto& e : entries) find_field(e.key)->set(config, e.value, Where{source, e.line, e.key});
    return config;
}

}  // namespace

RunConfig config_from_key_values(const std::vector<std::pair<std::string, std::string>>& kv, const std::string& source) {
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < kv.size(); ++i) entries.push_back({kv[i].first, kv[i].second, i + 1});
    return apply_entries(std::move(entries), source);
}

RunConfig parse_config(std::string_view text, const std::string& source) {
    std::vector<Entry> entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        const auto hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected `key = value`");
        }
        entries.push_back({trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no});
    }
    return apply_entries(std::move(entries), source);
}

RunConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = csv::read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') return parse_config(text, path);

    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("config") || !doc["config"].is_object()) {
        throw ConfigError(path + ": manifest has no `config` object");
    }
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& [key, value] : doc["config"].items()) {
        if (!value.is_string()) throw ConfigError(path + ": manifest value of '" + key + "' must be a string");
        kv.emplace_back(key, value.get<std::string>());
    }
    return config_from_key_values(kv, path);
}

}  // namespace qplas::runner
