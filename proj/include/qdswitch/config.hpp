#ifndef QDSWITCH_CONFIG_HPP
#define QDSWITCH_CONFIG_HPP

// Flat "key = value" run configuration. Keys carry their unit as a suffix
// (nd_cm3, dx_um, g_GHz, ...); '#' starts a comment. Frequencies in the file
// are ordinary GHz (f = omega/2pi) and are converted to angular GHz here.

#include "qdswitch/cqed.hpp"
#include "qdswitch/csv.hpp"
#include "qdswitch/electrostatics.hpp"
#include "qdswitch/errors.hpp"
#include "qdswitch/fitting.hpp"
#include "qdswitch/switching.hpp"
#include "qdswitch/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qdswitch {

struct SweepRange {
    double start = 0.0;
    double stop = 10.0;
    double step = 0.1;

    std::vector<double> values() const
    {
        if (!(step > 0.0) || !(stop >= start))
            throw domain_error("sweep needs step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = start + static_cast<double>(i) * step;
        return v;
    }
};

struct RunConfig {
    ElectrostaticParams electro;
    StarkCoefficients stark;
    ScreeningFactor screening;
    FieldPolarity polarity = FieldPolarity::toward_electrode;
    OpticalFrame frame;
    CqedParams cavity;                  // angular GHz; kappa from Q unless given
    CouplingTable coupling;
    DriveSpec drive;
    std::optional<double> probe;        // angular GHz
    std::vector<ContrastPoint> contrast_targets;
    EnergyBudget energy;

    SweepRange stark_sweep{0.0, 10.0, 0.1};
    double spectrum_min = -150.0;       // ordinary GHz
    double spectrum_max = 150.0;
    int spectrum_points = 601;
    std::vector<double> spectrum_voltages{0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
    double anticrossing_span = 120.0;   // ordinary GHz, dot detuning +- span
    int anticrossing_points = 121;
    std::vector<double> sweep_frequencies;  // MHz, extra on/off sweep for `switch`
    std::vector<CqedParam> fit_free{CqedParam::cavity_freq, CqedParam::dot_freq, CqedParam::g, CqedParam::kappa,
                                    CqedParam::gamma_perp, CqedParam::amplitude};
    double fit_noise = 0.0;             // relative Gaussian noise for synthetic fits
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "out";

    // Resolved key/value snapshot as read (after preset + overrides).
    std::map<std::string, std::string> entries;

    SwitchModel switch_model() const
    {
        SwitchModel m;
        m.device = {electro, stark, screening, polarity};
        m.cavity = cavity;
        m.coupling = coupling;
        m.probe = probe;
        return m;
    }
};

// Shipped replication preset; presets/paper.cfg holds the same text.
inline constexpr std::string_view paper_preset_text = R"(# Replication preset: InAs dot in a GaAs L3 cavity with a lateral Schottky gate.
# Electrostatics
nd_cm3 = 9e15
phi_V = 0.36
eps_r = 12.9
dx_um = 0.75
# Stark coefficients; fitted up to ~7 V, i.e. |F| <= 4.17 V/um
mu_meV_um_per_V = -0.009
alpha_meV_um2_per_V2 = -0.015
stark_fit_field_max_V_per_um = 4.17
field_polarity = toward_electrode
screening = 1
# Optics and cavity QED (ordinary GHz)
lambda0_nm = 935
q_factor = 4000
cavity_GHz = 0
dot_GHz = 0
g_GHz = 20
gamma_GHz = 0.1
amplitude = 1
background = 0
g_table_V_GHz = 0:20, 7:15
# DC on/off targets used to calibrate gamma_perp and screening
contrast_targets_V_ratio = 10:1.5, 14:2.0
# Drive
v_low_V = 0
v_high_V = 10
drive_MHz = 150
duty = 0.5
rc_cutoff_MHz = 100
cycles = 30
samples_per_cycle = 256
sweep_frequencies_MHz = 10, 50, 80, 100, 150, 200, 300
# Switching-energy estimate
active_volume_um3 = 0.2
energy_field_V_per_um = 5
)";

namespace detail {

struct KeySpec {
    std::string_view key;
    std::string_view field;    // name of the quantity, used in messages
    std::string_view unit;     // suffix; empty if the key has none
    bool required;             // required when no preset supplies a base
};

// stem is key minus "_" + unit.
inline constexpr KeySpec config_keys[] = {
    {"nd_cm3", "donor_density", "cm3", true},
    {"phi_V", "barrier_potential", "V", true},
    {"eps_r", "relative_permittivity", "", true},
    {"dx_um", "electrode_distance", "um", true},
    {"mu_meV_um_per_V", "stark_mu", "meV_um_per_V", true},
    {"alpha_meV_um2_per_V2", "stark_alpha", "meV_um2_per_V2", true},
    {"stark_fit_field_max_V_per_um", "fitted_field_limit", "V_per_um", false},
    {"field_polarity", "field_polarity", "", false},
    {"screening", "screening_factor", "", false},
    {"lambda0_nm", "reference_wavelength", "nm", true},
    {"q_factor", "quality_factor", "", false},
    {"kappa_GHz", "kappa", "GHz", false},
    {"cavity_GHz", "cavity_freq", "GHz", false},
    {"dot_GHz", "dot_freq", "GHz", false},
    {"g_GHz", "coupling_g", "GHz", true},
    {"gamma_GHz", "gamma_perp", "GHz", true},
    {"amplitude", "amplitude", "", false},
    {"background", "background", "", false},
    {"g_table_V_GHz", "coupling_table", "V_GHz", false},
    {"probe_GHz", "probe_frequency", "GHz", false},
    {"contrast_targets_V_ratio", "contrast_targets", "V_ratio", false},
    {"v_low_V", "v_low", "V", false},
    {"v_high_V", "v_high", "V", false},
    {"drive_MHz", "drive_frequency", "MHz", false},
    {"duty", "duty", "", false},
    {"rc_cutoff_MHz", "rc_cutoff", "MHz", false},
    {"cycles", "cycles", "", false},
    {"samples_per_cycle", "samples_per_cycle", "", false},
    {"sweep_frequencies_MHz", "sweep_frequencies", "MHz", false},
    {"active_volume_um3", "active_volume", "um3", false},
    {"energy_field_V_per_um", "energy_field", "V_per_um", false},
    {"stark_v_min_V", "stark_sweep_start", "V", false},
    {"stark_v_max_V", "stark_sweep_stop", "V", false},
    {"stark_v_step_V", "stark_sweep_step", "V", false},
    {"spectrum_min_GHz", "spectrum_min", "GHz", false},
    {"spectrum_max_GHz", "spectrum_max", "GHz", false},
    {"spectrum_points", "spectrum_points", "", false},
    {"spectrum_voltages_V", "spectrum_voltages", "V", false},
    {"anticrossing_span_GHz", "anticrossing_span", "GHz", false},
    {"anticrossing_points", "anticrossing_points", "", false},
    {"fit_free", "fit_free", "", false},
    {"fit_noise_rel", "fit_noise", "rel", false},
    {"seed", "seed", "", false},
    {"out_dir", "out_dir", "", false},
};

inline const KeySpec* find_key(std::string_view key)
{
    for (const auto& k : config_keys)
        if (k.key == key)
            return &k;
    return nullptr;
}

// Same quantity written with a different unit suffix, e.g. dx_nm for dx_um.
inline const KeySpec* find_unit_mismatch(std::string_view key)
{
    const KeySpec* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& k : config_keys) {
        if (k.unit.empty())
            continue;
        const std::string_view stem = k.key.substr(0, k.key.size() - k.unit.size() - 1);
        if (key.size() > stem.size() + 1 && key.substr(0, stem.size()) == stem && key[stem.size()] == '_'
            && stem.size() > best_len) {
            best = &k;
            best_len = stem.size();
        }
    }
    return best;
}

inline std::string describe(const KeySpec& k) { return std::string(k.key) + " (" + std::string(k.field) + ")"; }

inline std::map<std::string, std::string> parse_entries(std::string_view text)
{
    std::map<std::string, std::string> entries;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = csv::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw config_error("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(csv::trim(line.substr(0, eq)));
        const std::string value(csv::trim(line.substr(eq + 1)));
        if (key.empty())
            throw config_error("", "line " + std::to_string(line_no) + ": empty key");
        if (!find_key(key)) {
            if (const KeySpec* k = find_unit_mismatch(key))
                throw config_error(key, "unit mismatch, expected " + describe(*k));
            throw config_error(key, "unknown key");
        }
        if (value.empty())
            throw config_error(key, "empty value");
        entries[key] = value;
    }
    return entries;
}

class EntryReader {
public:
    explicit EntryReader(const std::map<std::string, std::string>& e) : e_(e) {}

    bool has(std::string_view key) const { return e_.count(std::string(key)) != 0; }

    const std::string& raw(std::string_view key) const { return e_.at(std::string(key)); }

    std::optional<double> number(std::string_view key) const
    {
        if (!has(key))
            return std::nullopt;
        double v = 0.0;
        if (!csv::parse_double(raw(key), v))
            throw config_error(std::string(key), "not a number: '" + raw(key) + "'");
        return v;
    }

    std::optional<int> integer(std::string_view key) const
    {
        auto v = number(key);
        if (!v)
            return std::nullopt;
        if (std::floor(*v) != *v || std::abs(*v) > 1e9)
            throw config_error(std::string(key), "expected an integer");
        return static_cast<int>(*v);
    }

    std::optional<std::vector<double>> list(std::string_view key) const
    {
        if (!has(key))
            return std::nullopt;
        std::vector<double> out;
        for (auto cell : csv::split(raw(key))) {
            double v = 0.0;
            if (!csv::parse_double(cell, v))
                throw config_error(std::string(key), "bad list element '" + std::string(cell) + "'");
            out.push_back(v);
        }
        return out;
    }

    std::optional<std::vector<std::pair<double, double>>> pairs(std::string_view key) const
    {
        if (!has(key))
            return std::nullopt;
        std::vector<std::pair<double, double>> out;
        for (auto cell : csv::split(raw(key))) {
            const auto colon = cell.find(':');
            double a = 0.0, b = 0.0;
            if (colon == std::string_view::npos || !csv::parse_double(cell.substr(0, colon), a)
                || !csv::parse_double(cell.substr(colon + 1), b))
                throw config_error(std::string(key), "expected 'x:y' pairs, got '" + std::string(cell) + "'");
            out.emplace_back(a, b);
        }
        return out;
    }

private:
    const std::map<std::string, std::string>& e_;
};

// Run `check`; rethrow domain errors as config errors naming the key and field.
template <class F>
void validated(std::string_view key, F&& check)
{
    try {
        check();
    } catch (const domain_error& e) {
        const KeySpec* k = find_key(key);
        throw config_error(k ? describe(*k) : std::string(key), e.what());
    }
}

} // namespace detail

// Build a config from key/value entries. Keys absent from `entries` keep
// their defaults; without a preset base the required keys must be present.
inline RunConfig config_from_entries(const std::map<std::string, std::string>& entries, bool require_all)
{
    using detail::validated;
    if (require_all) {
        for (const auto& k : detail::config_keys)
            if (k.required && !entries.count(std::string(k.key)))
                throw config_error(detail::describe(k), "missing required key");
        if (!entries.count("q_factor") && !entries.count("kappa_GHz"))
            throw config_error("q_factor", "missing: one of q_factor or kappa_GHz is required");
    }

    const detail::EntryReader r(entries);
    RunConfig c;
    c.entries = entries;

    auto set = [&](std::string_view key, double& target) {
        if (auto v = r.number(key))
            target = *v;
    };
    auto set_ghz = [&](std::string_view key, double& target) {
        if (auto v = r.number(key))
            target = units::ghz_to_angular(*v);
    };

    set("nd_cm3", c.electro.donor_density);
    validated("nd_cm3", [&] {
        if (!(c.electro.donor_density > 0.0))
            throw domain_error("donor_density must be > 0");
    });
    set("phi_V", c.electro.barrier_potential);
    set("eps_r", c.electro.relative_permittivity);
    set("dx_um", c.electro.electrode_distance);
    validated("phi_V", [&] {
        if (!(c.electro.barrier_potential > 0.0))
            throw domain_error("barrier_potential must be > 0");
    });
    validated("eps_r", [&] {
        if (!(c.electro.relative_permittivity >= 1.0))
            throw domain_error("relative_permittivity must be >= 1");
    });
    validated("dx_um", [&] { c.electro.validate(); });

    set("mu_meV_um_per_V", c.stark.mu);
    set("alpha_meV_um2_per_V2", c.stark.alpha);
    set("stark_fit_field_max_V_per_um", c.stark.fitted_field_limit);
    validated("stark_fit_field_max_V_per_um", [&] { c.stark.validate(); });
    if (r.has("field_polarity")) {
        const auto& v = r.raw("field_polarity");
        if (v == "toward_electrode")
            c.polarity = FieldPolarity::toward_electrode;
        else if (v == "away_from_electrode")
            c.polarity = FieldPolarity::away_from_electrode;
        else
            throw config_error("field_polarity", "expected toward_electrode or away_from_electrode");
    }
    set("screening", c.screening.value);
    validated("screening", [&] { c.screening.validate(); });

    set("lambda0_nm", c.frame.reference_wavelength);
    if (auto q = r.number("q_factor"))
        c.frame.quality_factor = *q;
    validated("q_factor", [&] { c.frame.validate(); });

    set_ghz("cavity_GHz", c.cavity.cavity_freq);
    set_ghz("dot_GHz", c.cavity.dot_freq);
    set_ghz("g_GHz", c.cavity.g);
    set_ghz("gamma_GHz", c.cavity.gamma_perp);
    set("amplitude", c.cavity.amplitude);
    set("background", c.cavity.background);
    if (auto k = r.number("kappa_GHz"))
        c.cavity.kappa = units::ghz_to_angular(*k);
    else if (c.frame.quality_factor)
        c.cavity.kappa = kappa_from_q(c.frame);
    validated("g_GHz", [&] { c.cavity.validate(); });

    if (auto anchors = r.pairs("g_table_V_GHz")) {
        for (auto& a : *anchors)
            a.second = units::ghz_to_angular(a.second);
        validated("g_table_V_GHz", [&] { c.coupling = CouplingTable(*anchors); });
    }
    if (auto p = r.number("probe_GHz"))
        c.probe = units::ghz_to_angular(*p);
    if (auto targets = r.pairs("contrast_targets_V_ratio"))
        for (const auto& [v, ratio] : *targets) {
            if (!(v >= 0.0) || !(ratio >= 1.0))
                throw config_error("contrast_targets_V_ratio (contrast_targets)", "need V >= 0 and ratio >= 1");
            c.contrast_targets.push_back({v, ratio});
        }

    set("v_low_V", c.drive.v_low);
    set("v_high_V", c.drive.v_high);
    set("drive_MHz", c.drive.frequency);
    set("duty", c.drive.duty);
    set("rc_cutoff_MHz", c.drive.rc_cutoff);
    if (auto n = r.integer("cycles"))
        c.drive.cycles = *n;
    if (auto n = r.integer("samples_per_cycle"))
        c.drive.samples_per_cycle = *n;
    validated("drive_MHz", [&] { c.drive.validate(); });
    if (auto f = r.list("sweep_frequencies_MHz")) {
        for (double v : *f)
            if (!(v > 0.0))
                throw config_error("sweep_frequencies_MHz (sweep_frequencies)", "frequencies must be > 0");
        c.sweep_frequencies = *f;
    }

    set("active_volume_um3", c.energy.active_volume);
    set("energy_field_V_per_um", c.energy.field);
    c.energy.relative_permittivity = c.electro.relative_permittivity;
    validated("active_volume_um3", [&] { c.energy.validate(); });

    set("stark_v_min_V", c.stark_sweep.start);
    set("stark_v_max_V", c.stark_sweep.stop);
    set("stark_v_step_V", c.stark_sweep.step);
    validated("stark_v_step_V", [&] {
        (void)c.stark_sweep.values();
        if (c.stark_sweep.start < 0.0)
            throw domain_error("sweep must start at >= 0 V");
    });

    set("spectrum_min_GHz", c.spectrum_min);
    set("spectrum_max_GHz", c.spectrum_max);
    if (auto n = r.integer("spectrum_points"))
        c.spectrum_points = *n;
    if (!(c.spectrum_max > c.spectrum_min) || c.spectrum_points < 2)
        throw config_error("spectrum_points", "need spectrum_max > spectrum_min and at least 2 points");
    if (auto v = r.list("spectrum_voltages_V")) {
        for (double x : *v)
            if (!(x >= 0.0))
                throw config_error("spectrum_voltages_V (spectrum_voltages)", "voltages must be >= 0");
        c.spectrum_voltages = *v;
    }
    set("anticrossing_span_GHz", c.anticrossing_span);
    if (auto n = r.integer("anticrossing_points"))
        c.anticrossing_points = *n;
    if (!(c.anticrossing_span > 0.0) || c.anticrossing_points < 2)
        throw config_error("anticrossing_points", "need a positive span and at least 2 points");

    if (r.has("fit_free")) {
        c.fit_free.clear();
        for (auto name : csv::split(r.raw("fit_free"))) {
            auto which = cqed_param_from_name(name);
            if (!which)
                throw config_error("fit_free", "unknown parameter '" + std::string(name) + "'");
            c.fit_free.push_back(*which);
        }
    }
    set("fit_noise_rel", c.fit_noise);
    if (!(c.fit_noise >= 0.0))
        throw config_error("fit_noise_rel", "must be >= 0");
    if (auto s = r.integer("seed")) {
        if (*s < 0)
            throw config_error("seed", "must be >= 0");
        c.seed = static_cast<std::uint64_t>(*s);
    }
    if (r.has("out_dir"))
        c.out_dir = r.raw("out_dir");
    return c;
}

// Parse config text. With a preset, the preset supplies every key and the
// text overrides it.
inline RunConfig parse_config_text(std::string_view text, std::optional<std::string_view> preset = std::nullopt)
{
    std::map<std::string, std::string> entries;
    if (preset)
        entries = detail::parse_entries(*preset);
    for (auto& [k, v] : detail::parse_entries(text))
        entries[k] = v;
    return config_from_entries(entries, !preset.has_value());
}

inline RunConfig parse_config(const std::filesystem::path& path, std::optional<std::string_view> preset = std::nullopt)
{
    std::string text;
    try {
        text = csv::read_file(path);
    } catch (const io_error& e) {
        throw config_error("", e.what());
    }
    return parse_config_text(text, preset);
}

inline RunConfig paper_preset() { return parse_config_text("", paper_preset_text); }

} // namespace qdswitch

#endif
