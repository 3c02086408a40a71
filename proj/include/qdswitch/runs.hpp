#ifndef QDSWITCH_RUNS_HPP
#define QDSWITCH_RUNS_HPP

// Subcommand drivers behind the CLI. Each run writes deterministic CSV
// files plus a manifest.txt into the output directory.

#include "qdswitch/config.hpp"
#include "qdswitch/cqed.hpp"
#include "qdswitch/csv.hpp"
#include "qdswitch/electrostatics.hpp"
#include "qdswitch/fitting.hpp"
#include "qdswitch/manifest.hpp"
#include "qdswitch/switching.hpp"
#include "qdswitch/units.hpp"

#include <algorithm>
#include <array>
#include <exception>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace qdswitch {

struct RunRequest {
    RunConfig config;
    std::string config_source = "preset:paper"; // path or preset label
    std::string config_text;                    // bytes the digest is taken over
    std::filesystem::path out_dir = "out";
    std::optional<std::filesystem::path> spectrum_input; // fit: measured spectrum
    std::optional<std::filesystem::path> shifts_input;   // fit: shift-vs-voltage data
    bool contrast = false;                               // fit: calibrate from contrast targets
};

struct RunOutcome {
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;

    std::string get(std::string_view key) const
    {
        for (const auto& [k, v] : summary)
            if (k == key)
                return v;
        return {};
    }
};

namespace detail {

// Evaluate fn(i) for i in [0, n) on a few threads; results land in slots
// owned by each index so output order never depends on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& fn)
{
    const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += workers)
                        fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

inline std::string fmt(double v) { return csv::format_number(v); }

class RunWriter {
public:
    RunWriter(const RunRequest& req, std::string subcommand) : req_(req)
    {
        manifest_.subcommand = std::move(subcommand);
        manifest_.started_utc = utc_timestamp();
        manifest_.config_source = req.config_source;
        manifest_.config_digest = content_digest(req.config_text);
        manifest_.seed = req.config.seed;
        manifest_.config = req.config.entries;
        std::error_code ec;
        std::filesystem::create_directories(req.out_dir, ec);
        if (ec)
            throw io_error("cannot create output directory " + req.out_dir.string() + ": " + ec.message());
    }

    void input(const std::filesystem::path& p, const std::string& bytes)
    {
        manifest_.inputs.emplace_back(p.string(), content_digest(bytes));
    }

    void write(const std::string& name, const std::string& contents)
    {
        const auto path = req_.out_dir / name;
        csv::write_file(path, contents);
        manifest_.outputs.emplace_back(name, content_digest(contents));
        outcome_.files.push_back(path);
    }

    void summary(std::string key, std::string value) { outcome_.summary.emplace_back(std::move(key), std::move(value)); }
    void warn(std::string w) { outcome_.warnings.push_back(std::move(w)); }

    RunOutcome finish()
    {
        manifest_.finished_utc = utc_timestamp();
        manifest_.summary = outcome_.summary;
        manifest_.warnings = outcome_.warnings;
        const auto path = req_.out_dir / "manifest.txt";
        csv::write_file(path, manifest_.str());
        outcome_.files.push_back(path);
        return outcome_;
    }

private:
    const RunRequest& req_;
    RunManifest manifest_;
    RunOutcome outcome_;
};

} // namespace detail

// Switch model with (gamma_perp, screening) calibrated against the
// configured DC contrast targets; the plain config model if there are none.
inline SwitchModel calibrated_switch_model(const RunConfig& c, FitResult* fit = nullptr)
{
    SwitchModel m = c.switch_model();
    if (c.contrast_targets.empty())
        return m;
    ContrastFitOptions opt;
    opt.reference_voltage = c.drive.v_low;
    const FitResult r = fit_contrast(c.contrast_targets, m, opt);
    if (fit)
        *fit = r;
    return apply_contrast_fit(m, r);
}

inline RunOutcome run_stark(const RunRequest& req)
{
    const RunConfig& c = req.config;
    detail::RunWriter out(req, "stark");
    const StarkDevice device{c.electro, c.stark, c.screening, c.polarity};
    const auto volts = c.stark_sweep.values();

    std::vector<std::array<double, 3>> rows(volts.size());
    detail::parallel_for(volts.size(), [&](std::size_t i) {
        rows[i] = {depletion_width(c.electro, volts[i]), field_at_cavity(c.electro, volts[i]), device.shift(volts[i])};
    });

    csv::Table t({"voltage_V", "x_d_um", "field_V_per_um", "shift_meV"});
    std::optional<double> first_extrapolated;
    for (std::size_t i = 0; i < volts.size(); ++i) {
        t.add_row({volts[i], rows[i][0], rows[i][1], rows[i][2]});
        if (!first_extrapolated && device.extrapolated(volts[i]))
            first_extrapolated = volts[i];
    }
    out.write("stark.csv", t.str());
    out.summary("onset_voltage_V", detail::fmt(onset_voltage(c.electro)));
    out.summary("points", std::to_string(volts.size()));
    if (first_extrapolated) {
        out.summary("extrapolated_from_V", detail::fmt(*first_extrapolated));
        out.warn("Stark shift extrapolated beyond the fitted field range for V >= " + detail::fmt(*first_extrapolated));
    }
    return out.finish();
}

inline RunOutcome run_spectrum(const RunRequest& req)
{
    const RunConfig& c = req.config;
    detail::RunWriter out(req, "spectrum");
    const SwitchModel model = c.switch_model();
    const auto grid = linear_grid(units::ghz_to_angular(c.spectrum_min), units::ghz_to_angular(c.spectrum_max),
                                  static_cast<std::size_t>(c.spectrum_points));

    std::vector<std::pair<Spectrum, Spectrum>> spectra(c.spectrum_voltages.size());
    detail::parallel_for(spectra.size(), [&](std::size_t i) {
        const CqedParams p = model.params_at(c.spectrum_voltages[i]);
        spectra[i] = {reflectivity_spectrum(p, grid), pl_spectrum(p, grid)};
    });
    csv::Table t({"voltage_V", "detuning_GHz", "reflectivity", "pl"});
    for (std::size_t i = 0; i < spectra.size(); ++i)
        for (std::size_t k = 0; k < grid.size(); ++k)
            t.add_row({c.spectrum_voltages[i], units::angular_to_ghz(grid[k]), spectra[i].first.intensities[k],
                       spectra[i].second.intensities[k]});
    out.write("spectrum.csv", t.str());

    // Polariton branches as the dot is swept through the cavity.
    const auto dots = linear_grid(c.cavity.cavity_freq - units::ghz_to_angular(c.anticrossing_span),
                                  c.cavity.cavity_freq + units::ghz_to_angular(c.anticrossing_span),
                                  static_cast<std::size_t>(c.anticrossing_points));
    csv::Table pol({"dot_detuning_GHz", "lower_GHz", "upper_GHz", "lower_hwhm_GHz", "upper_hwhm_GHz"});
    double min_gap = std::numeric_limits<double>::infinity();
    double min_gap_at = 0.0;
    for (double wd : dots) {
        CqedParams p = c.cavity;
        p.dot_freq = wd;
        const auto m = polariton_modes(p);
        pol.add_row({units::angular_to_ghz(wd - c.cavity.cavity_freq), units::angular_to_ghz(m.lower.real()),
                     units::angular_to_ghz(m.upper.real()), units::angular_to_ghz(-m.lower.imag()),
                     units::angular_to_ghz(-m.upper.imag())});
        if (m.splitting() < min_gap) {
            min_gap = m.splitting();
            min_gap_at = wd - c.cavity.cavity_freq;
        }
    }
    out.write("polaritons.csv", pol.str());
    out.summary("vacuum_rabi_splitting_GHz", detail::fmt(units::angular_to_ghz(polariton_modes(c.cavity).splitting())));
    out.summary("min_gap_GHz", detail::fmt(units::angular_to_ghz(min_gap)));
    out.summary("min_gap_dot_detuning_GHz", detail::fmt(units::angular_to_ghz(min_gap_at)));
    return out.finish();
}

inline RunOutcome run_switch(const RunRequest& req)
{
    const RunConfig& c = req.config;
    detail::RunWriter out(req, "switch");
    FitResult cal;
    const SwitchModel model = calibrated_switch_model(c, &cal);
    if (!c.contrast_targets.empty()) {
        out.summary("calibrated_gamma_GHz", detail::fmt(units::angular_to_ghz(model.cavity.gamma_perp)));
        out.summary("calibrated_screening", detail::fmt(model.device.screening.value));
        out.summary("calibration_residual", detail::fmt(cal.residual_norm));
        out.summary("calibration_converged", cal.converged ? "true" : "false");
    }

    const SwitchingRun run = simulate_switching(c.drive, model);
    for (const auto& w : run.warnings)
        out.warn(w);
    csv::Table trace({"time_ns", "voltage_V", "intensity"});
    for (std::size_t i = 0; i < run.intensity.size(); ++i)
        trace.add_row({run.intensity.times[i], run.voltage.values[i], run.intensity.values[i]});
    out.write("switch_trace.csv", trace.str());

    const double dc = model.dc_on_off(c.drive.v_low, c.drive.v_high);
    out.summary("drive_MHz", detail::fmt(c.drive.frequency));
    out.summary("on_off_ratio", detail::fmt(run.on_off()));
    out.summary("dc_on_off_ratio", detail::fmt(dc));

    std::vector<double> freqs = c.sweep_frequencies;
    if (freqs.empty())
        freqs.push_back(c.drive.frequency);
    std::vector<double> ratios(freqs.size());
    detail::parallel_for(freqs.size(), [&](std::size_t i) {
        DriveSpec d = c.drive;
        d.frequency = freqs[i];
        ratios[i] = simulate_switching(d, model).on_off();
    });
    csv::Table sweep({"frequency_MHz", "rc_attenuation", "on_off_ratio"});
    for (std::size_t i = 0; i < freqs.size(); ++i)
        sweep.add_row({freqs[i], rc_attenuation(freqs[i], c.drive.rc_cutoff), ratios[i]});
    out.write("switch_sweep.csv", sweep.str());
    return out.finish();
}

namespace detail {

inline csv::Table fit_table(const FitResult& r)
{
    csv::Table t({"parameter", "value", "unit", "std_error"});
    for (const auto& p : r.parameters) {
        const bool angular = p.unit == "rad/ns";
        const double scale = angular ? 1.0 / units::two_pi : 1.0;
        const double err = p.variance ? std::sqrt(std::max(0.0, *p.variance)) * scale : 0.0;
        t.add_row({p.name, p.value * scale, angular ? std::string("GHz") : p.unit, err});
    }
    return t;
}

inline void fit_summary(RunWriter& out, const FitResult& r)
{
    out.summary("converged", r.converged ? "true" : "false");
    out.summary("iterations", std::to_string(r.iterations));
    out.summary("residual_norm", fmt(r.residual_norm));
    if (!r.converged)
        out.warn("fit did not converge");
}

} // namespace detail

inline RunOutcome run_fit(const RunRequest& req)
{
    const RunConfig& c = req.config;
    detail::RunWriter out(req, "fit");

    if (req.shifts_input) {
        const std::string bytes = csv::read_file(*req.shifts_input);
        out.input(*req.shifts_input, bytes);
        const FitResult r = fit_stark_curve(csv::parse_shifts(bytes), c.electro, c.polarity);
        out.write("fit_report.csv", detail::fit_table(r).str());
        detail::fit_summary(out, r);
        out.summary("mode", "stark");
        return out.finish();
    }

    if (req.contrast) {
        if (c.contrast_targets.empty())
            throw config_error("contrast_targets_V_ratio", "contrast fit needs targets");
        ContrastFitOptions opt;
        opt.reference_voltage = c.drive.v_low;
        const FitResult r = fit_contrast(c.contrast_targets, c.switch_model(), opt);
        const SwitchModel m = apply_contrast_fit(c.switch_model(), r);
        out.write("fit_report.csv", detail::fit_table(r).str());
        csv::Table check({"voltage_V", "target_ratio", "model_ratio"});
        for (const auto& p : c.contrast_targets)
            check.add_row({p.voltage, p.ratio, m.dc_on_off(opt.reference_voltage, p.voltage)});
        out.write("contrast_check.csv", check.str());
        detail::fit_summary(out, r);
        out.summary("mode", "contrast");
        return out.finish();
    }

    Spectrum data;
    CqedParams start = c.cavity;
    if (req.spectrum_input) {
        const std::string bytes = csv::read_file(*req.spectrum_input);
        out.input(*req.spectrum_input, bytes);
        data = csv::parse_spectrum(bytes, c.frame.reference_wavelength);
        out.summary("mode", "spectrum");
    } else {
        // Synthetic round trip around the (calibrated) zero-bias parameters.
        const CqedParams truth = calibrated_switch_model(c).cavity;
        const auto grid = linear_grid(units::ghz_to_angular(c.spectrum_min), units::ghz_to_angular(c.spectrum_max),
                                      static_cast<std::size_t>(c.spectrum_points));
        data = reflectivity_spectrum(truth, grid);
        if (c.fit_noise > 0.0)
            data.intensities = add_relative_noise(data.intensities, c.fit_noise, c.seed);
        start = truth;
        for (CqedParam p : c.fit_free) {
            if (detail::log_scaled(p))
                field_of(start, p) *= 1.1;
            else if (p != CqedParam::background)
                field_of(start, p) += 0.05 * truth.kappa;
        }
        out.summary("mode", "synthetic");
        for (CqedParam p : c.fit_free)
            out.summary("truth_" + std::string(name_of(p)),
                        detail::fmt(p == CqedParam::amplitude || p == CqedParam::background
                                        ? field_of(truth, p)
                                        : units::angular_to_ghz(field_of(truth, p))));
    }

    const FitResult r = fit_spectrum(data, start, c.fit_free);
    const CqedParams fitted = apply_fit(start, r);
    out.write("fit_report.csv", detail::fit_table(r).str());
    csv::Table model({"detuning_GHz", "data", "model"});
    for (std::size_t i = 0; i < data.size(); ++i)
        model.add_row({units::angular_to_ghz(data.detunings[i]), data.intensities[i],
                       reflectivity(fitted, data.detunings[i])});
    out.write("fit_spectrum.csv", model.str());
    detail::fit_summary(out, r);
    return out.finish();
}

inline RunOutcome run_metrics(const RunRequest& req)
{
    const RunConfig& c = req.config;
    detail::RunWriter out(req, "metrics");
    csv::Table t({"metric", "value", "unit"});
    auto num = [&](std::string name, double v, std::string unit) {
        t.add_row({name, v, unit});
        out.summary(std::move(name), detail::fmt(v));
    };

    const CqedParams& p = c.cavity;
    num("kappa", units::angular_to_ghz(p.kappa), "GHz");
    num("g", units::angular_to_ghz(p.g), "GHz");
    num("gamma_perp", units::angular_to_ghz(p.gamma_perp), "GHz");
    const auto regime = std::string(to_string(coupling_regime(p)));
    t.add_row({std::string("coupling_regime"), regime, std::string("")});
    out.summary("coupling_regime", regime);
    num("vacuum_rabi_splitting", units::angular_to_ghz(polariton_modes(p).splitting()), "GHz");
    num("cooperativity", cooperativity(p), "");
    num("bandwidth", max_bandwidth(p), "GHz");
    num("bandwidth_strong_formula", strong_coupling_bandwidth(p.g, p.kappa), "GHz");
    num("bandwidth_weak_formula", weak_coupling_bandwidth(p.g, p.kappa), "GHz");
    num("switching_energy", switching_energy(c.energy), "fJ");
    num("onset_voltage", onset_voltage(c.electro), "V");
    num("depletion_width_at_v_high", depletion_width(c.electro, c.drive.v_high), "um");
    num("field_at_v_high", field_at_cavity(c.electro, c.drive.v_high), "V/um");
    const StarkDevice dev{c.electro, c.stark, c.screening, c.polarity};
    num("stark_shift_at_v_high", dev.shift(c.drive.v_high), "meV");
    if (dev.extrapolated(c.drive.v_high))
        out.warn("Stark shift at v_high is extrapolated beyond the fitted field range");
    if (!c.contrast_targets.empty()) {
        const SwitchModel m = calibrated_switch_model(c);
        num("calibrated_gamma_perp", units::angular_to_ghz(m.cavity.gamma_perp), "GHz");
        num("calibrated_screening", m.device.screening.value, "");
        num("dc_on_off_at_v_high", m.dc_on_off(c.drive.v_low, c.drive.v_high), "");
    }
    out.write("metrics.csv", t.str());
    return out.finish();
}

} // namespace qdswitch

#endif
