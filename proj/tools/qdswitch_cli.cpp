// qdswitch command-line front end: spectrum | stark | switch | fit | metrics.
//
// Exit codes: 0 ok, 1 configuration, 2 numerical, 3 I/O. Failures also
// print one JSON error record to stderr.

#include "qdswitch/qdswitch.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { ok = 0, config_failure = 1, numeric_failure = 2, io_failure = 3 };

int report(ExitCode code, std::string_view category, const std::string& message)
{
    nlohmann::json rec{{"status", "error"}, {"category", category}, {"exit_code", static_cast<int>(code)},
                       {"message", message}};
    std::cerr << rec.dump() << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Electrically controlled quantum-dot / cavity switch: simulation and fitting"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "flat key = value run configuration");
    app.add_option("--preset", preset, "built-in parameter preset")->check(CLI::IsMember({"paper"}));
    app.add_option("--out", out_dir, "output directory (default: out_dir key or ./out)");
    app.add_option("--seed", seed, "seed for synthetic noise");

    auto* spectrum = app.add_subcommand("spectrum", "voltage-dependent reflectivity/PL spectra and polariton branches");
    auto* stark = app.add_subcommand("stark", "depletion width, field and Stark shift versus bias");
    auto* sw = app.add_subcommand("switch", "time-domain switching through the RC line");
    auto* fit = app.add_subcommand("fit", "fit spectra, Stark curves or DC contrast");
    auto* metrics = app.add_subcommand("metrics", "coupling regime, bandwidth and switching energy");

    std::string spectrum_input, shifts_input, free_list;
    bool contrast = false;
    fit->add_option("--spectrum", spectrum_input, "measured spectrum CSV (detuning_GHz or wavelength_nm)");
    fit->add_option("--shifts", shifts_input, "Stark data CSV (voltage_V,shift_meV)");
    fit->add_flag("--contrast", contrast, "calibrate gamma_perp and screening from contrast targets");
    fit->add_option("--free", free_list, "comma-separated free parameters for spectrum fits");

    CLI11_PARSE(app, argc, argv);

    if (config_path.empty() && preset.empty())
        return report(config_failure, "config", "one of --config or --preset is required");

    qdswitch::RunRequest req;
    try {
        std::optional<std::string_view> base;
        if (preset == "paper")
            base = qdswitch::paper_preset_text;
        if (!config_path.empty()) {
            try {
                req.config_text = qdswitch::csv::read_file(config_path);
            } catch (const qdswitch::io_error& e) {
                return report(io_failure, "io", e.what());
            }
            req.config = qdswitch::parse_config_text(req.config_text, base);
            req.config_source = config_path;
        } else {
            req.config_text = std::string(qdswitch::paper_preset_text);
            req.config = qdswitch::paper_preset();
            req.config_source = "preset:paper";
        }
        if (seed) {
            req.config.seed = *seed;
            req.config.entries["seed"] = std::to_string(*seed);
        }
        if (!free_list.empty()) {
            std::map<std::string, std::string> e = req.config.entries;
            e["fit_free"] = free_list;
            req.config.fit_free = qdswitch::config_from_entries(e, false).fit_free;
            req.config.entries = e;
        }
    } catch (const qdswitch::config_error& e) {
        return report(config_failure, "config", e.what());
    }
    req.out_dir = out_dir.empty() ? req.config.out_dir : std::filesystem::path(out_dir);
    if (!spectrum_input.empty())
        req.spectrum_input = spectrum_input;
    if (!shifts_input.empty())
        req.shifts_input = shifts_input;
    req.contrast = contrast;

    try {
        qdswitch::RunOutcome outcome;
        if (*spectrum)
            outcome = qdswitch::run_spectrum(req);
        else if (*stark)
            outcome = qdswitch::run_stark(req);
        else if (*sw)
            outcome = qdswitch::run_switch(req);
        else if (*fit)
            outcome = qdswitch::run_fit(req);
        else if (*metrics)
            outcome = qdswitch::run_metrics(req);

        for (const auto& w : outcome.warnings)
            std::cerr << "warning: " << w << '\n';
        for (const auto& [k, v] : outcome.summary)
            std::cout << k << " = " << v << '\n';
        return ok;
    } catch (const qdswitch::config_error& e) {
        return report(config_failure, "config", e.what());
    } catch (const qdswitch::ingest_error& e) {
        return report(io_failure, "io", e.what());
    } catch (const qdswitch::io_error& e) {
        return report(io_failure, "io", e.what());
    } catch (const std::exception& e) {
        return report(numeric_failure, "numeric", e.what());
    }
}
