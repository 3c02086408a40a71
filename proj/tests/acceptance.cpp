#include "oracles.hpp"
#include "qdswitch/qdswitch.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

using namespace qdswitch;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail)
{
    std::printf("%s  criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    if (!ok)
        ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

CqedParams ghz_params(double wc, double wd, double g, double kappa, double gamma)
{
    CqedParams p;
    p.cavity_freq = units::ghz_to_angular(wc);
    p.dot_freq = units::ghz_to_angular(wd);
    p.g = units::ghz_to_angular(g);
    p.kappa = units::ghz_to_angular(kappa);
    p.gamma_perp = units::ghz_to_angular(gamma);
    return p;
}

SwitchModel calibrated_preset(double& residual, bool& converged)
{
    const RunConfig c = paper_preset();
    const SwitchModel base = c.switch_model();
    ContrastFitOptions opt;
    opt.reference_voltage = 0.0;
    const FitResult r = fit_contrast({{10.0, 1.5}, {14.0, 2.0}}, base, opt);
    residual = r.residual_norm;
    converged = r.converged;
    return apply_contrast_fit(base, r);
}

void criterion_1()
{
    const auto t0 = clock_type::now();
    const RunConfig c = paper_preset();
    const StarkDevice dev{c.electro, c.stark, ScreeningFactor{}, c.polarity};
    const double shift = std::abs(dev.bare_shift(7.0));
    const double dt = seconds_since(t0);
    report(1, "Stark magnitude at 7 V", shift >= 0.25 && shift <= 0.35 && dt < 1.0,
           fmt("|dE| = %.4f meV, runtime %.3f s", shift, dt));
}

void criterion_2()
{
    const double v = onset_voltage(paper_preset().electro);
    report(2, "onset voltage", v >= 3.0 && v <= 4.5, fmt("V_onset = %.4f V", v));
}

void criterion_3()
{
    OpticalFrame frame;
    frame.reference_wavelength = 935.0;
    frame.quality_factor = 4000.0;
    const double k = units::angular_to_ghz(kappa_from_q(frame));
    report(3, "cavity decay rate from Q", k >= 39.0 && k <= 41.0, fmt("kappa/2pi = %.4f GHz", k));
}

void criterion_4()
{
    const CqedParams p = ghz_params(0.0, 0.0, 20.0, 40.0, 0.1);
    const CouplingRegime regime = coupling_regime(p);
    const double split = units::angular_to_ghz(polariton_modes(p).splitting());
    const bool ok = regime == CouplingRegime::onset && split >= 2.0 && split <= 4.0;
    report(4, "coupling regime and polariton splitting", ok,
           "regime = " + std::string(to_string(regime)) + fmt(", splitting = %.4f GHz", split));
}

void criterion_5()
{
    double residual = 0.0;
    bool converged = false;
    const SwitchModel m = calibrated_preset(residual, converged);
    const double dc = m.dc_on_off(0.0, 10.0);
    const bool ok = converged && residual < 0.05 && dc >= 1.4 && dc <= 1.6;
    report(5, "contrast calibration", ok,
           fmt("residual = %.3g, DC on/off at 10 V = %.4f", residual, dc) + (converged ? "" : ", not converged"));
}

void criterion_6()
{
    const auto t0 = clock_type::now();
    double residual = 0.0;
    bool converged = false;
    const SwitchModel m = calibrated_preset(residual, converged);
    DriveSpec d = paper_preset().drive;
    d.frequency = 80.0;
    const double r80 = simulate_switching(d, m).on_off();
    d.frequency = 150.0;
    const double r150 = simulate_switching(d, m).on_off();
    const double dt = seconds_since(t0);
    const bool ok = r80 >= 1.35 && r80 <= 1.5 && r150 >= 1.2 && r150 <= 1.4 && r150 < r80 && dt < 10.0;
    report(6, "modulated switching", ok, fmt("80 MHz: %.4f, 150 MHz: %.4f, runtime %.3f s", r80, r150, dt));
}

void criterion_7()
{
    const RunConfig c = paper_preset();
    const double bw = max_bandwidth(c.cavity);
    const double weak = weak_coupling_bandwidth(units::ghz_to_angular(20.0), units::ghz_to_angular(40.0));
    EnergyBudget b;
    b.field = 5.0;
    b.active_volume = 0.2;
    const double e = switching_energy(b);
    const bool ok = std::abs(bw - 40.0) < 1e-9 && std::abs(weak - 20.0) < 1e-9 && e >= 0.1 && e <= 10.0;
    report(7, "figures of merit", ok, fmt("bandwidth = %.4f GHz, weak formula = %.4f GHz, energy = %.4f fJ", bw, weak, e));
}

// ---------------------------------------------------------------------------
// Property suites

double poisson_check()
{
    const ElectrostaticParams p;
    double worst = 0.0;
    for (double v = 0.0; v <= 20.0; v += 0.5) {
        const double oracle_um = 1e6 * oracle::poisson_depletion_width(p.donor_density * 1e6, p.relative_permittivity,
                                                                      p.barrier_potential + v);
        worst = std::max(worst, rel(depletion_width(p, v), oracle_um));
    }
    return worst;
}

double eigen_check(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> det(-200.0, 200.0), rate(0.01, 200.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const CqedParams p = ghz_params(det(rng), det(rng), rate(rng), rate(rng), rate(rng));
        const PolaritonModes m = polariton_modes(p);
        const auto [lo, hi] = oracle::eigen_polaritons(p.cavity_freq, p.dot_freq, p.g, p.kappa, p.gamma_perp);
        const double scale = std::abs(lo) + std::abs(hi);
        worst = std::max({worst, std::abs(m.lower - lo) / scale, std::abs(m.upper - hi) / scale});
    }
    return worst;
}

double dip_check(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> w(-100.0, 100.0), rate(0.05, 100.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double w0 = w(rng);
        const CqedParams p = ghz_params(w0, w0, rate(rng), rate(rng), rate(rng));
        CqedParams bare = p;
        bare.g = 0.0;
        const double ratio = reflectivity(p, p.cavity_freq) / reflectivity(bare, p.cavity_freq);
        worst = std::max(worst, std::abs(ratio - 1.0 / std::pow(1.0 + cooperativity(p), 2)));
    }
    return worst;
}

double fit_roundtrip_check()
{
    double worst = 0.0;

    const ElectrostaticParams e;
    const StarkDevice dev{e, {-0.009, -0.015}, ScreeningFactor{}, FieldPolarity::toward_electrode};
    ShiftDataset shifts;
    for (double v = 0.0; v <= 12.0; v += 0.5)
        shifts.points.push_back({v, dev.bare_shift(v)});
    const StarkCoefficients sc = stark_coefficients(fit_stark_curve(shifts, e));
    worst = std::max({worst, rel(sc.mu, -0.009), rel(sc.alpha, -0.015)});

    CqedParams truth = ghz_params(3.0, -6.0, 20.0, 40.0, 2.0);
    truth.amplitude = 2.0;
    truth.background = 0.05;
    const std::vector<double> grid = linear_grid(units::ghz_to_angular(-150.0), units::ghz_to_angular(150.0), 601);
    const Spectrum data = reflectivity_spectrum(truth, grid);
    CqedParams start = truth;
    start.cavity_freq += units::ghz_to_angular(2.0);
    start.dot_freq -= units::ghz_to_angular(2.0);
    start.g *= 1.2;
    start.kappa *= 0.8;
    start.gamma_perp *= 1.2;
    start.amplitude *= 0.8;
    const std::vector<CqedParam> free{CqedParam::cavity_freq, CqedParam::dot_freq, CqedParam::g,
                                      CqedParam::kappa, CqedParam::gamma_perp, CqedParam::amplitude};
    const CqedParams fit = apply_fit(start, fit_spectrum(data, start, free));
    for (CqedParam p : free)
        worst = std::max(worst, std::abs(field_of(fit, p) - field_of(truth, p)) / std::max(1.0, std::abs(field_of(truth, p))));
    return worst;
}

double jacobian_check(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> det(-60.0, 60.0), rate(1.0, 60.0), probe(-150.0, 150.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        CqedParams p = ghz_params(det(rng), det(rng), rate(rng), rate(rng), rate(rng));
        p.amplitude = 1.5;
        p.background = 0.1;
        const double w = units::ghz_to_angular(probe(rng));
        const auto grad = reflectivity_gradient(p, w);
        double scale = 0.0;
        std::array<double, cqed_param_count> fd{};
        for (std::size_t k = 0; k < cqed_param_count; ++k) {
            const auto which = static_cast<CqedParam>(k);
            const double h = 1e-6 * std::max(1.0, std::abs(field_of(p, which)));
            CqedParams a = p, b = p;
            field_of(a, which) += h;
            field_of(b, which) -= h;
            fd[k] = (reflectivity(a, w) - reflectivity(b, w)) / (2.0 * h);
            scale = std::max(scale, std::abs(fd[k]));
        }
        for (std::size_t k = 0; k < cqed_param_count; ++k)
            worst = std::max(worst, std::abs(grad[k] - fd[k]) / scale);
    }
    return worst;
}

double rc_check()
{
    double worst = 0.0;
    for (double f : {20.0, 80.0, 100.0, 150.0, 300.0}) {
        DriveSpec d;
        d.frequency = f;
        d.samples_per_cycle = 512;
        const TimeTrace v = steady_state(rc_response(d), d);
        TimeTrace u{v.times, {}};
        for (double t : v.times)
            u.values.push_back(drive_voltage(d, t));
        const double ratio = harmonic_amplitude(v, f) / harmonic_amplitude(u, f);
        worst = std::max(worst, rel(ratio, rc_attenuation(f, d.rc_cutoff)));
    }
    return worst;
}

double csv_check(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> mant(-10.0, 10.0);
    std::uniform_int_distribution<int> expo(-200, 200);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = mant(rng) * std::pow(10.0, expo(rng));
        double back = 0.0;
        if (!csv::parse_double(csv::format_number(x), back))
            return 1.0;
        worst = std::max(worst, rel(back, x));
    }
    return worst;
}

bool determinism_check()
{
    const fs::path root = fs::temp_directory_path() / "qdswitch_acceptance";
    fs::remove_all(root);
    bool same = true;
    for (auto run : {&run_stark, &run_spectrum, &run_switch, &run_fit, &run_metrics}) {
        std::vector<RunOutcome> outs;
        for (const char* tag : {"a", "b"}) {
            RunRequest req;
            req.config = paper_preset();
            req.config.fit_noise = 0.01;
            req.config.seed = 7;
            req.out_dir = root / tag;
            outs.push_back((*run)(req));
        }
        if (outs[0].files.size() != outs[1].files.size())
            return false;
        for (std::size_t i = 0; i < outs[0].files.size(); ++i)
            if (outs[0].files[i].extension() == ".csv")
                same = same && csv::read_file(outs[0].files[i]) == csv::read_file(outs[1].files[i]);
    }
    fs::remove_all(root);
    return same;
}

void criterion_8()
{
    const auto t0 = clock_type::now();
    std::mt19937_64 rng(20260101);
    const double poisson = poisson_check();
    const double eig = eigen_check(rng);
    const double dip = dip_check(rng);
    const double roundtrip = fit_roundtrip_check();
    const double jac = jacobian_check(rng);
    const double rc = rc_check();
    const double csv_err = csv_check(rng);
    const bool det = determinism_check();
    const double dt = seconds_since(t0);

    struct Item {
        const char* name;
        double value;
        double limit;
    };
    const Item items[] = {{"poisson", poisson, 1e-6}, {"eigensolver", eig, 1e-10}, {"dip ratio", dip, 1e-9},
                          {"fit round-trip", roundtrip, 1e-8}, {"jacobian", jac, 1e-6}, {"rc attenuation", rc, 0.01},
                          {"csv round-trip", csv_err, 1e-12}};
    bool ok = det && dt < 60.0;
    std::string detail;
    for (const auto& it : items) {
        ok = ok && it.value < it.limit;
        detail += it.name + fmt(" %.2e/%.0e, ", it.value, it.limit);
    }
    detail += std::string("deterministic ") + (det ? "yes" : "no") + fmt(", runtime %.2f s", dt);
    report(8, "property suites", ok, detail);
}

} // namespace

int main()
{
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    std::printf("%s: %d failing criteria\n", failures == 0 ? "PASS" : "FAIL", failures);
    return failures == 0 ? 0 : 1;
}
