#ifndef QDSWITCH_SWITCHING_HPP
#define QDSWITCH_SWITCHING_HPP

// Time-domain electro-optic switching. A square-wave bias passes through a
// first-order RC line; the filtered bias sets the dot detuning and coupling
// quasi-statically, and the probe reflectivity is read at a fixed frequency.
// Quasi-static evaluation holds while the drive is far slower than kappa.

#include "qdswitch/cqed.hpp"
#include "qdswitch/electrostatics.hpp"
#include "qdswitch/errors.hpp"
#include "qdswitch/units.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qdswitch {

struct DriveSpec {
    double v_low = 0.0;          // V
    double v_high = 10.0;        // V
    double frequency = 150.0;    // MHz
    double duty = 0.5;           // fraction of the period spent at v_high
    double rc_cutoff = 100.0;    // MHz, 3 dB point of the line
    int cycles = 30;
    int samples_per_cycle = 256;

    void validate() const
    {
        if (!(v_low >= 0.0) || !(v_high >= v_low) || !std::isfinite(v_high))
            throw domain_error("drive needs v_high >= v_low >= 0");
        if (!(frequency > 0.0) || !std::isfinite(frequency))
            throw domain_error("drive frequency must be > 0");
        if (!(duty > 0.0 && duty < 1.0))
            throw domain_error("duty must lie in (0, 1)");
        if (!(rc_cutoff > 0.0) || !std::isfinite(rc_cutoff))
            throw domain_error("rc_cutoff must be > 0");
        if (cycles < 3)
            throw domain_error("cycles must be >= 3");
        if (samples_per_cycle < 64)
            throw domain_error("samples_per_cycle must be >= 64");
    }

    double period() const { return units::mhz_period_ns(frequency); }           // ns
    double time_constant() const { return 1e3 / (units::two_pi * rc_cutoff); }   // ns
    int transient_cycles() const { return (cycles + 2) / 3; }
};

struct TimeTrace {
    std::vector<double> times;  // ns
    std::vector<double> values;

    std::size_t size() const { return times.size(); }
};

// Square wave: v_high on [kT, kT + duty*T), v_low otherwise.
inline double drive_voltage(const DriveSpec& d, double t)
{
    const double period = d.period();
    double phase = std::fmod(t, period);
    if (phase < 0.0)
        phase += period;
    return phase < d.duty * period ? d.v_high : d.v_low;
}

// Sample times for the whole run: cycles * samples_per_cycle uniform points from t = 0.
inline std::vector<double> drive_time_grid(const DriveSpec& d)
{
    const std::size_t n = static_cast<std::size_t>(d.cycles) * static_cast<std::size_t>(d.samples_per_cycle);
    const double dt = d.period() / d.samples_per_cycle;
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = static_cast<double>(i) * dt;
    return t;
}

// |H(f)| of the first-order line.
inline double rc_attenuation(double f_mhz, double cutoff_mhz)
{
    const double r = f_mhz / cutoff_mhz;
    return 1.0 / std::sqrt(1.0 + r * r);
}

namespace detail {

// Advance tau dv/dt = u - v over [0, span] with constant u by RK4 steps no
// longer than tau/20.
inline double rc_advance(double v, double u, double span, double tau)
{
    if (span <= 0.0)
        return v;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / (tau / 20.0))));
    const double h = span / steps;
    auto rhs = [&](double x) { return (u - x) / tau; };
    for (int i = 0; i < steps; ++i) {
        const double k1 = rhs(v);
        const double k2 = rhs(v + 0.5 * h * k1);
        const double k3 = rhs(v + 0.5 * h * k2);
        const double k4 = rhs(v + h * k3);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return v;
}

} // namespace detail

// Filtered bias V_f on an increasing time grid, starting from V_f(0) = v_low
// at t = 0. Integration intervals are split at drive edges so each RK4
// segment sees a constant input.
inline TimeTrace rc_response(const DriveSpec& d, std::span<const double> times)
{
    d.validate();
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw domain_error("time grid must be strictly increasing");
    if (!times.empty() && times.front() < 0.0)
        throw domain_error("time grid must start at t >= 0");

    const double tau = d.time_constant();
    const double period = d.period();
    const double high_len = d.duty * period;

    TimeTrace out{{times.begin(), times.end()}, std::vector<double>(times.size())};
    const double eps = 1e-12 * period;
    double v = d.v_low;
    double t = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double target = times[i];
        while (target - t > eps) {
            const double k = std::floor((t + eps) / period);
            const double falling = k * period + high_len;
            const double next_edge = falling > t + eps ? falling : (k + 1.0) * period;
            const double seg_end = std::min(next_edge, target);
            v = detail::rc_advance(v, drive_voltage(d, 0.5 * (t + seg_end)), seg_end - t, tau);
            t = seg_end;
        }
        t = std::max(t, target);
        out.values[i] = v;
    }
    return out;
}

inline TimeTrace rc_response(const DriveSpec& d)
{
    const auto grid = drive_time_grid(d);
    return rc_response(d, grid);
}

// Amplitude of the component at f_mhz, from an integer number of periods
// of a uniformly sampled trace (rectangle-rule DFT).
inline double harmonic_amplitude(const TimeTrace& trace, double f_mhz)
{
    if (trace.size() < 2)
        throw domain_error("trace too short for harmonic analysis");
    const double w = units::two_pi * f_mhz * 1e-3; // rad/ns
    std::complex<double> acc{};
    for (std::size_t i = 0; i < trace.size(); ++i)
        acc += trace.values[i] * std::polar(1.0, -w * trace.times[i]);
    return 2.0 * std::abs(acc) / static_cast<double>(trace.size());
}

// Samples from the end of the transient cycles onward.
inline TimeTrace steady_state(const TimeTrace& trace, const DriveSpec& d)
{
    const std::size_t skip = static_cast<std::size_t>(d.transient_cycles()) * d.samples_per_cycle;
    if (skip >= trace.size())
        throw domain_error("trace shorter than its transient window");
    return {{trace.times.begin() + static_cast<std::ptrdiff_t>(skip), trace.times.end()},
            {trace.values.begin() + static_cast<std::ptrdiff_t>(skip), trace.values.end()}};
}

inline double on_off_ratio(const TimeTrace& trace)
{
    if (trace.values.empty())
        throw domain_error("empty trace");
    const auto [lo, hi] = std::minmax_element(trace.values.begin(), trace.values.end());
    if (!(*lo > 0.0))
        throw degenerate_trace_error("trace minimum is not positive; on/off ratio undefined");
    return *hi / *lo;
}

// Bias-controlled cavity-QED switch: Stark detuning and (optionally)
// bias-dependent coupling, probed at a fixed frequency.
struct SwitchModel {
    StarkDevice device;
    CqedParams cavity;               // dot_freq is the zero-bias dot frequency
    CouplingTable coupling;          // empty -> cavity.g at every bias
    std::optional<double> probe;     // angular GHz; defaults to the zero-bias dot frequency

    void validate() const
    {
        device.validate();
        cavity.validate();
    }

    double probe_frequency() const { return probe.value_or(cavity.dot_freq); }

    // Screening scales the field-driven change in g the same way it scales
    // the Stark shift: g(0) + s*(g_table(V) - g(0)).
    double coupling_at(double v_reverse) const
    {
        if (coupling.empty())
            return cavity.g;
        const double g0 = coupling(0.0);
        return g0 + device.screening.value * (coupling(v_reverse) - g0);
    }

    CqedParams params_at(double v_reverse) const
    {
        CqedParams p = cavity;
        p.dot_freq += voltage_to_detuning(device, v_reverse);
        p.g = coupling_at(v_reverse);
        return p;
    }

    double intensity(double v_reverse) const { return reflectivity(params_at(v_reverse), probe_frequency()); }

    // Static on/off between two bias levels.
    double dc_on_off(double v_a, double v_b) const
    {
        const double ia = intensity(v_a);
        const double ib = intensity(v_b);
        const double lo = std::min(ia, ib);
        if (!(lo > 0.0))
            throw degenerate_trace_error("probe intensity is not positive");
        return std::max(ia, ib) / lo;
    }
};

struct SwitchingRun {
    TimeTrace voltage;     // filtered bias, steady-state window
    TimeTrace intensity;   // probe reflectivity, steady-state window
    std::vector<std::string> warnings;

    double on_off() const { return on_off_ratio(intensity); }
};

// Quasi-static switching simulation; the first ceil(cycles/3) cycles are dropped.
inline SwitchingRun simulate_switching(const DriveSpec& d, const SwitchModel& model)
{
    d.validate();
    model.validate();

    SwitchingRun run;
    const double kappa_ghz = units::angular_to_ghz(model.cavity.kappa);
    if (d.frequency * 1e-3 > kappa_ghz / 10.0)
        run.warnings.push_back("drive frequency exceeds kappa/(2 pi 10); quasi-static approximation is questionable");
    if (model.device.extrapolated(d.v_high))
        run.warnings.push_back("Stark coefficients extrapolated beyond their fitted field range");

    run.voltage = steady_state(rc_response(d), d);
    run.intensity.times = run.voltage.times;
    run.intensity.values.resize(run.voltage.size());
    std::transform(run.voltage.values.begin(), run.voltage.values.end(), run.intensity.values.begin(),
                   [&](double v) { return model.intensity(v); });
    return run;
}

struct EnergyBudget {
    double active_volume = 0.2;          // um^3
    double field = 5.0;                  // V/um
    double relative_permittivity = 12.9;

    void validate() const
    {
        if (!(active_volume > 0.0))
            throw domain_error("active_volume must be > 0");
        if (!std::isfinite(field))
            throw domain_error("field must be finite");
        if (!(relative_permittivity > 0.0))
            throw domain_error("relative_permittivity must be > 0");
    }
};

// Electrostatic energy 1/2 eps0 eps_r F^2 V_a stored in the active volume, fJ.
inline double switching_energy(const EnergyBudget& b)
{
    b.validate();
    const double field_si = b.field / units::um_to_m;
    const double volume_si = b.active_volume * units::um_to_m * units::um_to_m * units::um_to_m;
    return 0.5 * units::vacuum_permittivity * b.relative_permittivity * field_si * field_si * volume_si * 1e15;
}

} // namespace qdswitch

#endif
