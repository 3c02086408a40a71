#include "oracles.hpp"

#include "qdswitch/fitting.hpp"
#include "qdswitch/switching.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qdswitch;
using units::ghz_to_angular;

namespace {

// Preset device with (gamma_perp, screening) calibrated on {(10 V,1.5),(14 V,2.0)}.
SwitchModel calibrated_model()
{
    SwitchModel m;
    m.device.stark = {-0.009, -0.015};
    m.cavity = {0.0, 0.0, ghz_to_angular(20.0), kappa_from_q({935.0, 4000.0}), ghz_to_angular(1.0), 1.0, 0.0};
    m.coupling = CouplingTable({{0.0, ghz_to_angular(20.0)}, {7.0, ghz_to_angular(15.0)}});
    return apply_contrast_fit(m, fit_contrast({{10.0, 1.5}, {14.0, 2.0}}, m));
}

} // namespace

TEST(DriveSpec, Validation)
{
    DriveSpec d;
    d.validate();
    d.cycles = 2;
    EXPECT_THROW(d.validate(), domain_error);
    d = {};
    d.samples_per_cycle = 32;
    EXPECT_THROW(d.validate(), domain_error);
    d = {};
    d.v_high = -1.0;
    EXPECT_THROW(d.validate(), domain_error);
    d = {};
    d.duty = 1.0;
    EXPECT_THROW(d.validate(), domain_error);
    d = {};
    d.rc_cutoff = 0.0;
    EXPECT_THROW(rc_response(d), domain_error);
}

TEST(RcResponse, AttenuationValues)
{
    EXPECT_NEAR(rc_attenuation(100.0, 100.0), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(rc_attenuation(150.0, 100.0), 0.5547, 1e-4);
}

TEST(RcResponse, StepMatchesAnalytic)
{
    DriveSpec d;
    d.frequency = 20.0; // half period 25 ns >> tau
    d.cycles = 3;
    d.samples_per_cycle = 1000;
    const TimeTrace t = rc_response(d);
    const double tau = d.time_constant();
    const double half = 0.5 * d.period();
    const double swing = d.v_high - d.v_low;
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.times[i] > half)
            break;
        worst = std::max(worst, std::abs(t.values[i] - oracle::rc_step(d.v_low, d.v_high, t.times[i], tau)));
    }
    EXPECT_LT(worst, 1e-4 * swing);

    // Falling edge from the value reached at half period.
    const double v_half = oracle::rc_step(d.v_low, d.v_high, half, tau);
    worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t.times[i] > half && t.times[i] <= d.period())
            worst = std::max(worst, std::abs(t.values[i] - oracle::rc_step(v_half, d.v_low, t.times[i] - half, tau)));
    EXPECT_LT(worst, 1e-4 * swing);
}

TEST(RcResponse, FundamentalAttenuationMatchesTransferFunction)
{
    for (double f : {20.0, 80.0, 100.0, 150.0, 300.0}) {
        DriveSpec d;
        d.frequency = f;
        d.cycles = 30;
        d.samples_per_cycle = 512;
        const TimeTrace v = steady_state(rc_response(d), d);
        TimeTrace u{v.times, {}};
        for (double t : v.times)
            u.values.push_back(drive_voltage(d, t));
        const double ratio = harmonic_amplitude(v, f) / harmonic_amplitude(u, f);
        EXPECT_NEAR(ratio / rc_attenuation(f, d.rc_cutoff), 1.0, 0.01) << f;
    }
}

TEST(RcResponse, SlowDriveFollowsSquareWave)
{
    DriveSpec d;
    d.frequency = d.rc_cutoff / 100.0;
    const TimeTrace v = steady_state(rc_response(d), d);
    const auto [lo, hi] = std::minmax_element(v.values.begin(), v.values.end());
    EXPECT_GE(*hi - *lo, 0.99 * (d.v_high - d.v_low));
}

TEST(RcResponse, TimeGridChecks)
{
    DriveSpec d;
    EXPECT_THROW(rc_response(d, std::vector<double>{1.0, 0.5}), domain_error);
    EXPECT_THROW(rc_response(d, std::vector<double>{-1.0, 0.5}), domain_error);
    const auto t = rc_response(d, std::vector<double>{0.0, 1.0});
    EXPECT_EQ(t.values[0], d.v_low);
}

TEST(OnOff, ConstantAndDegenerate)
{
    EXPECT_EQ(on_off_ratio({{0, 1, 2}, {0.3, 0.3, 0.3}}), 1.0);
    EXPECT_DOUBLE_EQ(on_off_ratio({{0, 1, 2}, {0.2, 0.3, 0.4}}), 2.0);
    EXPECT_THROW(on_off_ratio({{0, 1}, {0.0, 1.0}}), degenerate_trace_error);
    EXPECT_THROW(on_off_ratio({}), domain_error);
}

TEST(SimulateSwitching, ConstantDriveEqualsDcPoint)
{
    const SwitchModel m = calibrated_model();
    DriveSpec d;
    d.v_low = d.v_high = 10.0;
    const SwitchingRun run = simulate_switching(d, m);
    for (double v : run.intensity.values)
        EXPECT_NEAR(v, m.intensity(10.0), 1e-12);
    EXPECT_EQ(run.on_off(), 1.0);
}

TEST(SimulateSwitching, DcContrastFromCalibration)
{
    const SwitchModel m = calibrated_model();
    EXPECT_NEAR(m.dc_on_off(0.0, 10.0), 1.5, 1e-6);
    EXPECT_NEAR(m.dc_on_off(0.0, 14.0), 2.0, 1e-6);
}

TEST(SimulateSwitching, ModulatedContrastFollowsRcRolloff)
{
    const SwitchModel m = calibrated_model();
    DriveSpec d;
    d.frequency = 80.0;
    const double r80 = simulate_switching(d, m).on_off();
    d.frequency = 150.0;
    const double r150 = simulate_switching(d, m).on_off();
    EXPECT_GE(r80, 1.35);
    EXPECT_LE(r80, 1.5);
    EXPECT_GE(r150, 1.2);
    EXPECT_LE(r150, 1.4);
    EXPECT_LT(r150, r80);

    double prev = std::numeric_limits<double>::infinity();
    for (double f = 10.0; f <= 300.0; f += 10.0) {
        d.frequency = f;
        const double r = simulate_switching(d, m).on_off();
        EXPECT_LE(r, prev * (1.0 + 1e-12)) << f;
        prev = r;
    }
}

TEST(SimulateSwitching, SteadyStateIsPeriodic)
{
    const SwitchModel m = calibrated_model();
    for (double f : {80.0, 150.0, 300.0}) {
        DriveSpec d;
        d.frequency = f;
        const SwitchingRun run = simulate_switching(d, m);
        const std::size_t n = d.samples_per_cycle;
        double mean = 0.0;
        for (double v : run.intensity.values)
            mean += v;
        mean /= static_cast<double>(run.intensity.size());
        double worst = 0.0;
        for (std::size_t i = n; i < run.intensity.size(); ++i)
            worst = std::max(worst, std::abs(run.intensity.values[i] - run.intensity.values[i - n]));
        EXPECT_LT(worst, 1e-6 * mean) << f;
    }
}

TEST(SimulateSwitching, DiscardsTransientCycles)
{
    DriveSpec d;
    d.cycles = 9;
    const SwitchingRun run = simulate_switching(d, calibrated_model());
    EXPECT_EQ(run.intensity.size(), static_cast<std::size_t>(6 * d.samples_per_cycle));
    EXPECT_NEAR(run.intensity.times.front(), 3.0 * d.period(), 1e-9);
}

TEST(SimulateSwitching, AdiabaticityWarning)
{
    SwitchModel m = calibrated_model();
    DriveSpec d;
    EXPECT_TRUE(simulate_switching(d, m).warnings.empty());
    d.frequency = 5000.0; // 5 GHz > kappa/(2 pi 10) ~ 4 GHz
    const auto run = simulate_switching(d, m);
    ASSERT_FALSE(run.warnings.empty());
    EXPECT_NE(run.warnings.front().find("quasi-static"), std::string::npos);
}

TEST(SwitchModel, ProbeDefaultsToZeroBiasDot)
{
    SwitchModel m = calibrated_model();
    m.cavity.dot_freq = ghz_to_angular(3.0);
    EXPECT_EQ(m.probe_frequency(), m.cavity.dot_freq);
    m.probe = 1.0;
    EXPECT_EQ(m.probe_frequency(), 1.0);
}

TEST(SwitchModel, ScreenedCouplingReduction)
{
    SwitchModel m = calibrated_model();
    const double g0 = ghz_to_angular(20.0), g7 = ghz_to_angular(15.0);
    m.device.screening.value = 1.0;
    EXPECT_NEAR(m.coupling_at(7.0), g7, 1e-12);
    m.device.screening.value = 0.0;
    EXPECT_NEAR(m.coupling_at(7.0), g0, 1e-12);
    m.device.screening.value = 0.5;
    EXPECT_NEAR(m.coupling_at(7.0), 0.5 * (g0 + g7), 1e-12);
    m.coupling = {};
    EXPECT_EQ(m.coupling_at(7.0), m.cavity.g);
}

TEST(SwitchingEnergy, Values)
{
    EXPECT_EQ(switching_energy({0.2, 0.0, 12.9}), 0.0);
    const double u = switching_energy({0.2, 5.0, 12.9});
    EXPECT_NEAR(u, 0.5 * 8.8541878128e-12 * 12.9 * 25e12 * 0.2e-18 * 1e15, 1e-15);
    EXPECT_NEAR(u, 0.2855, 1e-4);
    EXPECT_NEAR(switching_energy({0.2, 10.0, 12.9}) / u, 4.0, 1e-12);
    EXPECT_NEAR(switching_energy({0.6, 5.0, 12.9}) / u, 3.0, 1e-12);
    EXPECT_THROW(switching_energy({0.0, 5.0, 12.9}), domain_error);
}
