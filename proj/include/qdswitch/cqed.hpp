#ifndef QDSWITCH_CQED_HPP
#define QDSWITCH_CQED_HPP

// Single two-level emitter coupled to one cavity mode: polariton
// eigenmodes, weak-probe reflectivity, PL lineshape, coupling regime.
//
// All frequencies and rates are angular GHz (rad/ns), measured as offsets
// from a common optical reference frequency. kappa and gamma_perp are
// amplitude (field) decay rates, i.e. Lorentzian half widths.

#include "qdswitch/errors.hpp"
#include "qdswitch/units.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qdswitch {

struct CqedParams {
    double cavity_freq = 0.0;
    double dot_freq = 0.0;
    double g = 0.0;
    double kappa = 1.0;
    double gamma_perp = 1.0;
    double amplitude = 1.0;
    double background = 0.0;

    void validate() const
    {
        auto finite = [](double x) { return std::isfinite(x); };
        if (!finite(cavity_freq) || !finite(dot_freq))
            throw domain_error("cavity/dot frequencies must be finite");
        if (!(g >= 0.0) || !finite(g))
            throw domain_error("coupling g must be >= 0");
        if (!(kappa > 0.0) || !finite(kappa))
            throw domain_error("kappa must be > 0");
        if (!(gamma_perp > 0.0) || !finite(gamma_perp))
            throw domain_error("gamma_perp must be > 0");
        if (!(amplitude > 0.0) || !finite(amplitude))
            throw domain_error("amplitude must be > 0");
        if (!(background >= 0.0) || !finite(background))
            throw domain_error("background must be >= 0");
    }

    // Global frequency offset; spectra are invariant under it.
    CqedParams shifted(double offset) const
    {
        CqedParams q = *this;
        q.cavity_freq += offset;
        q.dot_freq += offset;
        return q;
    }
};

// Parameter handles used by the fitters.
enum class CqedParam : std::size_t { cavity_freq, dot_freq, g, kappa, gamma_perp, amplitude, background };
inline constexpr std::size_t cqed_param_count = 7;

inline constexpr std::array<std::string_view, cqed_param_count> cqed_param_names{
    "cavity_freq", "dot_freq", "g", "kappa", "gamma_perp", "amplitude", "background"};

inline std::string_view name_of(CqedParam p) { return cqed_param_names[static_cast<std::size_t>(p)]; }

inline std::optional<CqedParam> cqed_param_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < cqed_param_count; ++i)
        if (cqed_param_names[i] == name)
            return static_cast<CqedParam>(i);
    if (name == "gamma")
        return CqedParam::gamma_perp;
    return std::nullopt;
}

inline double& field_of(CqedParams& p, CqedParam which)
{
    switch (which) {
    case CqedParam::cavity_freq: return p.cavity_freq;
    case CqedParam::dot_freq: return p.dot_freq;
    case CqedParam::g: return p.g;
    case CqedParam::kappa: return p.kappa;
    case CqedParam::gamma_perp: return p.gamma_perp;
    case CqedParam::amplitude: return p.amplitude;
    case CqedParam::background: return p.background;
    }
    throw domain_error("unknown cqed parameter");
}

inline double field_of(const CqedParams& p, CqedParam which)
{
    return field_of(const_cast<CqedParams&>(p), which);
}

struct OpticalFrame {
    double reference_wavelength = 935.0; // nm
    std::optional<double> quality_factor;

    void validate() const
    {
        if (!(reference_wavelength > 0.0))
            throw domain_error("reference_wavelength must be > 0");
        if (quality_factor && !(*quality_factor > 0.0))
            throw domain_error("quality_factor must be > 0");
    }
};

// Sampled spectrum on a strictly increasing grid of angular GHz offsets.
struct Spectrum {
    std::vector<double> detunings;
    std::vector<double> intensities;

    std::size_t size() const { return detunings.size(); }

    void validate() const
    {
        if (detunings.size() != intensities.size())
            throw domain_error("spectrum grid and intensity lengths differ");
        for (std::size_t i = 1; i < detunings.size(); ++i)
            if (!(detunings[i] > detunings[i - 1]))
                throw domain_error("spectrum grid must be strictly increasing");
        for (double v : intensities)
            if (!(v >= 0.0))
                throw domain_error("spectrum intensities must be non-negative");
    }
};

namespace detail {

inline void require_grid(std::span<const double> grid)
{
    if (grid.empty())
        throw domain_error("frequency grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw domain_error("frequency grid must be strictly increasing");
}

} // namespace detail

inline std::vector<double> linear_grid(double lo, double hi, std::size_t n)
{
    if (n < 2 || !(hi > lo))
        throw domain_error("linear_grid needs n >= 2 and hi > lo");
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

// kappa = omega0 / (2 Q), angular GHz.
inline double kappa_from_q(const OpticalFrame& frame)
{
    frame.validate();
    if (!frame.quality_factor)
        throw domain_error("quality_factor is required to derive kappa");
    return units::wavelength_nm_to_angular_ghz(frame.reference_wavelength) / (2.0 * *frame.quality_factor);
}

struct PolaritonModes {
    std::complex<double> lower; // smaller real part
    std::complex<double> upper;

    double splitting() const { return upper.real() - lower.real(); }
};

// Eigenvalues of [[wc - i kappa, g], [g, wd - i gamma]].
inline PolaritonModes polariton_modes(const CqedParams& p)
{
    using namespace std::complex_literals;
    const std::complex<double> mean = 0.5 * (p.cavity_freq + p.dot_freq) - 0.5i * (p.kappa + p.gamma_perp);
    const std::complex<double> half_diff = 0.5 * (p.cavity_freq - p.dot_freq) - 0.5i * (p.kappa - p.gamma_perp);
    PolaritonModes m{};
    if (p.g == 0.0) {
        m = {{p.cavity_freq, -p.kappa}, {p.dot_freq, -p.gamma_perp}};
    } else {
        const std::complex<double> root = std::sqrt(p.g * p.g + half_diff * half_diff);
        m = {mean - root, mean + root};
    }
    if (m.upper.real() < m.lower.real())
        std::swap(m.lower, m.upper);
    return m;
}

namespace detail {

// kappa / (i(wc - w) + kappa + g^2/(i(wd - w) + gamma))
inline std::complex<double> reflection_amplitude(const CqedParams& p, double w)
{
    using namespace std::complex_literals;
    const std::complex<double> dot = 1i * (p.dot_freq - w) + p.gamma_perp;
    const std::complex<double> denom = 1i * (p.cavity_freq - w) + p.kappa + p.g * p.g / dot;
    return p.kappa / denom;
}

} // namespace detail

// Weak-probe cross-polarized reflectivity at one probe frequency.
inline double reflectivity(const CqedParams& p, double w)
{
    return p.background + p.amplitude * std::norm(detail::reflection_amplitude(p, w));
}

// d reflectivity / d parameter, in CqedParam order.
inline std::array<double, cqed_param_count> reflectivity_gradient(const CqedParams& p, double w)
{
    using namespace std::complex_literals;
    const std::complex<double> dot = 1i * (p.dot_freq - w) + p.gamma_perp;
    const std::complex<double> denom = 1i * (p.cavity_freq - w) + p.kappa + p.g * p.g / dot;
    const std::complex<double> z = p.kappa / denom;
    const std::complex<double> dz_ddenom = -p.kappa / (denom * denom);
    const std::complex<double> g2_over_dot2 = p.g * p.g / (dot * dot);

    auto d_norm = [&](std::complex<double> dz) { return 2.0 * p.amplitude * std::real(std::conj(z) * dz); };

    std::array<double, cqed_param_count> grad{};
    grad[static_cast<std::size_t>(CqedParam::cavity_freq)] = d_norm(dz_ddenom * 1i);
    grad[static_cast<std::size_t>(CqedParam::dot_freq)] = d_norm(dz_ddenom * (-1i * g2_over_dot2));
    grad[static_cast<std::size_t>(CqedParam::g)] = d_norm(dz_ddenom * (2.0 * p.g / dot));
    grad[static_cast<std::size_t>(CqedParam::kappa)] = d_norm(1.0 / denom + dz_ddenom);
    grad[static_cast<std::size_t>(CqedParam::gamma_perp)] = d_norm(dz_ddenom * (-g2_over_dot2));
    grad[static_cast<std::size_t>(CqedParam::amplitude)] = std::norm(z);
    grad[static_cast<std::size_t>(CqedParam::background)] = 1.0;
    return grad;
}

inline Spectrum reflectivity_spectrum(const CqedParams& p, std::span<const double> grid)
{
    p.validate();
    detail::require_grid(grid);
    Spectrum s{{grid.begin(), grid.end()}, std::vector<double>(grid.size())};
    std::transform(grid.begin(), grid.end(), s.intensities.begin(), [&](double w) { return reflectivity(p, w); });
    return s;
}

// Cooperativity C = g^2 / (kappa gamma_perp).
inline double cooperativity(const CqedParams& p) { return p.g * p.g / (p.kappa * p.gamma_perp); }

// Unit-peak Lorentzian with half width hwhm.
inline double lorentzian(double w, double center, double hwhm)
{
    const double d = w - center;
    return hwhm * hwhm / (d * d + hwhm * hwhm);
}

// PL as an equal-weight pair of polariton Lorentzians (unit peak each),
// scaled by amplitude on top of background.
inline Spectrum pl_spectrum(const CqedParams& p, std::span<const double> grid)
{
    p.validate();
    detail::require_grid(grid);
    const PolaritonModes m = polariton_modes(p);
    Spectrum s{{grid.begin(), grid.end()}, std::vector<double>(grid.size())};
    std::transform(grid.begin(), grid.end(), s.intensities.begin(), [&](double w) {
        return p.background
               + p.amplitude * (lorentzian(w, m.lower.real(), -m.lower.imag())
                                + lorentzian(w, m.upper.real(), -m.upper.imag()));
    });
    return s;
}

enum class CouplingRegime { strong, onset, weak };

inline std::string_view to_string(CouplingRegime r)
{
    switch (r) {
    case CouplingRegime::strong: return "strong";
    case CouplingRegime::onset: return "onset";
    case CouplingRegime::weak: return "weak";
    }
    return "?";
}

// Fractional band around g = (kappa + gamma)/2 classified as the onset.
inline constexpr double regime_margin = 0.10;

inline CouplingRegime coupling_regime(const CqedParams& p)
{
    const double threshold = 0.5 * (p.kappa + p.gamma_perp);
    const double ratio = p.g / threshold;
    if (ratio > 1.0 + regime_margin)
        return CouplingRegime::strong;
    if (ratio < 1.0 - regime_margin)
        return CouplingRegime::weak;
    return CouplingRegime::onset;
}

// Bandwidth limits in ordinary GHz from angular rates.
inline double strong_coupling_bandwidth(double g, double kappa) { return std::min(g, kappa) / units::pi; }
inline double weak_coupling_bandwidth(double g, double kappa) { return g * g / (units::pi * kappa); }

inline double max_bandwidth(const CqedParams& p)
{
    if (coupling_regime(p) == CouplingRegime::weak)
        return weak_coupling_bandwidth(p.g, p.kappa);
    return strong_coupling_bandwidth(p.g, p.kappa);
}

// Measured g at a handful of bias points; linear in between, clamped outside.
class CouplingTable {
public:
    CouplingTable() = default;

    // anchors: (reverse bias V, g in angular GHz), voltages strictly increasing.
    explicit CouplingTable(std::vector<std::pair<double, double>> anchors) : anchors_(std::move(anchors))
    {
        if (anchors_.size() < 2)
            throw domain_error("coupling table needs at least 2 anchor points");
        for (std::size_t i = 1; i < anchors_.size(); ++i)
            if (!(anchors_[i].first > anchors_[i - 1].first))
                throw domain_error("coupling table voltages must be strictly increasing");
        for (const auto& a : anchors_)
            if (!(a.second >= 0.0) || !std::isfinite(a.second))
                throw domain_error("coupling table g values must be finite and >= 0");
    }

    bool empty() const { return anchors_.empty(); }
    const std::vector<std::pair<double, double>>& anchors() const { return anchors_; }

    double operator()(double v) const
    {
        if (anchors_.size() < 2)
            throw domain_error("coupling table needs at least 2 anchor points");
        if (v <= anchors_.front().first)
            return anchors_.front().second;
        if (v >= anchors_.back().first)
            return anchors_.back().second;
        auto hi = std::upper_bound(anchors_.begin(), anchors_.end(), v,
                                   [](double x, const auto& a) { return x < a.first; });
        auto lo = hi - 1;
        const double t = (v - lo->first) / (hi->first - lo->first);
        return lo->second + t * (hi->second - lo->second);
    }

private:
    std::vector<std::pair<double, double>> anchors_;
};

inline double g_of_voltage(const CouplingTable& table, double v) { return table(v); }

} // namespace qdswitch

#endif
