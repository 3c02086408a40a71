#ifndef QDSWITCH_ELECTROSTATICS_HPP
#define QDSWITCH_ELECTROSTATICS_HPP

// Bias voltage -> depletion width -> field at the dot -> Stark shift.
//
// Lateral Schottky contact on uniformly doped material, abrupt-junction
// full-depletion approximation. The voltage argument is always the
// reverse-bias magnitude (>= 0), entering the depletion width as (phi + V).

#include "qdswitch/errors.hpp"
#include "qdswitch/units.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qdswitch {

struct ElectrostaticParams {
    double donor_density = 9e15;        // 1/cm^3
    double barrier_potential = 0.36;    // V
    double relative_permittivity = 12.9;
    double electrode_distance = 0.75;   // um, electrode edge to cavity center

    void validate() const
    {
        if (!(donor_density > 0.0) || !std::isfinite(donor_density))
            throw domain_error("donor_density must be > 0");
        if (!(barrier_potential > 0.0) || !std::isfinite(barrier_potential))
            throw domain_error("barrier_potential must be > 0");
        if (!(relative_permittivity >= 1.0) || !std::isfinite(relative_permittivity))
            throw domain_error("relative_permittivity must be >= 1");
        if (!(electrode_distance > 0.0) || !std::isfinite(electrode_distance))
            throw domain_error("electrode_distance must be > 0");
    }
};

// Coefficients of  dE = mu*F - alpha*F^2  (meV, F in V/um).
struct StarkCoefficients {
    double mu = -0.009;     // meV um / V
    double alpha = -0.015;  // meV um^2 / V^2
    // Largest |F| covered by the data the coefficients came from. Shifts
    // evaluated beyond it are flagged as extrapolated.
    double fitted_field_limit = std::numeric_limits<double>::infinity();

    void validate() const
    {
        if (!std::isfinite(mu) || !std::isfinite(alpha))
            throw domain_error("stark coefficients must be finite");
        if (!(fitted_field_limit > 0.0))
            throw domain_error("fitted_field_limit must be > 0");
    }
};

// Phenomenological free-carrier screening: fraction of the field effect
// that survives at the dot. 1 means unscreened.
struct ScreeningFactor {
    double value = 1.0;

    void validate() const
    {
        if (!(value >= 0.0 && value <= 1.0))
            throw domain_error("screening factor must lie in [0, 1], got " + std::to_string(value));
    }
};

// Direction of the field at the dot relative to the axis used by the
// Stark coefficients. The fitted (mu, alpha) assume the field points
// toward the electrode, i.e. F < 0.
enum class FieldPolarity : int { toward_electrode = -1, away_from_electrode = 1 };

namespace detail {

inline void require_reverse_bias(double v_reverse)
{
    if (!(v_reverse >= 0.0) || !std::isfinite(v_reverse))
        throw domain_error("reverse bias must be finite and >= 0, got " + std::to_string(v_reverse));
}

// e*N_d/(eps0*eps_r) in V/um^2.
inline double charge_over_permittivity(const ElectrostaticParams& p)
{
    const double si = units::elementary_charge * p.donor_density * units::per_cm3_to_per_m3
                      / (units::vacuum_permittivity * p.relative_permittivity); // V/m^2
    return si * units::um_to_m * units::um_to_m;
}

} // namespace detail

// x_d = sqrt(2 eps0 eps_r (phi + V) / (e N_d)), in um.
inline double depletion_width(const ElectrostaticParams& p, double v_reverse)
{
    p.validate();
    detail::require_reverse_bias(v_reverse);
    return std::sqrt(2.0 * (p.barrier_potential + v_reverse) / detail::charge_over_permittivity(p));
}

// Field magnitude (V/um) at the cavity center: zero until the depletion
// edge passes the dot, then e N_d (x_d - dx)/(eps0 eps_r).
inline double field_at_cavity(const ElectrostaticParams& p, double v_reverse)
{
    const double xd = depletion_width(p, v_reverse);
    if (xd <= p.electrode_distance)
        return 0.0;
    return detail::charge_over_permittivity(p) * (xd - p.electrode_distance);
}

// Bias at which the depletion edge reaches the dot (x_d = dx). Can be
// negative if the built-in depletion already covers the dot.
inline double onset_voltage(const ElectrostaticParams& p)
{
    p.validate();
    const double dx = p.electrode_distance;
    return 0.5 * detail::charge_over_permittivity(p) * dx * dx - p.barrier_potential;
}

// dE = mu*F - alpha*F^2 for a signed field F (V/um).
inline double stark_shift(const StarkCoefficients& c, double field)
{
    return c.mu * field - c.alpha * field * field;
}

inline bool is_extrapolated(const StarkCoefficients& c, double field)
{
    return std::abs(field) > c.fitted_field_limit;
}

inline double apply_screening(double shift_mev, ScreeningFactor s)
{
    s.validate();
    return s.value * shift_mev;
}

// Full bias -> electrostatics -> QCSE chain for one device.
struct StarkDevice {
    ElectrostaticParams electro;
    StarkCoefficients stark;
    ScreeningFactor screening;
    FieldPolarity polarity = FieldPolarity::toward_electrode;

    void validate() const
    {
        electro.validate();
        stark.validate();
        screening.validate();
    }

    double signed_field(double v_reverse) const
    {
        return static_cast<int>(polarity) * field_at_cavity(electro, v_reverse);
    }

    // Unscreened shift (meV).
    double bare_shift(double v_reverse) const { return stark_shift(stark, signed_field(v_reverse)); }

    double shift(double v_reverse) const { return apply_screening(bare_shift(v_reverse), screening); }

    bool extrapolated(double v_reverse) const { return is_extrapolated(stark, signed_field(v_reverse)); }
};

// Dot detuning (angular GHz) produced by a reverse bias.
inline double voltage_to_detuning(const ElectrostaticParams& p, const StarkCoefficients& c, ScreeningFactor s,
                                  double v_reverse, FieldPolarity polarity = FieldPolarity::toward_electrode)
{
    c.validate();
    const double field = static_cast<int>(polarity) * field_at_cavity(p, v_reverse);
    return units::mev_to_angular_ghz(apply_screening(stark_shift(c, field), s));
}

inline double voltage_to_detuning(const StarkDevice& d, double v_reverse)
{
    return voltage_to_detuning(d.electro, d.stark, d.screening, v_reverse, d.polarity);
}

} // namespace qdswitch

#endif
