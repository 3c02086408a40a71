#ifndef QDSWITCH_UNITS_HPP
#define QDSWITCH_UNITS_HPP

// Unit system used throughout the library:
//   length      um (depletion width, electrode distance), nm (optical wavelength)
//   field       V/um
//   energy      meV
//   rates       angular GHz (rad/ns); ordinary GHz only at the I/O boundary
//   time        ns
//
// Every conversion goes through the constants below, which are the exact
// SI defining values (2019 redefinition) plus CODATA 2018 for eps0.

#include <numbers>

namespace qdswitch::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double planck = 6.62607015e-34;               // J s
inline constexpr double reduced_planck = planck / two_pi;      // J s
inline constexpr double speed_of_light = 299792458.0;          // m/s
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m

inline constexpr double per_cm3_to_per_m3 = 1e6;
inline constexpr double um_to_m = 1e-6;
inline constexpr double nm_to_m = 1e-9;

// Ordinary frequency (GHz) of a photon energy of 1 meV, E/h. ~241.799 GHz.
inline constexpr double ghz_per_mev = 1e-3 * elementary_charge / planck * 1e-9;

// Angular frequency (rad/ns) of 1 meV, E/hbar.
inline constexpr double angular_ghz_per_mev = two_pi * ghz_per_mev;

// h*c in eV nm, ~1239.84198.
inline constexpr double hc_ev_nm = planck * speed_of_light / elementary_charge / nm_to_m;

constexpr double mev_to_angular_ghz(double mev) { return mev * angular_ghz_per_mev; }
constexpr double angular_ghz_to_mev(double w) { return w / angular_ghz_per_mev; }

constexpr double ghz_to_angular(double f_ghz) { return two_pi * f_ghz; }
constexpr double angular_to_ghz(double w) { return w / two_pi; }

// Optical angular frequency (rad/ns) of a vacuum wavelength in nm.
constexpr double wavelength_nm_to_angular_ghz(double lambda_nm)
{
    return two_pi * speed_of_light / (lambda_nm * nm_to_m) * 1e-9;
}

// Ordinary-frequency offset (GHz) of a small wavelength offset about lambda0:
// dnu = -c * dlambda / lambda0^2 (to first order).
constexpr double wavelength_offset_to_ghz(double dlambda_nm, double lambda0_nm)
{
    return -speed_of_light * (dlambda_nm * nm_to_m) / ((lambda0_nm * nm_to_m) * (lambda0_nm * nm_to_m)) * 1e-9;
}

// Drive frequencies are quoted in MHz; times are in ns.
constexpr double mhz_period_ns(double f_mhz) { return 1e3 / f_mhz; }

} // namespace qdswitch::units

#endif
