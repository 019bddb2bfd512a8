#pragma once

#include <complex>
#include <numbers>

namespace trapant {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double c0 = 299792458.0;            // m/s
inline constexpr double mu0 = 4.0e-7 * pi;           // H/m
inline constexpr double eps0 = 1.0 / (mu0 * c0 * c0);  // F/m
inline constexpr double eta0 = mu0 * c0;             // ohm

inline double wavelength(double f) { return c0 / f; }
inline double wavenumber(double f) { return 2.0 * pi * f / c0; }

}  // namespace trapant
