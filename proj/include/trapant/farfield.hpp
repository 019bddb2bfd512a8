#pragma once

// Far-zone fields, radiated power, directivity, gain and efficiency from
// solved basis currents.

#include <complex>
#include <span>
#include <vector>

#include "trapant/geometry.hpp"
#include "trapant/solver.hpp"

namespace trapant::farfield {

enum class ThetaSampling {
    gauss_legendre,  // two Gauss-Legendre panels in cos(theta), split at the horizon
    uniform,         // 0..pi inclusive, trapezoid weights
};

struct GridSpec {
    int n_theta = 40;
    int n_phi = 72;
    ThetaSampling sampling = ThetaSampling::gauss_legendre;
};

/// Fields at 1 m (phase reference at the origin) and radiation intensity.
struct FarFieldGrid {
    std::vector<double> theta;        // rad
    std::vector<double> phi;          // rad, uniform in [0, 2 pi)
    std::vector<double> theta_weight;  // integral weight in theta, including sin(theta)
    std::vector<cplx> e_theta;        // [i_theta * n_phi + i_phi]
    std::vector<cplx> e_phi;
    std::vector<double> intensity;    // W/sr
    bool full_sphere = true;

    std::size_t n_theta() const { return theta.size(); }
    std::size_t n_phi() const { return phi.size(); }
    double u(std::size_t it, std::size_t ip) const { return intensity[it * phi.size() + ip]; }
};

/// Sampling points and weights only (intensity left empty).
FarFieldGrid make_grid(const GridSpec& spec);

/// Field radiated by the basis currents of `basis` on `mesh` at frequency f.
/// Image currents are included for an infinite ground; the lower half space is zeroed.
FarFieldGrid radiate(const geometry::SegmentMesh& mesh, const solver::BasisSet& basis,
                     std::span<const cplx> currents, double f, const GridSpec& spec = {});

/// Grid with intensity filled from a callable U(theta, phi) (test and reference patterns).
template <class Fn>
FarFieldGrid tabulate(const GridSpec& spec, Fn&& u) {
    FarFieldGrid g = make_grid(spec);
    g.intensity.resize(g.theta.size() * g.phi.size());
    for (std::size_t i = 0; i < g.theta.size(); ++i)
        for (std::size_t j = 0; j < g.phi.size(); ++j) g.intensity[i * g.phi.size() + j] = u(g.theta[i], g.phi[j]);
    return g;
}

/// Integral of U over the sphere (W).
double radiated_power(const FarFieldGrid& grid);

struct GainSummary {
    std::vector<double> directivity;  // linear, per grid point
    std::vector<double> gain;         // linear, per grid point
    double efficiency = 0.0;
    double max_directivity = 0.0;
    double max_gain = 0.0;
    double theta_at_max = 0.0;
    double phi_at_max = 0.0;

    double max_directivity_dbi() const;
    double max_gain_dbi() const;
    double efficiency_db() const;
};

/// D = 4 pi U / p_rad, eta = p_rad / p_in, G = eta D. Throws when p_rad exceeds
/// p_in by more than 2 % (power-balance violation).
GainSummary directivity_gain(const FarFieldGrid& grid, double p_in, double p_rad);

/// Max/min intensity ratio (dB) along the theta closest to `theta` (azimuth cut).
double azimuth_spread_db(const FarFieldGrid& grid, double theta);

}  // namespace trapant::farfield
