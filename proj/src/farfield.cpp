#include "trapant/farfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trapant/errors.hpp"
#include "trapant/quadrature.hpp"

namespace trapant::farfield {

using geometry::Vec3;

FarFieldGrid make_grid(const GridSpec& spec) {
    if (spec.n_phi < 1) throw DomainError("need at least one phi sample");
    FarFieldGrid g;
    if (spec.sampling == ThetaSampling::gauss_legendre) {
        if (spec.n_theta < 2) throw DomainError("Gauss-Legendre theta sampling needs >= 2 samples");
        const int upper = (spec.n_theta + 1) / 2, lower = spec.n_theta / 2;
        // cos(theta) in (0, 1] for the upper panel, [-1, 0) for the lower one.
        const GaussRule up = gauss_legendre01(upper);
        for (int i = upper - 1; i >= 0; --i) {
            g.theta.push_back(std::acos(up.nodes[std::size_t(i)]));
            g.theta_weight.push_back(up.weights[std::size_t(i)]);
        }
        const GaussRule lo = gauss_legendre01(lower);
        for (int i = lower - 1; i >= 0; --i) {
            g.theta.push_back(std::acos(lo.nodes[std::size_t(i)] - 1.0));
            g.theta_weight.push_back(lo.weights[std::size_t(i)]);
        }
    } else {
        if (spec.n_theta < 3) throw DomainError("uniform theta sampling needs >= 3 samples");
        const double dt = pi / (spec.n_theta - 1);
        for (int i = 0; i < spec.n_theta; ++i) {
            const double t = i + 1 == spec.n_theta ? pi : i * dt;
            const double end = (i == 0 || i + 1 == spec.n_theta) ? 0.5 : 1.0;
            g.theta.push_back(t);
            g.theta_weight.push_back(end * dt * std::sin(t));
        }
    }
    for (int j = 0; j < spec.n_phi; ++j) g.phi.push_back(2.0 * pi * j / spec.n_phi);
    return g;
}

namespace {

/// Integrals over t in [0, 1] of e^{j a t} (first) and t e^{j a t} (second).
std::pair<cplx, cplx> phase_moments(double a) {
    if (std::abs(a) < 1e-3) {
        const double a2 = a * a;
        return {cplx(1.0 - a2 / 6.0, a / 2.0 - a * a2 / 24.0), cplx(0.5 - a2 / 8.0, a / 3.0 - a * a2 / 30.0)};
    }
    const cplx e = std::exp(cplx(0.0, a));
    const cplx ja(0.0, a);
    return {(e - 1.0) / ja, e / ja + (e - 1.0) / (a * a)};
}

}  // namespace

FarFieldGrid radiate(const geometry::SegmentMesh& mesh, const solver::BasisSet& basis,
                     std::span<const cplx> currents, double f, const GridSpec& spec) {
    if (currents.size() != basis.size()) throw ValidationError("current vector does not match the basis set");
    if (!(f > 0.0)) throw DomainError("radiate: frequency must be positive");
    const bool image = mesh.ground == geometry::GroundModel::infinite_image;
    const double k = wavenumber(f);

    struct Piece {
        Vec3 start, d, dir;
        cplx amp;
        bool ramp_up;
    };
    std::vector<Piece> pieces;
    for (std::size_t b = 0; b < basis.size(); ++b) {
        for (int a = 0; a < basis[b].count; ++a) {
            const auto& p = basis[b].pieces[a];
            const auto& seg = mesh.segments[std::size_t(p.segment)];
            const double len = seg.length();
            pieces.push_back({seg.start, seg.end - seg.start, seg.direction(), currents[b] * (p.sign * len), p.ramp_up});
            if (image)
                pieces.push_back({geometry::mirror(seg.start), geometry::mirror(seg.end) - geometry::mirror(seg.start),
                                  geometry::mirror(seg.direction()), currents[b] * (-p.sign * len), p.ramp_up});
        }
    }

    FarFieldGrid g = make_grid(spec);
    const std::size_t nt = g.theta.size(), np = g.phi.size();
    g.e_theta.assign(nt * np, 0.0);
    g.e_phi.assign(nt * np, 0.0);
    g.intensity.assign(nt * np, 0.0);
    const cplx coeff(0.0, -2.0 * pi * f * mu0 / (4.0 * pi));
    for (std::size_t it = 0; it < nt; ++it) {
        const double th = g.theta[it];
        if (image && th > pi / 2.0) continue;
        const double st = std::sin(th), ct = std::cos(th);
        for (std::size_t ip = 0; ip < np; ++ip) {
            const double ph = g.phi[ip];
            const double sp = std::sin(ph), cp = std::cos(ph);
            const Vec3 rhat{st * cp, st * sp, ct};
            cplx nx = 0.0, ny = 0.0, nz = 0.0;
            for (const auto& pc : pieces) {
                const auto [m0, m1] = phase_moments(k * dot(rhat, pc.d));
                const cplx shape = pc.ramp_up ? m1 : m0 - m1;
                const cplx w = pc.amp * shape * std::exp(cplx(0.0, k * dot(rhat, pc.start)));
                nx += w * pc.dir.x;
                ny += w * pc.dir.y;
                nz += w * pc.dir.z;
            }
            const cplx n_theta = nx * (ct * cp) + ny * (ct * sp) - nz * st;
            const cplx n_phi = -nx * sp + ny * cp;
            const std::size_t idx = it * np + ip;
            g.e_theta[idx] = coeff * n_theta;
            g.e_phi[idx] = coeff * n_phi;
            g.intensity[idx] = (std::norm(g.e_theta[idx]) + std::norm(g.e_phi[idx])) / (2.0 * eta0);
        }
    }
    return g;
}

double radiated_power(const FarFieldGrid& grid) {
    if (!grid.full_sphere) throw DomainError("radiated_power needs a full-sphere grid");
    const std::size_t nt = grid.theta.size(), np = grid.phi.size();
    if (nt == 0 || np == 0 || grid.intensity.size() != nt * np || grid.theta_weight.size() != nt)
        throw DomainError("radiated_power: incomplete grid");
    const double wphi = 2.0 * pi / double(np);
    double sum = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
        double row = 0.0;
        for (std::size_t ip = 0; ip < np; ++ip) row += grid.intensity[it * np + ip];
        sum += grid.theta_weight[it] * row;
    }
    return sum * wphi;
}

double GainSummary::max_directivity_dbi() const { return 10.0 * std::log10(max_directivity); }
double GainSummary::max_gain_dbi() const { return 10.0 * std::log10(max_gain); }
double GainSummary::efficiency_db() const { return 10.0 * std::log10(efficiency); }

GainSummary directivity_gain(const FarFieldGrid& grid, double p_in, double p_rad) {
    if (!(p_rad > 0.0)) throw DomainError("directivity_gain: radiated power must be positive");
    if (!(p_in > 0.0)) throw DomainError("directivity_gain: input power must be positive");
    if (p_rad > p_in * 1.02)
        throw NumericalError("power balance violated: radiated power exceeds input power by more than 2 %");
    GainSummary s;
    s.efficiency = p_rad / p_in;
    const std::size_t np = grid.phi.size();
    s.directivity.resize(grid.intensity.size());
    s.gain.resize(grid.intensity.size());
    for (std::size_t i = 0; i < grid.intensity.size(); ++i) {
        s.directivity[i] = 4.0 * pi * grid.intensity[i] / p_rad;
        s.gain[i] = s.efficiency * s.directivity[i];
        if (s.directivity[i] > s.max_directivity) {
            s.max_directivity = s.directivity[i];
            s.theta_at_max = grid.theta[i / np];
            s.phi_at_max = grid.phi[i % np];
        }
    }
    s.max_gain = s.efficiency * s.max_directivity;
    return s;
}

double azimuth_spread_db(const FarFieldGrid& grid, double theta) {
    if (grid.theta.empty()) throw DomainError("empty grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.theta.size(); ++i)
        if (std::abs(grid.theta[i] - theta) < std::abs(grid.theta[best] - theta)) best = i;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t j = 0; j < grid.phi.size(); ++j) {
        lo = std::min(lo, grid.u(best, j));
        hi = std::max(hi, grid.u(best, j));
    }
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(hi / lo);
}

}  // namespace trapant::farfield
