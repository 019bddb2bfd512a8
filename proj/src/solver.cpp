#include "trapant/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <thread>

#include "trapant/errors.hpp"
#include "trapant/quadrature.hpp"

namespace trapant::solver {

using geometry::mirror;
using geometry::Segment;
using geometry::SegmentMesh;
using geometry::Topology;
using geometry::Vec3;

// --- basis functions -----------------------------------------------------------

namespace {

/// Piece of a basis function on `seg` carrying value 1 at `node`; `away`
/// selects current flowing away from the node.
BasisPiece make_piece(const Topology& topo, int seg, int node, bool away) {
    const bool node_is_start = topo.start_node[seg] == node;
    BasisPiece p;
    p.segment = seg;
    p.ramp_up = !node_is_start;
    p.sign = (node_is_start ? 1.0 : -1.0) * (away ? 1.0 : -1.0);
    return p;
}

}  // namespace

BasisSet::BasisSet(const SegmentMesh& mesh) : topo_(Topology::build(mesh)) {
    const int nn = int(topo_.nodes.size());
    node_functions_.resize(nn);
    node_reference_.assign(nn, -1);

    // Ports (feed + loads) fix the reference segment at their node.
    std::vector<int> ports;
    if (mesh.feed_segment >= 0) ports.push_back(mesh.feed_segment);
    for (const auto& [seg, ref] : mesh.loads) ports.push_back(seg);
    for (int seg : ports) {
        if (seg < 0 || seg >= int(mesh.segments.size())) throw ValidationError("port segment index out of range");
        const int node = topo_.start_node[seg];
        if (topo_.grounded[node]) continue;
        if (node_reference_[node] >= 0 && node_reference_[node] != seg)
            throw ValidationError("two ports share junction node " + std::to_string(node));
        node_reference_[node] = seg;
    }

    for (int node = 0; node < nn; ++node) {
        const auto& segs = topo_.node_segments[node];
        if (topo_.grounded[node]) {
            for (int seg : segs) {
                BasisFunction b;
                b.node = node;
                b.pieces[0] = make_piece(topo_, seg, node, true);
                b.count = 1;
                node_functions_[node].push_back(int(functions_.size()));
                functions_.push_back(b);
            }
            continue;
        }
        if (segs.size() < 2) continue;
        int ref = node_reference_[node];
        if (ref < 0) ref = *std::min_element(segs.begin(), segs.end());
        node_reference_[node] = ref;
        for (int seg : segs) {
            if (seg == ref) continue;
            BasisFunction b;
            b.node = node;
            b.pieces[0] = make_piece(topo_, seg, node, false);
            b.pieces[1] = make_piece(topo_, ref, node, true);
            b.count = 2;
            node_functions_[node].push_back(int(functions_.size()));
            functions_.push_back(b);
        }
    }
}

PortIncidence BasisSet::port(int segment) const {
    if (segment < 0 || segment >= int(topo_.start_node.size())) throw ValidationError("port segment out of range");
    const int node = topo_.start_node[segment];
    PortIncidence inc;
    if (topo_.grounded[node]) {
        for (int b : node_functions_[node])
            if (functions_[b].pieces[0].segment == segment) inc.terms.push_back({b, 1.0});
    } else if (node_reference_[node] == segment) {
        for (int b : node_functions_[node]) inc.terms.push_back({b, 1.0});
    }
    if (inc.terms.empty())
        throw ValidationError("no basis function at the start node of segment " + std::to_string(segment));
    return inc;
}

int BasisSet::port_basis(int segment) const {
    const PortIncidence inc = port(segment);
    if (inc.terms.size() != 1) throw ValidationError("port at a junction has several basis functions");
    return inc.terms[0].first;
}

// --- segment pair integrals --------------------------------------------------------

namespace {

/// m[a*2+b] = Li*Lj * integral over t,t' of t^a t'^b G(R) with reduced-kernel R.
using Moments = std::array<cplx, 4>;

struct SegGeom {
    Vec3 a;
    Vec3 d;  // end - start
    double len;
    double radius;
};

SegGeom seg_geom(const Segment& s) { return {s.start, s.end - s.start, s.length(), s.radius}; }
SegGeom mirrored(const Segment& s) {
    return {mirror(s.start), mirror(s.end) - mirror(s.start), s.length(), s.radius};
}

/// Closed-form integral of 1/sqrt(|r - r'|^2 + a^2) over the source segment,
/// unweighted ([0]) and weighted by the source coordinate t' ([1]).
std::array<double, 2> inner_static(const Vec3& r, const SegGeom& s, double a2) {
    const Vec3 u = (1.0 / s.len) * s.d;
    const Vec3 rel = r - s.a;
    const double xi = dot(rel, u);
    const double rho2 = std::max(dot(rel, rel) - xi * xi, 0.0) + a2;
    const double rho = std::sqrt(rho2);
    const double L = s.len;
    const double i0 = std::asinh((L - xi) / rho) + std::asinh(xi / rho);
    const double i1 = std::sqrt((L - xi) * (L - xi) + rho2) - std::sqrt(xi * xi + rho2) + xi * i0;
    return {i0, i1 / L};
}

class PairIntegrator {
public:
    PairIntegrator(double k, int order) : k_(k), rule_(gauss_legendre01(order)) {}

    Moments operator()(const SegGeom& si, const SegGeom& sj) const {
        const double a2 = 0.5 * (si.radius * si.radius + sj.radius * sj.radius);
        const Vec3 ci = si.a + 0.5 * si.d, cj = sj.a + 0.5 * sj.d;
        const bool near = norm(ci - cj) < 1.5 * (si.len + sj.len);
        const std::size_t n = rule_.nodes.size();
        Moments m{};
        for (std::size_t p = 0; p < n; ++p) {
            const double tp = rule_.nodes[p];
            const Vec3 rp = si.a + tp * si.d;
            cplx row0 = 0.0, row1 = 0.0;
            for (std::size_t q = 0; q < n; ++q) {
                const double tq = rule_.nodes[q];
                const Vec3 rq = sj.a + tq * sj.d;
                const Vec3 diff = rp - rq;
                const double R = std::sqrt(dot(diff, diff) + a2);
                const cplx e = std::exp(cplx(0.0, -k_ * R));
                // Near pairs integrate only the regular part numerically.
                const cplx g = near ? (std::abs(k_ * R) < 1e-4 ? cplx(-0.5 * k_ * k_ * R, -k_) : (e - 1.0) / R) : e / R;
                const cplx wg = rule_.weights[q] * g;
                row0 += wg;
                row1 += wg * tq;
            }
            const double wp = rule_.weights[p];
            m[0] += wp * row0;
            m[1] += wp * row1;
            m[2] += wp * tp * row0;
            m[3] += wp * tp * row1;
        }
        for (auto& v : m) v *= si.len * sj.len;
        if (near) m = add_static(m, si, sj, a2);
        return m;
    }


private:
    /// Adds the 1/R contribution with symmetric outer/inner splitting.
    Moments add_static(Moments m, const SegGeom& si, const SegGeom& sj, double a2) const {
        const std::size_t n = rule_.nodes.size();
        double s[4] = {0, 0, 0, 0};
        for (std::size_t p = 0; p < n; ++p) {
            const double t = rule_.nodes[p], w = rule_.weights[p];
            // Outer on i (weight Li), inner on j (closed form, includes Lj).
            const auto on_j = inner_static(si.a + t * si.d, sj, a2);
            s[0] += 0.5 * w * si.len * on_j[0];
            s[1] += 0.5 * w * si.len * on_j[1];
            s[2] += 0.5 * w * si.len * t * on_j[0];
            s[3] += 0.5 * w * si.len * t * on_j[1];
            // Outer on j (weight Lj), inner on i.
            const auto on_i = inner_static(sj.a + t * sj.d, si, a2);
            s[0] += 0.5 * w * sj.len * on_i[0];
            s[1] += 0.5 * w * sj.len * t * on_i[0];
            s[2] += 0.5 * w * sj.len * on_i[1];
            s[3] += 0.5 * w * sj.len * t * on_i[1];
        }
        for (int c = 0; c < 4; ++c) m[c] += s[c];
        return m;
    }

    double k_;
    GaussRule rule_;
};

cplx piece_product(const Moments& m, const BasisPiece& p, const BasisPiece& q) {
    // integral of v_p(t) v_q(t') G with v = t or 1 - t.
    if (p.ramp_up && q.ramp_up) return m[3];
    if (p.ramp_up) return m[2] - m[3];
    if (q.ramp_up) return m[1] - m[3];
    return m[0] - m[1] - m[2] + m[3];
}

double piece_overlap(const BasisPiece& p, const BasisPiece& q) {
    // integral over [0,1] of v_p v_q on a shared segment.
    return p.ramp_up == q.ramp_up ? 1.0 / 3.0 : 1.0 / 6.0;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, unsigned(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

double surface_resistance(double f, double sigma) { return std::sqrt(2.0 * pi * f * mu0 / (2.0 * sigma)); }

}  // namespace

ImpedanceMatrix assemble_impedance_matrix(const SegmentMesh& mesh, const BasisSet& basis, double f,
                                          const SolverOptions& options) {
    if (!(f > 0.0)) throw DomainError("assemble_impedance_matrix: frequency must be positive");
    const auto diag = geometry::validate_mesh(mesh, f);
    if (!diag.ok()) throw ValidationError("mesh rejected by validation:\n" + diag.summary());
    if (options.quadrature_order < 1) throw DomainError("quadrature order must be >= 1");

    const std::size_t ns = mesh.segments.size();
    const bool image = mesh.ground == geometry::GroundModel::infinite_image;
    const double k = wavenumber(f);
    const double omega = 2.0 * pi * f;
    const PairIntegrator integrate(k, options.quadrature_order);

    std::vector<SegGeom> geo(ns), geo_img(ns);
    std::vector<Vec3> dir(ns), dir_img(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        geo[i] = seg_geom(mesh.segments[i]);
        geo_img[i] = mirrored(mesh.segments[i]);
        dir[i] = mesh.segments[i].direction();
        dir_img[i] = mirror(dir[i]);
    }

    // Pair moments for i <= j; (j, i) is the transpose.
    std::vector<Moments> direct(ns * ns), imaged(image ? ns * ns : 0);
    parallel_for(ns, options.threads, [&](std::size_t i) {
        for (std::size_t j = i; j < ns; ++j) {
            direct[i * ns + j] = integrate(geo[i], geo[j]);
            if (image) imaged[i * ns + j] = integrate(geo[i], geo_img[j]);
        }
    });
    auto moments = [&](const std::vector<Moments>& table, std::size_t i, std::size_t j) {
        if (i <= j) return table[i * ns + j];
        const Moments& t = table[j * ns + i];
        return Moments{t[0], t[2], t[1], t[3]};
    };

    const cplx vec_coeff = cplx(0.0, omega * mu0 / (4.0 * pi));
    const cplx scl_coeff = 1.0 / cplx(0.0, omega * eps0 * 4.0 * pi);
    const double r_per_len_coeff = options.conductivity > 0.0 ? surface_resistance(f, options.conductivity) : 0.0;

    const std::size_t nb = basis.size();
    ImpedanceMatrix out;
    out.frequency = f;
    out.z = Eigen::MatrixXcd::Zero(Eigen::Index(nb), Eigen::Index(nb));
    parallel_for(nb, options.threads, [&](std::size_t m) {
        const BasisFunction& bm = basis[m];
        for (std::size_t n = m; n < nb; ++n) {
            const BasisFunction& bn = basis[n];
            cplx acc = 0.0;
            for (int a = 0; a < bm.count; ++a) {
                const BasisPiece& p = bm.pieces[a];
                const std::size_t i = std::size_t(p.segment);
                const double dp = p.divergence(geo[i].len);
                for (int b = 0; b < bn.count; ++b) {
                    const BasisPiece& q = bn.pieces[b];
                    const std::size_t j = std::size_t(q.segment);
                    const double dq = q.divergence(geo[j].len);
                    const Moments md = moments(direct, i, j);
                    acc += vec_coeff * (p.sign * q.sign * dot(dir[i], dir[j])) * piece_product(md, p, q) +
                           scl_coeff * (dp * dq) * md[0];
                    if (image) {
                        // Image current: mirrored geometry, reversed sign.
                        const Moments mi = moments(imaged, i, j);
                        acc += vec_coeff * (-p.sign * q.sign * dot(dir[i], dir_img[j])) * piece_product(mi, p, q) -
                               scl_coeff * (dp * dq) * mi[0];
                    }
                    if (r_per_len_coeff > 0.0 && i == j) {
                        const double r_len = r_per_len_coeff / (2.0 * pi * mesh.segments[i].radius);
                        acc += r_len * geo[i].len * p.sign * q.sign * piece_overlap(p, q);
                    }
                }
            }
            out.z(Eigen::Index(m), Eigen::Index(n)) = acc;
            out.z(Eigen::Index(n), Eigen::Index(m)) = acc;
        }
    });
    return out;
}

// --- loads and drive -----------------------------------------------------------

cplx load_impedance(const geometry::LoadRef& load, double f, const circuit::TrapDeviation& dev) {
    if (const auto* trap = std::get_if<circuit::TrapSpec>(&load))
        return circuit::trap_impedance(circuit::realize(*trap, dev), f);
    return std::get<cplx>(load);
}

ImpedanceMatrix apply_lumped_loads(ImpedanceMatrix matrix, const SegmentMesh& mesh, const BasisSet& basis,
                                   const circuit::TrapDeviation& dev) {
    for (const auto& [seg, load] : mesh.loads) {
        if (seg == mesh.feed_segment) throw ValidationError("load placed on the feed segment");
        const PortIncidence inc = basis.port(seg);
        const cplx zl = load_impedance(load, matrix.frequency, dev);
        for (const auto& [m, sm] : inc.terms)
            for (const auto& [n, sn] : inc.terms) matrix.z(m, n) += zl * (sm * sn);
    }
    return matrix;
}

cplx reflection(cplx z_in, const circuit::ReferenceImpedance& ref) { return (z_in - ref.z0) / (z_in + ref.z0); }

double DriveResult::rl_db() const {
    const double mag = std::abs(s11);
    return mag > 0.0 ? 20.0 * std::log10(mag) : -std::numeric_limits<double>::infinity();
}

namespace {

Eigen::PartialPivLU<Eigen::MatrixXcd> factor(const ImpedanceMatrix& matrix, double& rcond) {
    const Eigen::Index n = matrix.z.rows();
    if (n == 0 || matrix.z.cols() != n) throw NumericalError("impedance matrix is empty or not square");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(matrix.z);
    rcond = lu.rcond();
    if (!(rcond > 1e-12)) {
        std::ostringstream msg;
        msg << "impedance matrix is singular or ill-conditioned at f = " << matrix.frequency
            << " Hz (reciprocal condition estimate " << rcond << ", order " << n << ")";
        throw NumericalError(msg.str());
    }
    return lu;
}

Eigen::VectorXcd incidence_vector(const PortIncidence& port, Eigen::Index n) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    for (const auto& [m, s] : port.terms) v(m) += s;
    return v;
}

}  // namespace

DriveResult solve_drive(const ImpedanceMatrix& matrix, const PortIncidence& feed, cplx v_feed,
                        const circuit::ReferenceImpedance& ref) {
    double rcond = 0.0;
    const auto lu = factor(matrix, rcond);
    const Eigen::Index n = matrix.z.rows();
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    for (const auto& [m, s] : feed.terms) rhs(m) += v_feed * s;
    const Eigen::VectorXcd x = lu.solve(rhs);

    DriveResult r;
    r.f = matrix.frequency;
    r.rcond = rcond;
    r.currents.assign(x.data(), x.data() + n);
    cplx i_feed = 0.0;
    for (const auto& [m, s] : feed.terms) i_feed += s * x(m);
    if (i_feed == cplx(0.0)) throw NumericalError("zero feed current");
    r.z_in = v_feed / i_feed;
    r.s11 = reflection(r.z_in, ref);
    r.p_in = 0.5 * std::real(v_feed * std::conj(i_feed));
    return r;
}

cplx PortReduction::z_in(cplx z_load) const {
    const cplx y = y_ff - z_load * y_ft * y_ft / (1.0 + z_load * y_tt);
    if (y == cplx(0.0)) throw NumericalError("zero feed current");
    return 1.0 / y;
}

PortReduction reduce_ports(const ImpedanceMatrix& bare, const PortIncidence& feed, const PortIncidence& load) {
    double rcond = 0.0;
    const auto lu = factor(bare, rcond);
    const Eigen::Index n = bare.z.rows();
    const Eigen::VectorXcd ef = incidence_vector(feed, n), et = incidence_vector(load, n);
    const Eigen::VectorXcd xf = lu.solve(ef), xt = lu.solve(et);
    PortReduction r;
    r.f = bare.frequency;
    r.y_ff = (ef.transpose() * xf).value();
    r.y_ft = (et.transpose() * xf).value();
    r.y_tt = (et.transpose() * xt).value();
    return r;
}

DriveResult solve_drive(const ImpedanceMatrix& matrix, int feed_basis, cplx v_feed,
                        const circuit::ReferenceImpedance& ref) {
    if (feed_basis < 0 || feed_basis >= int(matrix.order())) throw ValidationError("feed basis out of range");
    PortIncidence inc;
    inc.terms.push_back({feed_basis, 1.0});
    return solve_drive(matrix, inc, v_feed, ref);
}

// --- Solver ----------------------------------------------------------------------

Solver::Solver(SegmentMesh mesh, SolverOptions options)
    : mesh_(std::move(mesh)), options_(options), basis_(mesh_), feed_(basis_.port(mesh_.feed_segment)) {}

ImpedanceMatrix Solver::assemble(double f) const { return assemble_impedance_matrix(mesh_, basis_, f, options_); }

DriveResult Solver::solve_assembled(const ImpedanceMatrix& bare, const circuit::TrapDeviation& dev) const {
    const ImpedanceMatrix loaded = apply_lumped_loads(bare, mesh_, basis_, dev);
    DriveResult r = solve_drive(loaded, feed_, 1.0, options_.reference);

    const double f = bare.frequency;
    for (const auto& [seg, load] : mesh_.loads) {
        const PortIncidence inc = basis_.port(seg);
        cplx i_load = 0.0;
        for (const auto& [m, s] : inc.terms) i_load += s * r.currents[std::size_t(m)];
        r.p_load_loss += 0.5 * std::norm(i_load) * std::real(load_impedance(load, f, dev));
    }
    if (options_.conductivity > 0.0) {
        const double rs = surface_resistance(f, options_.conductivity);
        for (std::size_t m = 0; m < basis_.size(); ++m) {
            for (std::size_t n = 0; n < basis_.size(); ++n) {
                double rmn = 0.0;
                for (int a = 0; a < basis_[m].count; ++a)
                    for (int b = 0; b < basis_[n].count; ++b) {
                        const auto& p = basis_[m].pieces[a];
                        const auto& q = basis_[n].pieces[b];
                        if (p.segment != q.segment) continue;
                        const auto& seg = mesh_.segments[std::size_t(p.segment)];
                        rmn += rs / (2.0 * pi * seg.radius) * seg.length() * p.sign * q.sign * piece_overlap(p, q);
                    }
                if (rmn != 0.0) r.p_conductor_loss += 0.5 * rmn * std::real(std::conj(r.currents[m]) * r.currents[n]);
            }
        }
    }
    return r;
}

PortReduction Solver::reduce(const ImpedanceMatrix& bare) const {
    if (mesh_.loads.size() != 1) throw ValidationError("port reduction needs exactly one load");
    return reduce_ports(bare, feed_, basis_.port(mesh_.loads.begin()->first));
}

cplx Solver::z_in(const PortReduction& ports, const circuit::TrapDeviation& dev) const {
    return ports.z_in(load_impedance(mesh_.loads.begin()->second, ports.f, dev));
}

DriveResult Solver::solve(double f, const circuit::TrapDeviation& dev) const {
    return solve_assembled(assemble(f), dev);
}

std::vector<DriveResult> Solver::sweep(std::span<const double> grid, const circuit::TrapDeviation& dev) const {
    const circuit::TrapDeviation devs[] = {dev};
    return std::move(sweep_many(grid, devs).front());
}

std::vector<std::vector<DriveResult>> Solver::sweep_many(std::span<const double> grid,
                                                         std::span<const circuit::TrapDeviation> devs) const {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("sweep grid must be strictly increasing");
    std::vector<std::vector<DriveResult>> out(devs.size(), std::vector<DriveResult>(grid.size()));
    SolverOptions inner = options_;
    inner.threads = 1;
    std::vector<std::string> errors(grid.size());
    parallel_for(grid.size(), options_.threads, [&](std::size_t k) {
        try {
            const ImpedanceMatrix bare = assemble_impedance_matrix(mesh_, basis_, grid[k], inner);
            for (std::size_t d = 0; d < devs.size(); ++d) out[d][k] = solve_assembled(bare, devs[d]);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (!errors[k].empty()) {
            std::ostringstream msg;
            msg << "sweep failed at " << grid[k] << " Hz: " << errors[k];
            throw NumericalError(msg.str());
        }
    return out;
}

std::vector<PortReduction> Solver::reduce_sweep(std::span<const double> grid) const {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("sweep grid must be strictly increasing");
    if (mesh_.loads.size() != 1) throw ValidationError("port reduction needs exactly one load");
    std::vector<PortReduction> out(grid.size());
    SolverOptions inner = options_;
    inner.threads = 1;
    std::vector<std::string> errors(grid.size());
    parallel_for(grid.size(), options_.threads, [&](std::size_t k) {
        try {
            out[k] = reduce(assemble_impedance_matrix(mesh_, basis_, grid[k], inner));
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    });
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (!errors[k].empty()) {
            std::ostringstream msg;
            msg << "sweep failed at " << grid[k] << " Hz: " << errors[k];
            throw NumericalError(msg.str());
        }
    return out;
}

std::vector<DriveResult> frequency_sweep(const SegmentMesh& mesh, std::span<const double> grid,
                                         const circuit::CornerAssignment& corner, const SolverOptions& options) {
    return Solver(mesh, options).sweep(grid, corner.deviation());
}

// --- post-processing -------------------------------------------------------------

std::vector<Resonance> find_resonances(std::span<const double> f, std::span<const double> rl, double threshold_db) {
    if (f.empty() || f.size() != rl.size()) throw DomainError("find_resonances: empty or mismatched sweep");
    for (std::size_t i = 1; i < f.size(); ++i)
        if (!(f[i] > f[i - 1])) throw DomainError("find_resonances: frequencies must increase");
    std::vector<Resonance> out;
    const std::size_t n = f.size();
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double a = rl[inside], b = rl[outside];
        if (!std::isfinite(a) || b == a) return f[outside];
        const double t = (threshold_db - a) / (b - a);
        return f[inside] + t * (f[outside] - f[inside]);
    };
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(rl[i] <= rl[i - 1] && rl[i] < rl[i + 1])) continue;
        if (!(rl[i] <= threshold_db)) continue;
        Resonance r;
        r.f_dip = f[i];
        r.rl_db = rl[i];
        if (std::isfinite(rl[i - 1]) && std::isfinite(rl[i]) && std::isfinite(rl[i + 1])) {
            // Vertex of the parabola through the three samples (non-uniform spacing).
            const double x0 = f[i - 1] - f[i], x2 = f[i + 1] - f[i];
            const double y0 = rl[i - 1] - rl[i], y2 = rl[i + 1] - rl[i];
            const double den = x0 * x2 * (x0 - x2);
            const double a = (x2 * y0 - x0 * y2) / den;
            const double b = (x0 * x0 * y2 - x2 * x2 * y0) / den;
            if (a > 0.0) {
                const double xv = std::clamp(-b / (2.0 * a), x0, x2);
                r.f_dip = f[i] + xv;
                r.rl_db = rl[i] + a * xv * xv + b * xv;
            }
        }
        std::size_t lo = i, hi = i;
        while (lo > 0 && rl[lo - 1] <= threshold_db) --lo;
        while (hi + 1 < n && rl[hi + 1] <= threshold_db) ++hi;
        r.bw_lo = lo == 0 ? f[0] : crossing(lo, lo - 1);
        r.bw_hi = hi + 1 == n ? f[n - 1] : crossing(hi, hi + 1);
        out.push_back(r);
    }
    return out;
}

std::vector<Resonance> find_resonances(std::span<const DriveResult> sweep, double threshold_db) {
    std::vector<double> f, rl;
    for (const auto& r : sweep) {
        f.push_back(r.f);
        rl.push_back(r.rl_db());
    }
    return find_resonances(f, rl, threshold_db);
}

std::vector<cplx> segment_currents(const BasisSet& basis, const SegmentMesh& mesh, std::span<const cplx> currents) {
    if (currents.size() != basis.size()) throw ValidationError("current vector does not match the basis set");
    std::vector<cplx> out(mesh.segments.size(), 0.0);
    for (std::size_t b = 0; b < basis.size(); ++b)
        for (int a = 0; a < basis[b].count; ++a) {
            const auto& p = basis[b].pieces[a];
            out[std::size_t(p.segment)] += currents[b] * (p.sign * p.value(0.5));
        }
    return out;
}

std::vector<double> current_distribution(const DriveResult& result, const BasisSet& basis, const SegmentMesh& mesh) {
    const auto seg = segment_currents(basis, mesh, result.currents);
    std::vector<double> out(seg.size());
    std::transform(seg.begin(), seg.end(), out.begin(), [](cplx c) { return std::abs(c); });
    return out;
}

std::vector<bool> far_side_of_trap(const SegmentMesh& mesh, const Topology& topo) {
    if (mesh.loads.empty()) throw ValidationError("mesh has no trap load");
    if (mesh.loads.size() != 1) throw ValidationError("trap isolation needs exactly one load");
    const int trap_seg = mesh.loads.begin()->first;
    const int cut = topo.start_node[trap_seg];
    const std::size_t ns = mesh.segments.size();
    std::vector<bool> reached(ns, false);
    std::vector<bool> node_seen(topo.nodes.size(), false);
    std::queue<int> nodes;
    auto visit_segment = [&](int s) {
        if (reached[s]) return;
        reached[s] = true;
        for (int node : {topo.start_node[s], topo.end_node[s]})
            if (node != cut && !node_seen[node]) {
                node_seen[node] = true;
                nodes.push(node);
            }
    };
    visit_segment(mesh.feed_segment);
    while (!nodes.empty()) {
        const int node = nodes.front();
        nodes.pop();
        for (int s : topo.node_segments[node]) visit_segment(s);
    }
    // Segments touching the cut from the feed side are reached through their other node.
    std::vector<bool> far(ns);
    for (std::size_t s = 0; s < ns; ++s) far[s] = !reached[s];
    if (std::none_of(far.begin(), far.end(), [](bool b) { return b; }))
        throw ValidationError("trap does not separate the structure (no far side)");
    return far;
}

double trap_isolation(const DriveResult& result, const Solver& solver) {
    const auto far = far_side_of_trap(solver.mesh(), solver.basis().topology());
    const auto mag = current_distribution(result, solver.basis(), solver.mesh());
    double near_max = 0.0, far_max = 0.0;
    for (std::size_t s = 0; s < mag.size(); ++s) (far[s] ? far_max : near_max) = std::max(far[s] ? far_max : near_max, mag[s]);
    if (!(far_max > 0.0)) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(near_max / far_max);
}

double trap_isolation(const Solver& solver, double f, const circuit::TrapDeviation& dev) {
    far_side_of_trap(solver.mesh(), solver.basis().topology());
    return trap_isolation(solver.solve(f, dev), solver);
}

}  // namespace trapant::solver
