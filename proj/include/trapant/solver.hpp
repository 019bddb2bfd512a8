#pragma once

// Thin-wire method-of-moments solver: mixed-potential EFIE with the reduced
// kernel, overlapping triangle basis functions and Galerkin testing.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trapant/circuit.hpp"
#include "trapant/geometry.hpp"

namespace trapant::solver {

struct SolverOptions {
    int quadrature_order = 8;
    /// Conductor conductivity in S/m; 0 models perfect conductors.
    double conductivity = 0.0;
    unsigned threads = 1;
    circuit::ReferenceImpedance reference{};
};

/// Half of a triangle: value 1 at one end of `segment`, 0 at the other.
struct BasisPiece {
    int segment = -1;
    bool ramp_up = false;  // value rises from segment start (0) to end (1)
    double sign = 1.0;     // current direction relative to the segment direction

    /// Divergence of the piece along the wire (1/m).
    double divergence(double seg_length) const { return sign * (ramp_up ? 1.0 : -1.0) / seg_length; }
    /// Piece value at local coordinate t in [0, 1].
    double value(double t) const { return ramp_up ? t : 1.0 - t; }
};

struct BasisFunction {
    std::array<BasisPiece, 2> pieces{};
    int count = 0;  // 1 for a grounded half-triangle (completed by its image)
    int node = -1;
};

/// Basis coefficient and sign whose signed sum is the current leaving the
/// start node of a port segment along that segment.
struct PortIncidence {
    std::vector<std::pair<int, double>> terms;
};

class BasisSet {
public:
    explicit BasisSet(const geometry::SegmentMesh& mesh);

    std::size_t size() const { return functions_.size(); }
    const BasisFunction& operator[](std::size_t i) const { return functions_[i]; }
    std::span<const BasisFunction> functions() const { return functions_; }
    const geometry::Topology& topology() const { return topo_; }
    /// Throws ValidationError if no port can be placed at the segment's start node.
    PortIncidence port(int segment) const;
    /// Single basis index for a port at a degree-2 node or ground contact.
    int port_basis(int segment) const;

private:
    geometry::Topology topo_;
    std::vector<BasisFunction> functions_;
    std::vector<std::vector<int>> node_functions_;
    std::vector<int> node_reference_;  // reference segment at each interior node
};

struct ImpedanceMatrix {
    double frequency = 0.0;
    Eigen::MatrixXcd z;

    std::size_t order() const { return std::size_t(z.rows()); }
};

struct DriveResult {
    double f = 0.0;
    cplx z_in;
    cplx s11;
    std::vector<cplx> currents;  // per basis function
    double p_in = 0.0;
    double p_load_loss = 0.0;
    double p_conductor_loss = 0.0;
    double rcond = 0.0;

    double rl_db() const;  // 20 log10 |s11|
};

/// Overlapping-triangle Galerkin impedance matrix (without lumped loads).
ImpedanceMatrix assemble_impedance_matrix(const geometry::SegmentMesh& mesh, const BasisSet& basis, double f,
                                          const SolverOptions& options = {});

/// Adds every mesh load, evaluated at `dev` for trap loads, to the matrix.
ImpedanceMatrix apply_lumped_loads(ImpedanceMatrix matrix, const geometry::SegmentMesh& mesh, const BasisSet& basis,
                                   const circuit::TrapDeviation& dev = {});

/// Load impedance of one mesh load at frequency f.
cplx load_impedance(const geometry::LoadRef& load, double f, const circuit::TrapDeviation& dev = {});

/// Delta-gap excitation of a single basis function.
DriveResult solve_drive(const ImpedanceMatrix& matrix, int feed_basis, cplx v_feed = 1.0,
                        const circuit::ReferenceImpedance& ref = {});

/// Delta-gap excitation through a port incidence (junction-capable).
DriveResult solve_drive(const ImpedanceMatrix& matrix, const PortIncidence& feed, cplx v_feed = 1.0,
                        const circuit::ReferenceImpedance& ref = {});

/// Feed and load port admittances of an unloaded structure at one frequency
/// (port currents = Y * port voltages). A series load z on the second port
/// then gives z_in without refactoring the matrix.
struct PortReduction {
    double f = 0.0;
    cplx y_ff, y_ft, y_tt;

    cplx z_in(cplx z_load) const;
};

PortReduction reduce_ports(const ImpedanceMatrix& bare, const PortIncidence& feed, const PortIncidence& load);

/// Reflection coefficient of z_in against the reference impedance.
cplx reflection(cplx z_in, const circuit::ReferenceImpedance& ref = {});

/// Mesh-bound driver: assembles, loads, solves and accounts losses.
class Solver {
public:
    explicit Solver(geometry::SegmentMesh mesh, SolverOptions options = {});

    const geometry::SegmentMesh& mesh() const { return mesh_; }
    const BasisSet& basis() const { return basis_; }
    const SolverOptions& options() const { return options_; }

    ImpedanceMatrix assemble(double f) const;
    DriveResult solve(double f, const circuit::TrapDeviation& dev = {}) const;
    /// Solves an already-assembled (unloaded) matrix with the mesh loads at `dev`.
    DriveResult solve_assembled(const ImpedanceMatrix& bare, const circuit::TrapDeviation& dev) const;

    /// Two-port reduction of the bare matrix at the mesh's single load.
    PortReduction reduce(const ImpedanceMatrix& bare) const;
    /// Input impedance with the mesh load evaluated at `dev`.
    cplx z_in(const PortReduction& ports, const circuit::TrapDeviation& dev) const;

    /// reduce() at every grid frequency (parallel over frequencies).
    std::vector<PortReduction> reduce_sweep(std::span<const double> grid) const;

    /// One result per grid frequency.
    std::vector<DriveResult> sweep(std::span<const double> grid, const circuit::TrapDeviation& dev = {}) const;
    /// Results[d][k] for deviation d at grid point k; each frequency is assembled once.
    std::vector<std::vector<DriveResult>> sweep_many(std::span<const double> grid,
                                                     std::span<const circuit::TrapDeviation> devs) const;

private:
    geometry::SegmentMesh mesh_;
    SolverOptions options_;
    BasisSet basis_;
    PortIncidence feed_;
};

std::vector<DriveResult> frequency_sweep(const geometry::SegmentMesh& mesh, std::span<const double> grid,
                                         const circuit::CornerAssignment& corner = {},
                                         const SolverOptions& options = {});

struct Resonance {
    double f_dip = 0.0;
    double rl_db = 0.0;
    double bw_lo = 0.0;
    double bw_hi = 0.0;

    double bandwidth() const { return bw_hi - bw_lo; }
};

/// Local minima of |S11| in dB at or below threshold_db, refined by a
/// parabola through the three samples around each minimum.
std::vector<Resonance> find_resonances(std::span<const double> freqs, std::span<const double> rl_db,
                                       double threshold_db);
std::vector<Resonance> find_resonances(std::span<const DriveResult> sweep, double threshold_db);

/// Signed current (A) at each segment midpoint along the segment direction.
std::vector<cplx> segment_currents(const BasisSet& basis, const geometry::SegmentMesh& mesh,
                                   std::span<const cplx> currents);

/// |I| at each segment midpoint.
std::vector<double> current_distribution(const DriveResult& result, const BasisSet& basis,
                                         const geometry::SegmentMesh& mesh);

/// Segments on the far side of the single trap load (not reachable from the
/// feed without crossing the trap node).
std::vector<bool> far_side_of_trap(const geometry::SegmentMesh& mesh, const geometry::Topology& topo);

/// 20 log10(max |I| feed side / max |I| far side) with the trap at `dev`.
double trap_isolation(const Solver& solver, double f, const circuit::TrapDeviation& dev = {});
double trap_isolation(const DriveResult& result, const Solver& solver);

}  // namespace trapant::solver
