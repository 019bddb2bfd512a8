#pragma once

// Thin-wire segment meshes and the parametric inverted-F antenna builder.

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "trapant/circuit.hpp"

namespace trapant::geometry {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
/// Mirror image in the z = 0 ground plane.
inline Vec3 mirror(Vec3 a) { return {a.x, a.y, -a.z}; }

/// infinite_image: perfect ground plane z = 0 below the antenna (image theory).
/// wire_grid: finite ground of size_x by size_y in the antenna plane, below the z = 0 edge.
enum class GroundModel { free_space, infinite_image, wire_grid };

std::string to_string(GroundModel g);
GroundModel ground_model_from_string(const std::string& s);

struct SubstrateSpec {
    double eps_r = 4.3;
    double loss_tan = 0.025;
    double strip_width = 13.5e-3;
    double board_thickness = 1.6e-3;

    void validate() const;
};

struct GroundSpec {
    double size_x = 100e-3;
    double size_y = 100e-3;
    double thickness = 1.6e-3;
    GroundModel model = GroundModel::infinite_image;
    double grid_wire_radius = 0.5e-3;  // wire-grid mode only
    double grid_pitch = 0.0;           // wire-grid mode; 0 selects wavelength/10 at f_max

    void validate() const;
};

enum class TrapPlacement {
    A,  // trap at the end of the arm, low-band extension continues beyond it
    B,  // trap + extension form a branch part-way along the arm; arm continues to the tip
};

std::string to_string(TrapPlacement p);
TrapPlacement trap_placement_from_string(const std::string& s);

/// Physical dimensions of the printed antenna (metres). The mesh multiplies
/// every coordinate by the mesh length scale.
struct AntennaParams {
    double footprint_length = 59.4e-3;
    double footprint_height = 11e-3;
    double trace_width = 2.7e-3;
    double feed_width = 0.65e-3;
    double conductor_thickness = 0.035e-3;  // recorded only
    double short_pin_offset = 4e-3;         // feed distance from the short pin
    double trap_position_fraction = 0.95;   // along the radiating arm
    double extension_length = 6e-3;         // low-band section beyond the trap
    double branch_drop = 4e-3;              // config B: vertical drop of the branch below the arm
    TrapPlacement config = TrapPlacement::B;
    /// Geometric elongation applied to all coordinates; 0 selects the
    /// substrate default (1 / effective_permittivity_scale).
    double length_scale = 0.0;

    void validate() const;
};

using LoadRef = std::variant<circuit::TrapSpec, cplx>;

struct Segment {
    Vec3 start;
    Vec3 end;
    double radius = 0.0;

    double length() const { return norm(end - start); }
    Vec3 direction() const { return (1.0 / length()) * (end - start); }
    Vec3 midpoint() const { return 0.5 * (start + end); }
};

/// Feed and loads sit at the start node of the referenced segment.
struct SegmentMesh {
    std::vector<Segment> segments;
    int feed_segment = -1;
    std::map<int, LoadRef> loads;
    GroundModel ground = GroundModel::free_space;
    double length_scale = 1.0;

    double total_length() const;
};

/// Shared-endpoint connectivity of a mesh.
struct Topology {
    std::vector<Vec3> nodes;
    std::vector<int> start_node;  // per segment
    std::vector<int> end_node;    // per segment
    std::vector<std::vector<int>> node_segments;
    std::vector<bool> grounded;  // node lies on an image ground plane

    static Topology build(const SegmentMesh& mesh);
    int degree(int node) const { return int(node_segments[node].size()); }
};

/// Velocity factor 1/sqrt((eps_r + 1)/2) of a trace on the substrate.
double effective_permittivity_scale(const SubstrateSpec& substrate);

/// Inverted-F antenna over ground with the trap attached per `params.config`.
/// `trap` is stored as the load reference. Segment length is at most
/// max_seg_fraction * wavelength(f_max) in mesh coordinates.
SegmentMesh build_ifa_mesh(const AntennaParams& params, const SubstrateSpec& substrate, const GroundSpec& ground,
                           const circuit::TrapSpec& trap, double max_seg_fraction = 1.0 / 20.0,
                           double f_max = 1.0e9);

/// Centre-fed straight dipole along z in free space with `n_segments` equal segments (even).
SegmentMesh build_dipole(double length, double radius, int n_segments);

/// Base-fed monopole over an image ground plane.
SegmentMesh build_monopole(double height, double radius, int n_segments);

struct MeshCheck {
    MeshCheck(std::string n = {}) : name(std::move(n)) {}

    std::string name;
    bool passed = true;
    std::vector<int> offending;
    std::string detail;
};

struct MeshDiagnostics {
    std::vector<MeshCheck> checks;

    bool ok() const;
    const MeshCheck* find(const std::string& name) const;
    std::string summary() const;
};

/// Checks: segment_length, radius_ratio, electrical_length, connectivity,
/// overlap, proximity, below_ground, feed_index, load_index.
MeshDiagnostics validate_mesh(const SegmentMesh& mesh, double f_max);

}  // namespace trapant::geometry
