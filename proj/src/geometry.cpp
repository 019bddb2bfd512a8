#include "trapant/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "trapant/errors.hpp"

namespace trapant::geometry {

namespace {

constexpr double kNodeTol = 1e-9;  // m

}  // namespace

std::string to_string(GroundModel g) {
    switch (g) {
        case GroundModel::free_space: return "free-space";
        case GroundModel::infinite_image: return "infinite-image";
        case GroundModel::wire_grid: return "wire-grid";
    }
    return "?";
}

GroundModel ground_model_from_string(const std::string& s) {
    if (s == "free-space") return GroundModel::free_space;
    if (s == "infinite-image") return GroundModel::infinite_image;
    if (s == "wire-grid") return GroundModel::wire_grid;
    throw ValidationError("unknown ground model '" + s + "'");
}

std::string to_string(TrapPlacement p) { return p == TrapPlacement::A ? "A" : "B"; }

TrapPlacement trap_placement_from_string(const std::string& s) {
    if (s == "A" || s == "a") return TrapPlacement::A;
    if (s == "B" || s == "b") return TrapPlacement::B;
    throw ValidationError("unknown configuration '" + s + "' (expected A or B)");
}

void SubstrateSpec::validate() const {
    if (!(eps_r >= 1.0)) throw ValidationError("substrate eps_r must be >= 1");
    if (!(loss_tan >= 0.0)) throw ValidationError("substrate loss tangent must be >= 0");
    if (!(strip_width > 0.0) || !(board_thickness > 0.0))
        throw ValidationError("substrate dimensions must be positive");
}

void GroundSpec::validate() const {
    if (!(size_x > 0.0) || !(size_y > 0.0) || !(thickness > 0.0) || !(grid_wire_radius > 0.0))
        throw ValidationError("ground dimensions must be positive");
}

void AntennaParams::validate() const {
    const std::pair<const char*, double> lengths[] = {
        {"footprint_length", footprint_length}, {"footprint_height", footprint_height},
        {"trace_width", trace_width},           {"feed_width", feed_width},
        {"conductor_thickness", conductor_thickness}, {"short_pin_offset", short_pin_offset},
        {"extension_length", extension_length}, {"branch_drop", branch_drop},
    };
    for (const auto& [name, v] : lengths)
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
    if (!(trap_position_fraction > 0.0 && trap_position_fraction < 1.0))
        throw ValidationError("trap_position_fraction must lie strictly inside (0, 1)");
    if (!(length_scale >= 0.0)) throw ValidationError("length_scale must be >= 0 (0 selects the default)");
    const double trap_x = trap_position_fraction * footprint_length;
    if (!(trap_x > short_pin_offset)) throw ValidationError("trap must sit beyond the feed point");
    if (config == TrapPlacement::B && !(extension_length > branch_drop))
        throw ValidationError("config B extension_length must exceed branch_drop");
    if (config == TrapPlacement::B && !(branch_drop < footprint_height))
        throw ValidationError("config B branch_drop must be smaller than footprint_height");
}

double SegmentMesh::total_length() const {
    double sum = 0.0;
    for (const auto& s : segments) sum += s.length();
    return sum;
}

Topology Topology::build(const SegmentMesh& mesh) {
    Topology t;
    auto node_of = [&](const Vec3& p) {
        for (std::size_t i = 0; i < t.nodes.size(); ++i)
            if (norm(t.nodes[i] - p) <= kNodeTol) return int(i);
        t.nodes.push_back(p);
        t.node_segments.emplace_back();
        return int(t.nodes.size() - 1);
    };
    for (std::size_t i = 0; i < mesh.segments.size(); ++i) {
        const int a = node_of(mesh.segments[i].start);
        const int b = node_of(mesh.segments[i].end);
        t.start_node.push_back(a);
        t.end_node.push_back(b);
        t.node_segments[a].push_back(int(i));
        if (b != a) t.node_segments[b].push_back(int(i));
    }
    t.grounded.resize(t.nodes.size(), false);
    if (mesh.ground == GroundModel::infinite_image)
        for (std::size_t i = 0; i < t.nodes.size(); ++i) t.grounded[i] = std::abs(t.nodes[i].z) <= kNodeTol;
    return t;
}

double effective_permittivity_scale(const SubstrateSpec& substrate) {
    if (!(substrate.eps_r >= 1.0)) throw DomainError("eps_r must be >= 1");
    return 1.0 / std::sqrt((substrate.eps_r + 1.0) / 2.0);
}

namespace {

class MeshBuilder {
public:
    explicit MeshBuilder(double seg_max) : seg_max_(seg_max) {}

    /// Splits a straight run into the smallest power-of-two count of equal
    /// segments no longer than seg_max. Returns the first segment index.
    int run(Vec3 a, Vec3 b, double radius) {
        const double len = norm(b - a);
        int n = 1;
        while (len / n > seg_max_) n *= 2;
        const int first = int(mesh.segments.size());
        for (int i = 0; i < n; ++i) {
            const Vec3 p = i == 0 ? a : a + (double(i) / n) * (b - a);
            const Vec3 q = i + 1 == n ? b : a + (double(i + 1) / n) * (b - a);
            mesh.segments.push_back({p, q, radius});
        }
        return first;
    }

    SegmentMesh mesh;

private:
    double seg_max_;
};

/// Ground plane as a wire grid in the antenna plane (y = 0), occupying
/// z in [-size_y, 0]. The z = 0 edge carries the short pin and feed contacts.
void add_wire_grid(MeshBuilder& b, const GroundSpec& ground, double scale, double x_center,
                   const std::vector<double>& contact_x, double f_max) {
    const double max_pitch = ground.grid_pitch > 0.0 ? ground.grid_pitch * scale : wavelength(f_max) / 10.0;
    const double sx = ground.size_x * scale, sz = ground.size_y * scale;
    const int nx = std::max(1, int(std::ceil(sx / max_pitch - 1e-9)));
    const int nz = std::max(1, int(std::ceil(sz / max_pitch - 1e-9)));
    const double x0 = x_center - sx / 2.0;
    std::vector<double> xs, zs;
    for (int i = 0; i <= nx; ++i) {
        double x = x0 + sx * i / nx;
        // Grid lines close to a contact move onto it so the edge has no stub segments.
        for (double c : contact_x)
            if (std::abs(x - c) < 0.25 * sx / nx) x = c;
        xs.push_back(x);
    }
    for (int j = 0; j <= nz; ++j) zs.push_back(-sz * j / nz);
    const double r = ground.grid_wire_radius;

    for (int j = 0; j <= nz; ++j) {
        std::vector<double> stops = xs;
        if (j == 0) stops.insert(stops.end(), contact_x.begin(), contact_x.end());
        std::sort(stops.begin(), stops.end());
        stops.erase(std::unique(stops.begin(), stops.end(), [](double p, double q) { return std::abs(p - q) < kNodeTol; }),
                    stops.end());
        for (std::size_t k = 0; k + 1 < stops.size(); ++k)
            b.run({stops[k], 0.0, zs[j]}, {stops[k + 1], 0.0, zs[j]}, r);
    }
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j < nz; ++j) b.run({xs[i], 0.0, zs[j]}, {xs[i], 0.0, zs[j + 1]}, r);
}

}  // namespace

SegmentMesh build_ifa_mesh(const AntennaParams& params, const SubstrateSpec& substrate, const GroundSpec& ground,
                           const circuit::TrapSpec& trap, double max_seg_fraction, double f_max) {
    params.validate();
    substrate.validate();
    ground.validate();
    trap.validate();
    if (!(max_seg_fraction > 0.0 && max_seg_fraction <= 0.1))
        throw ValidationError("max_seg_fraction must lie in (0, 1/10]");
    if (!(f_max > 0.0)) throw DomainError("f_max must be positive");

    const double scale =
        params.length_scale > 0.0 ? params.length_scale : 1.0 / effective_permittivity_scale(substrate);
    MeshBuilder b(max_seg_fraction * wavelength(f_max));
    b.mesh.length_scale = scale;
    b.mesh.ground = ground.model;

    const double h = params.footprint_height * scale;
    const double arm = params.footprint_length * scale;
    const double feed_x = params.short_pin_offset * scale;
    const double trap_x = params.trap_position_fraction * arm;
    const double ext = params.extension_length * scale;
    const double r_arm = params.trace_width / 4.0;
    const double r_feed = params.feed_width / 4.0;

    b.mesh.feed_segment = b.run({feed_x, 0, 0}, {feed_x, 0, h}, r_feed);
    b.run({0, 0, 0}, {0, 0, h}, r_arm);
    b.run({0, 0, h}, {feed_x, 0, h}, r_arm);
    b.run({feed_x, 0, h}, {trap_x, 0, h}, r_arm);

    int trap_segment = -1;
    if (params.config == TrapPlacement::A) {
        trap_segment = b.run({trap_x, 0, h}, {trap_x + ext, 0, h}, r_arm);
    } else {
        b.run({trap_x, 0, h}, {arm, 0, h}, r_arm);
        const double drop = params.branch_drop * scale;
        b.run({trap_x, 0, h}, {trap_x, 0, h - drop / 2.0}, r_arm);
        trap_segment = b.run({trap_x, 0, h - drop / 2.0}, {trap_x, 0, h - drop}, r_arm);
        b.run({trap_x, 0, h - drop}, {trap_x + (ext - drop), 0, h - drop}, r_arm);
    }
    b.mesh.loads.emplace(trap_segment, trap);

    if (ground.model == GroundModel::wire_grid)
        add_wire_grid(b, ground, scale, arm / 2.0, {0.0, feed_x}, f_max);

    const MeshDiagnostics diag = validate_mesh(b.mesh, f_max);
    if (!diag.ok()) throw ValidationError("IFA mesh failed validation:\n" + diag.summary());
    return std::move(b.mesh);
}

SegmentMesh build_dipole(double length, double radius, int n_segments) {
    if (!(length > 0.0) || !(radius > 0.0)) throw DomainError("dipole dimensions must be positive");
    if (n_segments < 2 || n_segments % 2) throw DomainError("dipole needs an even segment count >= 2");
    SegmentMesh m;
    for (int i = 0; i < n_segments; ++i) {
        const double z0 = -length / 2.0 + length * i / n_segments;
        const double z1 = i + 1 == n_segments ? length / 2.0 : -length / 2.0 + length * (i + 1) / n_segments;
        m.segments.push_back({{0, 0, z0}, {0, 0, z1}, radius});
    }
    m.feed_segment = n_segments / 2;
    return m;
}

SegmentMesh build_monopole(double height, double radius, int n_segments) {
    if (!(height > 0.0) || !(radius > 0.0) || n_segments < 1) throw DomainError("invalid monopole");
    SegmentMesh m;
    m.ground = GroundModel::infinite_image;
    for (int i = 0; i < n_segments; ++i)
        m.segments.push_back({{0, 0, height * i / n_segments}, {0, 0, height * (i + 1) / n_segments}, radius});
    m.feed_segment = 0;
    return m;
}

// --- validation --------------------------------------------------------------

bool MeshDiagnostics::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const MeshCheck& c) { return c.passed; });
}

const MeshCheck* MeshDiagnostics::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string MeshDiagnostics::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.passed ? "  pass  " : "  FAIL  ") << c.name;
        if (!c.passed) {
            if (!c.detail.empty()) os << ": " << c.detail;
            if (!c.offending.empty()) {
                os << " [segments";
                for (std::size_t i = 0; i < c.offending.size() && i < 20; ++i) os << ' ' << c.offending[i];
                if (c.offending.size() > 20) os << " ...";
                os << ']';
            }
        }
        os << '\n';
    }
    return os.str();
}

namespace {

/// Closest distance between two segments.
double segment_distance(const Segment& s, const Segment& t) {
    const Vec3 d1 = s.end - s.start, d2 = t.end - t.start, r = s.start - t.start;
    const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
    const double c = dot(d1, r), bb = dot(d1, d2);
    const double denom = a * e - bb * bb;
    double u = denom > 1e-20 * a * e ? std::clamp((bb * f - c * e) / denom, 0.0, 1.0) : 0.0;
    double v = (bb * u + f) / e;
    if (v < 0.0) {
        v = 0.0;
        u = std::clamp(-c / a, 0.0, 1.0);
    } else if (v > 1.0) {
        v = 1.0;
        u = std::clamp((bb - c) / a, 0.0, 1.0);
    }
    return norm((s.start + u * d1) - (t.start + v * d2));
}

bool collinear_overlap(const Segment& s, const Segment& t) {
    const Vec3 u = s.direction();
    const double ls = s.length();
    const double tol = 1e-9 * std::max(ls, t.length());
    for (const Vec3& p : {t.start, t.end}) {
        const Vec3 rel = p - s.start;
        if (norm(cross(u, rel)) > tol) return false;
    }
    double a = dot(t.start - s.start, u), b = dot(t.end - s.start, u);
    if (a > b) std::swap(a, b);
    return std::min(b, ls) - std::max(a, 0.0) > tol;
}

}  // namespace

MeshDiagnostics validate_mesh(const SegmentMesh& mesh, double f_max) {
    MeshDiagnostics diag;
    const int n = int(mesh.segments.size());
    MeshCheck seg_len{"segment_length"}, radius{"radius_ratio"}, elec{"electrical_length"};
    const double lam = f_max > 0.0 ? wavelength(f_max) : 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& s = mesh.segments[i];
        const double len = s.length();
        if (!(len > 0.0) || !std::isfinite(len)) seg_len.offending.push_back(i);
        if (!(s.radius > 0.0) || !(len > 2.5 * s.radius)) radius.offending.push_back(i);
        if (!(len <= lam / 10.0)) elec.offending.push_back(i);
    }
    if (n == 0) seg_len.detail = "mesh has no segments";
    seg_len.passed = n > 0 && seg_len.offending.empty();
    radius.passed = radius.offending.empty();
    if (!radius.passed) radius.detail = "segment length must exceed 2.5 x radius";
    elec.passed = elec.offending.empty();
    if (!elec.passed) elec.detail = "segment longer than wavelength/10 at f_max";

    const Topology topo = Topology::build(mesh);

    // Connectivity, with an image ground acting as one extra node.
    MeshCheck conn{"connectivity"};
    if (n > 0) {
        const int nn = int(topo.nodes.size());
        std::vector<int> parent(nn + 1);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (int i = 0; i < n; ++i) parent[find(topo.start_node[i])] = find(topo.end_node[i]);
        for (int k = 0; k < nn; ++k)
            if (topo.grounded[k]) parent[find(k)] = find(nn);
        const int root = find(topo.start_node[0]);
        for (int i = 0; i < n; ++i)
            if (find(topo.start_node[i]) != root) conn.offending.push_back(i);
        conn.passed = conn.offending.empty();
        if (!conn.passed) conn.detail = "segments not connected to segment 0";
    }

    MeshCheck overlap{"overlap"}, prox{"proximity"};
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto& s = mesh.segments[i];
            const auto& t = mesh.segments[j];
            if (!(s.length() > 0.0) || !(t.length() > 0.0)) continue;
            if (collinear_overlap(s, t)) {
                overlap.offending.push_back(i);
                overlap.offending.push_back(j);
                continue;
            }
            const bool adjacent = topo.start_node[i] == topo.start_node[j] || topo.start_node[i] == topo.end_node[j] ||
                                  topo.end_node[i] == topo.start_node[j] || topo.end_node[i] == topo.end_node[j];
            if (!adjacent && segment_distance(s, t) < s.radius + t.radius) {
                prox.offending.push_back(i);
                prox.offending.push_back(j);
            }
        }
    }
    overlap.passed = overlap.offending.empty();
    if (!overlap.passed) overlap.detail = "coincident or overlapping segments";
    prox.passed = prox.offending.empty();
    if (!prox.passed) prox.detail = "non-adjacent segments closer than the sum of their radii (self-intersection)";

    MeshCheck below{"below_ground"};
    if (mesh.ground == GroundModel::infinite_image)
        for (int i = 0; i < n; ++i)
            if (mesh.segments[i].start.z < -kNodeTol || mesh.segments[i].end.z < -kNodeTol) below.offending.push_back(i);
    below.passed = below.offending.empty();
    if (!below.passed) below.detail = "segment below the image ground plane";

    // A port sits at the start node of its segment; that node must carry a basis function.
    auto port_ok = [&](int seg) {
        if (seg < 0 || seg >= n) return false;
        const int node = topo.start_node[seg];
        return topo.grounded[node] || topo.degree(node) >= 2;
    };
    MeshCheck feed{"feed_index"};
    if (!port_ok(mesh.feed_segment)) {
        feed.passed = false;
        feed.detail = "feed segment missing or its start node is an open wire end";
        if (mesh.feed_segment >= 0 && mesh.feed_segment < n) feed.offending.push_back(mesh.feed_segment);
    }
    MeshCheck load{"load_index"};
    std::set<int> port_nodes;
    if (feed.passed && !topo.grounded[topo.start_node[mesh.feed_segment]])
        port_nodes.insert(topo.start_node[mesh.feed_segment]);
    for (const auto& [seg, ref] : mesh.loads) {
        if (!port_ok(seg) || seg == mesh.feed_segment) {
            load.offending.push_back(seg);
            continue;
        }
        const int node = topo.start_node[seg];
        if (!topo.grounded[node] && !port_nodes.insert(node).second) load.offending.push_back(seg);
    }
    load.passed = load.offending.empty();
    if (!load.passed) load.detail = "load index invalid, on the feed, or sharing a junction with another port";

    diag.checks = {seg_len, radius, elec, conn, overlap, prox, below, feed, load};
    return diag;
}

}  // namespace trapant::geometry
