#include "trapant/mesh_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "trapant/errors.hpp"

namespace trapant::io {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string component(const circuit::ComponentValue& c) {
    return num(c.nominal) + ' ' + num(c.tol_abs) + ' ' + num(c.tol_rel);
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-comment, non-blank line split into a stream.
    std::istringstream next(const char* expecting) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            return std::istringstream(line);
        }
        fail(std::string("unexpected end of file, expecting ") + expecting);
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("mesh line " + std::to_string(line_) + ": " + msg);
    }

    template <class T>
    T keyed(const char* key) {
        auto ls = next(key);
        std::string k;
        T v{};
        if (!(ls >> k >> v) || k != key) fail(std::string("expected '") + key + " <value>'");
        return v;
    }

private:
    std::istream& in_;
    int line_ = 0;
};

circuit::ComponentValue read_component(std::istream& ls) {
    circuit::ComponentValue c;
    ls >> c.nominal >> c.tol_abs >> c.tol_rel;
    return c;
}

}  // namespace

void write_mesh(std::ostream& out, const geometry::SegmentMesh& mesh, const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "trapant-mesh " << mesh_format_version << '\n';
    out << "length_scale " << num(mesh.length_scale) << '\n';
    out << "ground " << geometry::to_string(mesh.ground) << '\n';
    out << "feed " << mesh.feed_segment << '\n';
    out << "segments " << mesh.segments.size() << '\n';
    for (const auto& s : mesh.segments)
        out << num(s.start.x) << ' ' << num(s.start.y) << ' ' << num(s.start.z) << ' ' << num(s.end.x) << ' '
            << num(s.end.y) << ' ' << num(s.end.z) << ' ' << num(s.radius) << '\n';
    out << "loads " << mesh.loads.size() << '\n';
    for (const auto& [seg, load] : mesh.loads) {
        out << seg << ' ';
        if (const auto* t = std::get_if<circuit::TrapSpec>(&load))
            out << "trap " << component(t->cap) << ' ' << component(t->ind1) << ' ' << component(t->ind2) << ' '
                << num(t->r_series_ind) << ' ' << num(t->r_series_cap) << '\n';
        else {
            const cplx z = std::get<cplx>(load);
            out << "impedance " << num(z.real()) << ' ' << num(z.imag()) << '\n';
        }
    }
    out << "end\n";
}

geometry::SegmentMesh read_mesh(std::istream& in) {
    LineReader r(in);
    {
        auto ls = r.next("header");
        std::string magic;
        int version = 0;
        if (!(ls >> magic >> version) || magic != "trapant-mesh") r.fail("not a trapant mesh file");
        if (version != mesh_format_version) r.fail("unsupported mesh format version " + std::to_string(version));
    }
    geometry::SegmentMesh mesh;
    mesh.length_scale = r.keyed<double>("length_scale");
    try {
        mesh.ground = geometry::ground_model_from_string(r.keyed<std::string>("ground"));
    } catch (const ValidationError& e) {
        r.fail(e.what());
    }
    mesh.feed_segment = r.keyed<int>("feed");
    const auto n = r.keyed<long>("segments");
    if (n < 0) r.fail("negative segment count");
    for (long i = 0; i < n; ++i) {
        auto ls = r.next("segment");
        geometry::Segment s;
        if (!(ls >> s.start.x >> s.start.y >> s.start.z >> s.end.x >> s.end.y >> s.end.z >> s.radius))
            r.fail("expected 7 numbers for a segment");
        mesh.segments.push_back(s);
    }
    const auto m = r.keyed<long>("loads");
    for (long i = 0; i < m; ++i) {
        auto ls = r.next("load");
        int seg = -1;
        std::string kind;
        if (!(ls >> seg >> kind)) r.fail("expected '<segment> <kind> ...'");
        if (seg < 0 || seg >= int(mesh.segments.size())) r.fail("load segment out of range");
        if (kind == "trap") {
            circuit::TrapSpec t;
            t.cap = read_component(ls);
            t.ind1 = read_component(ls);
            t.ind2 = read_component(ls);
            ls >> t.r_series_ind >> t.r_series_cap;
            if (!ls) r.fail("expected 11 numbers for a trap load");
            mesh.loads.emplace(seg, t);
        } else if (kind == "impedance") {
            double re = 0.0, im = 0.0;
            if (!(ls >> re >> im)) r.fail("expected 2 numbers for an impedance load");
            mesh.loads.emplace(seg, cplx(re, im));
        } else {
            r.fail("unknown load kind '" + kind + "'");
        }
    }
    auto ls = r.next("end");
    std::string end;
    if (!(ls >> end) || end != "end") r.fail("expected 'end'");
    if (mesh.feed_segment < 0 || mesh.feed_segment >= int(mesh.segments.size())) r.fail("feed segment out of range");
    return mesh;
}

}  // namespace trapant::io
