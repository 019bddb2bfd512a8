#include "trapant/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "trapant/errors.hpp"
#include "trapant/export.hpp"

namespace trapant::config {

namespace {

constexpr double mm = 1e-3, MHz = 1e6, pF = 1e-12, nH = 1e-9;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double number(const std::string& v, int line, const std::string& key) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x))
        throw ConfigError(key + ": expected a number, got '" + v + "'", line);
    return x;
}

long integer(const std::string& v, int line, const std::string& key) {
    const double x = number(v, line, key);
    if (x != std::floor(x) || std::abs(x) > 9.0e15) throw ConfigError(key + ": expected an integer", line);
    return long(x);
}

bool boolean(const std::string& v, int line, const std::string& key) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(key + ": expected true or false", line);
}

using Setter = std::function<void(const std::string& value, int line, const std::string& key)>;

/// Trap fields gathered before the spec is assembled (required-field checks).
struct TrapDraft {
    std::optional<double> cap, ind1, ind2;
    double cap_tol_pf = 0.0, cap_tol_pct = 0.0;
    double ind1_tol_nh = 0.0, ind1_tol_pct = 0.0;
    double ind2_tol_nh = 0.0, ind2_tol_pct = 0.0;
    double r_ind = 0.0, r_cap = 0.0;
    int section_line = 0;
};

}  // namespace

std::vector<double> SweepSpec::grid() const {
    if (!(f_lo > 0.0) || !(f_hi >= f_lo) || !(step > 0.0)) throw ConfigError("sweep: need 0 < f_lo <= f_hi and step > 0");
    const auto n = std::size_t(std::floor((f_hi - f_lo) / step + 1e-9)) + 1;
    if (n > 1000000) throw ConfigError("sweep: more than 10^6 frequency points");
    std::vector<double> g;
    for (std::size_t i = 0; i < n; ++i) g.push_back(f_lo + double(i) * step);
    if (g.back() < f_hi * (1.0 - 1e-12)) g.push_back(f_hi);
    return g;
}

circuit::TrapSpec RunConfig::require_trap() const {
    if (!trap) throw ConfigError("the [trap] block is required for this command");
    return trap->with_tolerance_scale(tolerance_scale);
}

geometry::SegmentMesh RunConfig::build_mesh() const {
    return geometry::build_ifa_mesh(antenna, substrate, ground, require_trap(), max_seg_fraction, f_max);
}

solver::SolverOptions RunConfig::solver_options() const {
    solver::SolverOptions o;
    o.quadrature_order = analysis.quadrature_order;
    o.conductivity = analysis.conductivity;
    o.threads = analysis.threads;
    o.reference.z0 = sweep.z0;
    return o;
}

RunConfig parse_config(std::istream& in) {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    RunConfig c;
    c.source_hash = io::hash_hex(io::fnv1a64(text));
    TrapDraft trap;
    bool bands_seen = false;

    auto& a = c.antenna;
    auto len = [](double& field) { return [&field](const std::string& v, int l, const std::string& k) { field = number(v, l, k) * mm; }; };
    auto plain = [](double& field) { return [&field](const std::string& v, int l, const std::string& k) { field = number(v, l, k); }; };
    auto freq = [](double& field) { return [&field](const std::string& v, int l, const std::string& k) { field = number(v, l, k) * MHz; }; };
    auto opt = [](std::optional<double>& field, double unit) {
        return [&field, unit](const std::string& v, int l, const std::string& k) { field = number(v, l, k) * unit; };
    };

    std::map<std::string, std::map<std::string, Setter>> table;
    table["geometry"] = {
        {"config",
         [&](const std::string& v, int l, const std::string&) {
             try {
                 a.config = geometry::trap_placement_from_string(v);
             } catch (const ValidationError& e) {
                 throw ConfigError(e.what(), l);
             }
         }},
        {"length_scale", plain(a.length_scale)},
        {"footprint_length_mm", len(a.footprint_length)},
        {"footprint_height_mm", len(a.footprint_height)},
        {"trace_width_mm", len(a.trace_width)},
        {"feed_width_mm", len(a.feed_width)},
        {"conductor_thickness_mm", len(a.conductor_thickness)},
        {"short_pin_offset_mm", len(a.short_pin_offset)},
        {"trap_position_fraction", plain(a.trap_position_fraction)},
        {"extension_length_mm", len(a.extension_length)},
        {"branch_drop_mm", len(a.branch_drop)},
        {"eps_r", plain(c.substrate.eps_r)},
        {"loss_tan", plain(c.substrate.loss_tan)},
        {"strip_width_mm", len(c.substrate.strip_width)},
        {"board_thickness_mm", len(c.substrate.board_thickness)},
        {"ground",
         [&](const std::string& v, int l, const std::string&) {
             try {
                 c.ground.model = geometry::ground_model_from_string(v);
             } catch (const ValidationError& e) {
                 throw ConfigError(e.what(), l);
             }
         }},
        {"ground_size_x_mm", len(c.ground.size_x)},
        {"ground_size_y_mm", len(c.ground.size_y)},
        {"ground_thickness_mm", len(c.ground.thickness)},
        {"grid_wire_radius_mm", len(c.ground.grid_wire_radius)},
        {"grid_pitch_mm", len(c.ground.grid_pitch)},
        {"max_seg_fraction", plain(c.max_seg_fraction)},
        {"f_max_mhz", freq(c.f_max)},
    };
    table["trap"] = {
        {"cap_pf", opt(trap.cap, pF)},
        {"cap_tol_pf", plain(trap.cap_tol_pf)},
        {"cap_tol_pct", plain(trap.cap_tol_pct)},
        {"ind1_nh", opt(trap.ind1, nH)},
        {"ind1_tol_nh", plain(trap.ind1_tol_nh)},
        {"ind1_tol_pct", plain(trap.ind1_tol_pct)},
        {"ind2_nh", opt(trap.ind2, nH)},
        {"ind2_tol_nh", plain(trap.ind2_tol_nh)},
        {"ind2_tol_pct", plain(trap.ind2_tol_pct)},
        {"r_ind_ohm", plain(trap.r_ind)},
        {"r_cap_ohm", plain(trap.r_cap)},
        {"tolerance_scale", plain(c.tolerance_scale)},
    };
    table["design"] = {
        {"target_mhz", freq(c.design.target_f0)},
        {"cap_catalog", [&](const std::string& v, int, const std::string&) { c.design.cap_catalog = v; }},
        {"ind_catalog", [&](const std::string& v, int, const std::string&) { c.design.ind_catalog = v; }},
    };
    table["sweep"] = {
        {"f_lo_mhz", freq(c.sweep.f_lo)},
        {"f_hi_mhz", freq(c.sweep.f_hi)},
        {"step_mhz", freq(c.sweep.step)},
        {"z0_ohm", plain(c.sweep.z0)},
    };
    table["analysis"] = {
        {"threshold_db", plain(c.analysis.threshold_db)},
        {"mc_samples",
         [&](const std::string& v, int l, const std::string& k) {
             const long n = integer(v, l, k);
             if (n < 1) throw ConfigError(k + " must be >= 1", l);
             c.analysis.mc_samples = std::size_t(n);
         }},
        {"mc_seed",
         [&](const std::string& v, int l, const std::string& k) {
             try {
                 std::size_t used = 0;
                 c.analysis.mc_seed = std::stoull(v, &used);
                 if (used != v.size()) throw ConfigError(k + ": expected an unsigned integer", l);
             } catch (const std::logic_error&) {
                 throw ConfigError(k + ": expected an unsigned integer", l);
             }
         }},
        {"mc_distribution",
         [&](const std::string& v, int l, const std::string&) {
             try {
                 c.analysis.mc_distribution = tolerance::distribution_from_string(v);
             } catch (const ValidationError& e) {
                 throw ConfigError(e.what(), l);
             }
         }},
        {"quadrature_order",
         [&](const std::string& v, int l, const std::string& k) {
             const long n = integer(v, l, k);
             if (n < 2 || n > 32) throw ConfigError(k + " must lie in 2..32", l);
             c.analysis.quadrature_order = int(n);
         }},
        {"conductivity_s_per_m", plain(c.analysis.conductivity)},
        {"threads",
         [&](const std::string& v, int l, const std::string& k) {
             const long n = integer(v, l, k);
             if (n < 1 || n > 256) throw ConfigError(k + " must lie in 1..256", l);
             c.analysis.threads = unsigned(n);
         }},
        {"pattern_mhz", freq(c.analysis.pattern_f)},
        {"n_theta",
         [&](const std::string& v, int l, const std::string& k) { c.analysis.n_theta = int(integer(v, l, k)); }},
        {"n_phi", [&](const std::string& v, int l, const std::string& k) { c.analysis.n_phi = int(integer(v, l, k)); }},
    };
    table["output"] = {
        {"prefix",
         [&](const std::string& v, int l, const std::string& k) {
             if (v.empty() || v.find('/') != std::string::npos) throw ConfigError(k + ": must be a plain file name", l);
             c.output.prefix = v;
         }},
        {"csv", [&](const std::string& v, int l, const std::string& k) { c.output.csv = boolean(v, l, k); }},
        {"touchstone",
         [&](const std::string& v, int l, const std::string& k) { c.output.touchstone = boolean(v, l, k); }},
    };

    std::istringstream lines(text);
    std::string raw, section;
    std::set<std::string> seen;
    int n = 0;
    while (std::getline(lines, raw)) {
        ++n;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (const auto semi = line.find(';'); semi != std::string::npos) line.erase(semi);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", n);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "bands" && !table.count(section)) throw ConfigError("unknown section [" + section + "]", n);
            if (!seen.insert("[" + section + "]").second) throw ConfigError("duplicate section [" + section + "]", n);
            if (section == "trap") trap.section_line = n;
            if (section == "bands") {
                bands_seen = true;
                c.bands.clear();
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", n);
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("key '" + key + "' outside any section", n);
        if (key.empty()) throw ConfigError("empty key", n);
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) throw ConfigError("duplicate key " + full, n);
        if (section == "bands") {
            const auto comma = value.find(',');
            if (comma == std::string::npos) throw ConfigError(full + ": expected 'lo, hi' in MHz", n);
            tolerance::BandSpec b{key, number(trim(value.substr(0, comma)), n, full) * MHz,
                                  number(trim(value.substr(comma + 1)), n, full) * MHz};
            try {
                b.validate();
            } catch (const ValidationError& e) {
                throw ConfigError(e.what(), n);
            }
            c.bands.push_back(b);
            continue;
        }
        const auto& keys = table.at(section);
        const auto it = keys.find(key);
        if (it == keys.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]", n);
        it->second(value, n, full);
    }
    if (bands_seen && c.bands.empty()) throw ConfigError("[bands] block is empty");

    if (trap.section_line > 0) {
        const std::pair<const char*, const std::optional<double>*> required[] = {
            {"trap.cap_pf", &trap.cap}, {"trap.ind1_nh", &trap.ind1}, {"trap.ind2_nh", &trap.ind2}};
        for (const auto& [name, field] : required)
            if (!*field) throw ConfigError(std::string("missing required field ") + name, trap.section_line);
        auto component = [&](double nominal, double tol_abs, double tol_pct, const char* name, double unit) {
            if (tol_abs > 0.0 && tol_pct > 0.0)
                throw ConfigError(std::string(name) + ": give either an absolute or a percentage tolerance",
                                  trap.section_line);
            return circuit::ComponentValue{nominal, tol_abs * unit, tol_pct / 100.0};
        };
        circuit::TrapSpec t;
        t.cap = component(*trap.cap, trap.cap_tol_pf, trap.cap_tol_pct, "cap", pF);
        t.ind1 = component(*trap.ind1, trap.ind1_tol_nh, trap.ind1_tol_pct, "ind1", nH);
        t.ind2 = component(*trap.ind2, trap.ind2_tol_nh, trap.ind2_tol_pct, "ind2", nH);
        t.r_series_ind = trap.r_ind;
        t.r_series_cap = trap.r_cap;
        try {
            t.validate();
            if (!(c.tolerance_scale >= 0.0)) throw ValidationError("tolerance_scale must be >= 0");
        } catch (const std::exception& e) {
            throw ConfigError(std::string("[trap]: ") + e.what(), trap.section_line);
        }
        c.trap = t;
    }
    try {
        c.antenna.validate();
        c.substrate.validate();
        c.ground.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("[geometry]: ") + e.what());
    }
    c.sweep.grid();
    if (!(c.sweep.z0 > 0.0)) throw ConfigError("sweep.z0_ohm must be positive");
    if (c.analysis.n_theta < 2 || c.analysis.n_phi < 1) throw ConfigError("analysis: pattern grid too small");
    return c;
}

RunConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RunConfig c = parse_config(in);
    const auto slash = path.find_last_of('/');
    c.base_dir = slash == std::string::npos ? "." : path.substr(0, slash);
    return c;
}

}  // namespace trapant::config
