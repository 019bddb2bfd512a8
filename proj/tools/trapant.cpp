// trapant command-line driver.
//
// Exit codes: 0 success or tolerance pass, 1 tolerance fail, 2 usage,
// configuration, geometry or numerical error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "trapant/circuit.hpp"
#include "trapant/config.hpp"
#include "trapant/errors.hpp"
#include "trapant/export.hpp"
#include "trapant/farfield.hpp"
#include "trapant/geometry.hpp"
#include "trapant/mesh_io.hpp"
#include "trapant/solver.hpp"
#include "trapant/tolerance.hpp"

namespace fs = std::filesystem;
using namespace trapant;

namespace {

constexpr int kPass = 0, kFail = 1, kError = 2;

struct Common {
    std::vector<std::string> configs;
    std::string out = ".";
    std::string corners;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 0;
    double freq_mhz = 0.0;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

config::RunConfig load(const Common& o, std::size_t i = 0) {
    config::RunConfig c = config::load_config(o.configs.at(i));
    if (o.threads > 0) c.analysis.threads = o.threads;
    if (o.seed_set) c.analysis.mc_seed = o.seed;
    return c;
}

std::ofstream open_out(const Common& o, const std::string& name) {
    fs::create_directories(o.out);
    const fs::path p = fs::path(o.out) / name;
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write " + p.string());
    std::cout << "wrote " << p.string() << '\n';
    return f;
}

std::vector<circuit::CornerAssignment> corner_list(const Common& o) {
    const auto all = circuit::CornerAssignment::canonical();
    if (o.corners.empty()) return {all.begin(), all.end()};
    std::vector<circuit::CornerAssignment> out;
    std::stringstream ss(o.corners);
    std::string name;
    while (std::getline(ss, name, ',')) {
        try {
            out.push_back(circuit::CornerAssignment::parse(name));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("--corners: ") + e.what());
        }
    }
    if (out.empty()) throw ConfigError("--corners: empty list");
    return out;
}

/// "+L-C" -> "pLmC" for file names.
std::string file_tag(const std::string& corner) {
    std::string s = corner;
    for (auto& ch : s) ch = ch == '+' ? 'p' : ch == '-' ? 'm' : ch;
    return s;
}

io::FileHeader header(const config::RunConfig& c, const std::string& command) {
    return {c.source_hash, {"command " + command}};
}

std::string mhz(double f) { return fmt("%.3f", f / 1e6); }

std::vector<circuit::CatalogEntry> catalog(const config::RunConfig& c, const std::string& path, bool capacitors) {
    if (path.empty()) return capacitors ? circuit::default_capacitor_catalog() : circuit::default_inductor_catalog();
    const fs::path p = fs::path(path).is_absolute() ? fs::path(path) : fs::path(c.base_dir) / path;
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open catalog " + p.string());
    return circuit::parse_catalog(in);
}

// --- commands ---------------------------------------------------------------------

int cmd_trap(const Common& o) {
    const auto c = load(o);
    const auto trap = c.require_trap();
    const auto corners = corner_list(o);
    const auto grid = c.sweep.grid();
    const auto rows = circuit::trap_s21_sweep(trap, grid, corners, {c.sweep.z0});
    auto f = open_out(o, c.output.prefix + "_trap.csv");
    io::write_trap_csv(f, header(c, "trap"), rows);

    const double f0 = circuit::trap_resonance(trap);
    double worst = 0.0;
    for (const auto& corner : circuit::CornerAssignment::canonical()) {
        const double shift = (circuit::trap_resonance(trap, corner) - f0) / f0;
        if (std::abs(shift) > std::abs(worst)) worst = shift;
    }
    std::cout << "nominal f0 " << mhz(f0) << " MHz\n";
    std::cout << "worst corner shift " << fmt("%+.4f", 100.0 * worst) << " %\n";
    return kPass;
}

int cmd_design_trap(const Common& o) {
    const auto c = load(o);
    const auto caps = catalog(c, c.design.cap_catalog, true);
    const auto inds = catalog(c, c.design.ind_catalog, false);
    const auto t = circuit::select_trap_components(c.design.target_f0, caps, inds);
    const double f0 = circuit::trap_resonance(t);
    const double delta = (f0 - c.design.target_f0) / c.design.target_f0;
    std::cout << "capacitor " << fmt("%.4g", t.cap.nominal * 1e12) << " pF\n";
    std::cout << "inductors 2 x " << fmt("%.4g", t.ind1.nominal * 1e9) << " nH\n";
    std::cout << "achieved f0 " << mhz(f0) << " MHz (target " << mhz(c.design.target_f0) << " MHz, delta "
              << fmt("%+.3f", 100.0 * delta) << " %)\n";

    auto f = open_out(o, c.output.prefix + "_trap.conf");
    for (const auto& l : header(c, "design-trap").lines()) f << "# " << l << '\n';
    auto tol = [&](const char* name, const circuit::ComponentValue& v, double unit, const char* abs_key) {
        if (v.tol_abs > 0.0) f << name << abs_key << " = " << fmt("%.9g", v.tol_abs / unit) << '\n';
        else f << name << "_tol_pct = " << fmt("%.9g", v.tol_rel * 100.0) << '\n';
    };
    f << "[trap]\n";
    f << "cap_pf = " << fmt("%.9g", t.cap.nominal * 1e12) << '\n';
    tol("cap", t.cap, 1e-12, "_tol_pf");
    f << "ind1_nh = " << fmt("%.9g", t.ind1.nominal * 1e9) << '\n';
    tol("ind1", t.ind1, 1e-9, "_tol_nh");
    f << "ind2_nh = " << fmt("%.9g", t.ind2.nominal * 1e9) << '\n';
    tol("ind2", t.ind2, 1e-9, "_tol_nh");
    return kPass;
}

int cmd_mesh(const Common& o) {
    const auto c = load(o);
    const auto mesh = c.build_mesh();
    const auto diag = geometry::validate_mesh(mesh, c.f_max);
    std::cout << mesh.segments.size() << " segments, length scale " << fmt("%.6g", mesh.length_scale) << ", ground "
              << geometry::to_string(mesh.ground) << '\n'
              << diag.summary();
    auto f = open_out(o, c.output.prefix + ".mesh");
    io::write_mesh(f, mesh, header(c, "mesh").lines());
    return kPass;
}

void print_dips(const std::string& corner, std::span<const solver::DriveResult> results, double threshold) {
    const auto dips = solver::find_resonances(results, threshold);
    std::cout << corner << ':';
    if (dips.empty()) std::cout << " no dip at or below " << threshold << " dB";
    for (const auto& d : dips)
        std::cout << "  dip " << mhz(d.f_dip) << " MHz " << fmt("%.2f", d.rl_db) << " dB, bandwidth "
                  << fmt("%.2f", d.bandwidth() / 1e6) << " MHz (" << mhz(d.bw_lo) << "-" << mhz(d.bw_hi) << ")";
    std::cout << '\n';
}

int cmd_sweep(const Common& o) {
    const auto c = load(o);
    const auto corners = corner_list(o);
    const solver::Solver s(c.build_mesh(), c.solver_options());
    const auto grid = c.sweep.grid();
    std::vector<circuit::TrapDeviation> devs;
    for (const auto& k : corners) devs.push_back(k.deviation());
    const auto results = s.sweep_many(grid, devs);

    std::vector<io::SweepSeries> series;
    for (std::size_t i = 0; i < corners.size(); ++i) {
        series.push_back({corners[i].name(), results[i]});
        print_dips(corners[i].name(), results[i], c.analysis.threshold_db);
    }
    if (c.output.csv) {
        auto f = open_out(o, c.output.prefix + "_sweep.csv");
        io::write_sweep_csv(f, header(c, "sweep"), series);
    }
    if (c.output.touchstone)
        for (const auto& ser : series) {
            auto f = open_out(o, c.output.prefix + "_" + file_tag(ser.corner) + ".s1p");
            auto h = header(c, "sweep");
            h.extra.push_back("corner " + ser.corner);
            io::write_touchstone(f, h, ser.results, c.sweep.z0);
        }
    return kPass;
}

int cmd_pattern(const Common& o) {
    const auto c = load(o);
    const solver::Solver s(c.build_mesh(), c.solver_options());
    double f = o.freq_mhz > 0.0 ? o.freq_mhz * 1e6 : c.analysis.pattern_f;
    if (!(f > 0.0)) {
        const auto grid = c.sweep.grid();
        const auto dips = solver::find_resonances(s.sweep(grid), c.analysis.threshold_db);
        if (dips.empty()) throw ConfigError("no dip in the sweep range; give --freq or analysis.pattern_mhz");
        f = dips.front().f_dip;
    }
    const auto r = s.solve(f);
    const farfield::GridSpec spec{c.analysis.n_theta, c.analysis.n_phi, farfield::ThetaSampling::gauss_legendre};
    const auto grid = farfield::radiate(s.mesh(), s.basis(), r.currents, f, spec);
    const double p_rad = farfield::radiated_power(grid);
    const auto gain = farfield::directivity_gain(grid, r.p_in, p_rad);
    const double spread = farfield::azimuth_spread_db(grid, pi / 2.0);

    auto csv = open_out(o, c.output.prefix + "_pattern.csv");
    auto h = header(c, "pattern");
    h.extra.push_back("freq_hz " + fmt("%.9g", f));
    io::write_pattern_csv(csv, h, grid, gain);
    auto js = open_out(o, c.output.prefix + "_pattern.json");
    js << io::pattern_summary_json(f, gain, r.p_in, p_rad, spread);

    std::cout << "frequency " << mhz(f) << " MHz, z_in " << fmt("%.3f", r.z_in.real()) << fmt("%+.3f", r.z_in.imag())
              << "j ohm\n";
    std::cout << "max directivity " << fmt("%.3f", gain.max_directivity_dbi()) << " dBi, max gain "
              << fmt("%.3f", gain.max_gain_dbi()) << " dBi\n";
    std::cout << "efficiency " << fmt("%.4f", gain.efficiency) << " (" << fmt("%.3f", gain.efficiency_db())
              << " dB)\n";
    std::cout << "azimuth cut spread " << fmt("%.2f", spread) << " dB\n";
    return kPass;
}

int cmd_tolerance(const Common& o) {
    const auto c = load(o);
    const auto mesh = c.build_mesh();
    tolerance::AnalysisOptions opts{c.analysis.threshold_db, c.solver_options()};
    const auto report = tolerance::monte_carlo(mesh, c.require_trap(), c.bands, c.sweep.grid(), c.analysis.mc_samples,
                                               c.analysis.mc_seed, c.analysis.mc_distribution, opts);
    auto f = open_out(o, c.output.prefix + "_tolerance.json");
    f << tolerance::to_json(report);
    if (!report.complete) {
        std::cerr << "error: incomplete report: " << report.failure << '\n';
        return kError;
    }
    for (std::size_t b = 0; b < report.bands.size(); ++b)
        std::cout << "band " << report.bands[b].name << ": worst return loss " << fmt("%.2f", report.worst_rl(b))
                  << " dB, max dip shift " << fmt("%.3f", report.max_dip_shift(b) / 1e6) << " MHz\n";
    if (report.monte_carlo)
        std::cout << "Monte Carlo: " << report.monte_carlo->samples << " samples, pass rate "
                  << fmt("%.3f", report.monte_carlo->pass_rate) << '\n';
    std::cout << "verdict " << (report.verdict ? "pass" : "fail") << " (margin " << fmt("%.2f", report.margin_db())
              << " dB)\n";
    return report.verdict ? kPass : kFail;
}

int cmd_compare(const Common& o) {
    if (o.configs.size() != 2) throw ConfigError("compare needs exactly two --config files");
    const auto ca = load(o, 0), cb = load(o, 1);
    const tolerance::Design a{o.configs[0], ca.build_mesh(), ca.require_trap()};
    const tolerance::Design b{o.configs[1], cb.build_mesh(), cb.require_trap()};
    tolerance::AnalysisOptions opts{cb.analysis.threshold_db, cb.solver_options()};
    const auto cmp = tolerance::compare_configs(a, b, cb.bands, cb.sweep.grid(), opts);
    auto f = open_out(o, cb.output.prefix + "_compare.json");
    f << tolerance::to_json(cmp);
    for (std::size_t k = 0; k < cmp.shift_a.size(); ++k)
        std::cout << "band " << cb.bands[k].name << ": max dip shift A " << fmt("%.3f", cmp.shift_a[k] / 1e6)
                  << " MHz, B " << fmt("%.3f", cmp.shift_b[k] / 1e6) << " MHz\n";
    std::cout << "low-band dip shift: " << tolerance::to_string(cmp.low_band) << '\n';
    std::cout << "verdict A " << (cmp.a.verdict ? "pass" : "fail") << " (margin " << fmt("%.2f", cmp.a.margin_db())
              << " dB), B " << (cmp.b.verdict ? "pass" : "fail") << " (margin " << fmt("%.2f", cmp.b.margin_db())
              << " dB)\n";
    return kPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trap-loaded dual-band antenna analysis"};
    app.require_subcommand(1);
    Common o;

    auto add = [&](const char* name, const char* help, bool corners, bool seed, bool freq) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.configs, "Run configuration file")->required();
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--threads", o.threads, "Worker threads (overrides the configuration)");
        if (corners) sub->add_option("--corners", o.corners, "Comma-separated corners, e.g. nominal,+L+C");
        if (seed) sub->add_option("--seed", o.seed, "Monte Carlo seed")->each([&](const std::string&) { o.seed_set = true; });
        if (freq) sub->add_option("--freq", o.freq_mhz, "Frequency in MHz");
        return sub;
    };
    auto* trap = add("trap", "Trap S21/S11 at nominal and tolerance corners", true, false, false);
    auto* design = add("design-trap", "Select trap components from catalogs", false, false, false);
    auto* mesh = add("mesh", "Build, validate and export the antenna mesh", false, false, false);
    auto* sweep = add("sweep", "Return-loss sweep with CSV and Touchstone output", true, false, false);
    auto* pattern = add("pattern", "Radiation pattern, gain and efficiency", false, false, true);
    auto* tol = add("tolerance", "Corner and Monte Carlo tolerance report", false, true, false);
    auto* compare = add("compare", "Compare two designs (A then B) across tolerance corners", false, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kError;
    }

    try {
        if (o.configs.size() > 1 && !compare->parsed()) throw ConfigError("only compare accepts two --config files");
        if (trap->parsed()) return cmd_trap(o);
        if (design->parsed()) return cmd_design_trap(o);
        if (mesh->parsed()) return cmd_mesh(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (pattern->parsed()) return cmd_pattern(o);
        if (tol->parsed()) return cmd_tolerance(o);
        if (compare->parsed()) return cmd_compare(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}
