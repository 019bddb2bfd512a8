#include "trapant/tolerance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"
#include "trapant/errors.hpp"

namespace trapant::tolerance {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rl_db(cplx s11) {
    const double mag = std::abs(s11);
    return mag > 0.0 ? 20.0 * std::log10(mag) : -std::numeric_limits<double>::infinity();
}

/// Return loss (dB) of one trap deviation at every grid point.
std::vector<double> rl_curve(const solver::Solver& s, std::span<const solver::PortReduction> ports,
                             const circuit::TrapDeviation& dev) {
    std::vector<double> rl(ports.size());
    for (std::size_t k = 0; k < ports.size(); ++k)
        rl[k] = rl_db(solver::reflection(s.z_in(ports[k], dev), s.options().reference));
    return rl;
}

/// All local minima of the curve.
std::vector<solver::Resonance> minima(std::span<const double> grid, std::span<const double> rl) {
    return solver::find_resonances(grid, rl, std::numeric_limits<double>::infinity());
}

/// Minimum nearest to `target`, preferring those at or below the threshold.
const solver::Resonance* nearest(const std::vector<solver::Resonance>& mins, double target, double threshold) {
    const solver::Resonance* best = nullptr;
    for (int pass = 0; pass < 2 && !best; ++pass)
        for (const auto& m : mins) {
            if (pass == 0 && !(m.rl_db <= threshold)) continue;
            if (!best || std::abs(m.f_dip - target) < std::abs(best->f_dip - target)) best = &m;
        }
    return best;
}

double band_worst(std::span<const double> grid, std::span<const double> rl, const BandSpec& band) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (grid[k] >= band.f_lo && grid[k] <= band.f_hi) worst = std::max(worst, rl[k]);
    return worst;
}

struct Evaluation {
    std::vector<double> grid;
    std::vector<BandSpec> bands;
    solver::Solver solver;
    std::vector<solver::PortReduction> ports;

    /// Band results; dip targets are the band centres for the nominal curve
    /// and the nominal dips otherwise.
    std::vector<BandResult> evaluate(const circuit::TrapDeviation& dev, std::span<const double> targets,
                                     double threshold) const {
        const std::vector<double> rl = rl_curve(solver, ports, dev);
        const auto mins = minima(grid, rl);
        std::vector<BandResult> out;
        for (std::size_t b = 0; b < bands.size(); ++b) {
            BandResult r;
            r.worst_rl_db = band_worst(grid, rl, bands[b]);
            if (const auto* m = nearest(mins, targets[b], threshold)) {
                r.dip_f = m->f_dip;
                r.dip_rl_db = m->rl_db;
            } else {
                r.dip_f = kNaN;
                r.dip_rl_db = kNaN;
            }
            out.push_back(r);
        }
        return out;
    }
};

geometry::SegmentMesh with_trap(const geometry::SegmentMesh& mesh, const circuit::TrapSpec& trap) {
    if (mesh.loads.size() != 1 || !std::holds_alternative<circuit::TrapSpec>(mesh.loads.begin()->second))
        throw ValidationError("tolerance analysis needs a mesh with exactly one trap load");
    trap.validate();
    geometry::SegmentMesh m = mesh;
    m.loads.begin()->second = trap;
    return m;
}

void check_bands(std::span<const BandSpec> bands, std::span<const double> grid) {
    if (bands.empty()) throw ValidationError("at least one band is required");
    if (grid.empty()) throw ValidationError("empty frequency grid");
    for (const auto& b : bands) {
        b.validate();
        if (b.f_lo < grid.front() || b.f_hi > grid.back())
            throw ValidationError("band " + b.name + " lies outside the sweep grid");
    }
}

void fill_corners(ToleranceReport& report, const Evaluation& ev) {
    std::vector<double> targets;
    for (const auto& b : ev.bands) targets.push_back(0.5 * (b.f_lo + b.f_hi));
    for (const auto& corner : circuit::CornerAssignment::canonical()) {
        CornerRow row{corner.name(), {}};
        try {
            row.bands = ev.evaluate(corner.deviation(), targets, report.threshold_db);
        } catch (const std::exception& e) {
            report.complete = false;
            report.failure = "corner " + corner.name() + ": " + e.what();
            return;
        }
        if (report.corners.empty())
            for (std::size_t b = 0; b < row.bands.size(); ++b)
                if (std::isfinite(row.bands[b].dip_f)) targets[b] = row.bands[b].dip_f;
        report.corners.push_back(std::move(row));
    }
}

ToleranceReport start(std::span<const BandSpec> bands, const AnalysisOptions& options) {
    ToleranceReport r;
    r.bands.assign(bands.begin(), bands.end());
    r.threshold_db = options.threshold_db;
    return r;
}

/// Reduction of every grid point; a failure marks the report incomplete.
std::optional<Evaluation> prepare(ToleranceReport& report, const geometry::SegmentMesh& mesh,
                                  const circuit::TrapSpec& trap, std::span<const BandSpec> bands,
                                  std::span<const double> grid, const AnalysisOptions& options) {
    check_bands(bands, grid);
    const std::vector<double> merged = merge_band_edges(grid, bands);
    Evaluation ev{merged, {bands.begin(), bands.end()}, solver::Solver(with_trap(mesh, trap), options.solver), {}};
    try {
        ev.ports = ev.solver.reduce_sweep(ev.grid);
    } catch (const NumericalError& e) {
        report.complete = false;
        report.failure = std::string("corner nominal: ") + e.what();
        return std::nullopt;
    }
    return ev;
}

void finish(ToleranceReport& report) {
    report.verdict = report.complete && pass_fail(report, report.threshold_db);
}

}  // namespace

void BandSpec::validate() const {
    if (!(f_lo > 0.0) || !(f_lo < f_hi) || !std::isfinite(f_hi))
        throw ValidationError("band " + name + ": need 0 < f_lo < f_hi");
}

std::vector<BandSpec> default_bands() { return {{"low", 865e6, 870e6}, {"high", 902e6, 928e6}}; }

std::vector<double> merge_band_edges(std::span<const double> grid, std::span<const BandSpec> bands) {
    std::vector<double> out(grid.begin(), grid.end());
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) throw DomainError("sweep grid must be strictly increasing");
    for (const auto& b : bands) {
        out.push_back(b.f_lo);
        out.push_back(b.f_hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string to_string(Distribution d) { return d == Distribution::uniform ? "uniform" : "corner-weighted"; }

Distribution distribution_from_string(const std::string& s) {
    if (s == "uniform") return Distribution::uniform;
    if (s == "corner-weighted") return Distribution::corner_weighted;
    throw ValidationError("unknown distribution '" + s + "'");
}

double ToleranceReport::worst_rl(std::size_t band) const {
    double w = -std::numeric_limits<double>::infinity();
    for (const auto& c : corners) w = std::max(w, c.bands.at(band).worst_rl_db);
    return w;
}

double ToleranceReport::margin_db() const {
    double w = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < bands.size(); ++b) w = std::max(w, worst_rl(b));
    return threshold_db - w;
}

double ToleranceReport::max_dip_shift(std::size_t band) const {
    if (corners.empty()) return kNaN;
    const double nominal = corners.front().bands.at(band).dip_f;
    double s = 0.0;
    for (std::size_t c = 1; c < corners.size(); ++c) s = std::max(s, std::abs(corners[c].bands.at(band).dip_f - nominal));
    return s;
}

ToleranceReport corner_analysis(const geometry::SegmentMesh& mesh, const circuit::TrapSpec& trap,
                                std::span<const BandSpec> bands, std::span<const double> grid,
                                const AnalysisOptions& options) {
    ToleranceReport report = start(bands, options);
    if (auto ev = prepare(report, mesh, trap, bands, grid, options)) fill_corners(report, *ev);
    finish(report);
    return report;
}

std::vector<circuit::TrapDeviation> sample_deviations(std::size_t n, std::uint64_t seed, Distribution distribution) {
    std::mt19937_64 rng(seed);
    // Fixed mapping from 53 random bits; library distributions differ between implementations.
    auto draw = [&] {
        const double u = double(rng() >> 11) * 0x1.0p-53;
        return distribution == Distribution::uniform ? 2.0 * u - 1.0 : std::sin(pi * (u - 0.5));
    };
    std::vector<circuit::TrapDeviation> out(n);
    for (auto& d : out) {
        d.ind1 = draw();
        d.ind2 = draw();
        d.cap = draw();
    }
    return out;
}

ToleranceReport monte_carlo(const geometry::SegmentMesh& mesh, const circuit::TrapSpec& trap,
                            std::span<const BandSpec> bands, std::span<const double> grid, std::size_t n,
                            std::uint64_t seed, Distribution distribution, const AnalysisOptions& options) {
    if (n < 1) throw DomainError("Monte Carlo needs at least one sample");
    ToleranceReport report = start(bands, options);
    auto ev = prepare(report, mesh, trap, bands, grid, options);
    if (ev) fill_corners(report, *ev);
    if (ev && report.complete) {
        MonteCarloSummary mc;
        mc.samples = n;
        mc.seed = seed;
        mc.distribution = distribution;
        mc.dip_min.assign(bands.size(), std::numeric_limits<double>::infinity());
        mc.dip_max.assign(bands.size(), -std::numeric_limits<double>::infinity());
        mc.worst_rl.assign(bands.size(), -std::numeric_limits<double>::infinity());
        std::vector<double> targets;
        for (const auto& b : report.corners.front().bands) targets.push_back(b.dip_f);
        std::size_t passed = 0;
        try {
            for (const auto& dev : sample_deviations(n, seed, distribution)) {
                const auto res = ev->evaluate(dev, targets, report.threshold_db);
                bool ok = true;
                for (std::size_t b = 0; b < res.size(); ++b) {
                    mc.dip_min[b] = std::min(mc.dip_min[b], res[b].dip_f);
                    mc.dip_max[b] = std::max(mc.dip_max[b], res[b].dip_f);
                    mc.worst_rl[b] = std::max(mc.worst_rl[b], res[b].worst_rl_db);
                    ok = ok && res[b].worst_rl_db <= report.threshold_db;
                }
                passed += ok ? 1 : 0;
            }
        } catch (const std::exception& e) {
            report.complete = false;
            report.failure = std::string("Monte Carlo sample: ") + e.what();
        }
        mc.pass_rate = double(passed) / double(n);
        report.monte_carlo = std::move(mc);
    }
    finish(report);
    return report;
}

bool pass_fail(const ToleranceReport& report, double threshold_db) {
    if (!report.complete) throw ValidationError("incomplete tolerance report: " + report.failure);
    if (report.corners.size() != 5) throw ValidationError("tolerance report must hold 5 corners");
    for (const auto& c : report.corners)
        for (const auto& b : c.bands)
            if (!(b.worst_rl_db <= threshold_db)) return false;
    return true;
}

std::string to_string(Thesis t) {
    switch (t) {
        case Thesis::b_smaller: return "B smaller";
        case Thesis::equal: return "equal";
        case Thesis::a_smaller: return "A smaller";
    }
    return "?";
}

Comparison compare_configs(const Design& a, const Design& b, std::span<const BandSpec> bands,
                           std::span<const double> grid, const AnalysisOptions& options) {
    Comparison c;
    c.name_a = a.name;
    c.name_b = b.name;
    c.a = corner_analysis(a.mesh, a.trap, bands, grid, options);
    c.b = corner_analysis(b.mesh, b.trap, bands, grid, options);
    for (const auto* d : {&c.a, &c.b})
        if (!d->complete) throw NumericalError("comparison sweep failed: " + d->failure);
    const std::pair<const ToleranceReport*, const std::string*> designs[] = {{&c.a, &a.name}, {&c.b, &b.name}};
    for (const auto& [rep, name] : designs)
        for (std::size_t k = 0; k < bands.size(); ++k) {
            const double f = rep->corners.front().bands[k].dip_f;
            if (!(f >= bands[k].f_lo && f <= bands[k].f_hi))
                throw SynthesisError("design " + *name + " is untuned: no nominal dip inside band " + bands[k].name);
        }
    for (std::size_t k = 0; k < bands.size(); ++k) {
        c.shift_a.push_back(c.a.max_dip_shift(k));
        c.shift_b.push_back(c.b.max_dip_shift(k));
    }
    const double da = c.shift_a.front(), db = c.shift_b.front();
    c.low_band = db < da ? Thesis::b_smaller : db > da ? Thesis::a_smaller : Thesis::equal;
    return c;
}

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json report_json(const ToleranceReport& r) {
    ordered_json j;
    j["threshold_db"] = r.threshold_db;
    j["complete"] = r.complete;
    if (!r.complete) j["failure"] = r.failure;
    ordered_json bands = ordered_json::array();
    for (const auto& b : r.bands) bands.push_back({{"name", b.name}, {"f_lo_hz", b.f_lo}, {"f_hi_hz", b.f_hi}});
    j["bands"] = bands;
    ordered_json corners = ordered_json::array();
    for (const auto& c : r.corners) {
        ordered_json row;
        row["corner"] = c.corner;
        ordered_json per = ordered_json::array();
        for (std::size_t b = 0; b < c.bands.size(); ++b)
            per.push_back({{"band", r.bands[b].name},
                           {"worst_rl_db", number(c.bands[b].worst_rl_db)},
                           {"dip_hz", number(c.bands[b].dip_f)},
                           {"dip_rl_db", number(c.bands[b].dip_rl_db)}});
        row["bands"] = per;
        corners.push_back(row);
    }
    j["corners"] = corners;
    if (r.monte_carlo) {
        const auto& mc = *r.monte_carlo;
        ordered_json m;
        m["samples"] = mc.samples;
        m["seed"] = mc.seed;
        m["distribution"] = to_string(mc.distribution);
        m["pass_rate"] = mc.pass_rate;
        ordered_json per = ordered_json::array();
        for (std::size_t b = 0; b < mc.dip_min.size(); ++b)
            per.push_back({{"band", r.bands[b].name},
                           {"dip_min_hz", number(mc.dip_min[b])},
                           {"dip_max_hz", number(mc.dip_max[b])},
                           {"worst_rl_db", number(mc.worst_rl[b])}});
        m["bands"] = per;
        j["monte_carlo"] = m;
    }
    if (r.complete && r.corners.size() == 5) j["margin_db"] = number(r.margin_db());
    j["verdict"] = r.verdict ? "pass" : "fail";
    return j;
}

}  // namespace

std::string to_json(const ToleranceReport& report) { return report_json(report).dump(2) + "\n"; }

std::string to_json(const Comparison& c) {
    ordered_json j;
    ordered_json shifts = ordered_json::array();
    for (std::size_t k = 0; k < c.shift_a.size(); ++k)
        shifts.push_back({{"band", c.a.bands[k].name},
                          {"max_shift_a_hz", number(c.shift_a[k])},
                          {"max_shift_b_hz", number(c.shift_b[k])}});
    j["design_a"] = c.name_a;
    j["design_b"] = c.name_b;
    j["dip_shift"] = shifts;
    j["low_band_shift"] = to_string(c.low_band);
    j["worst_rl_db_a"] = number(c.a.threshold_db - c.a.margin_db());
    j["worst_rl_db_b"] = number(c.b.threshold_db - c.b.margin_db());
    j["verdict_a"] = c.a.verdict ? "pass" : "fail";
    j["verdict_b"] = c.b.verdict ? "pass" : "fail";
    j["report_a"] = report_json(c.a);
    j["report_b"] = report_json(c.b);
    return j.dump(2) + "\n";
}

}  // namespace trapant::tolerance
