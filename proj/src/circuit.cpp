#include "trapant/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include "trapant/errors.hpp"

namespace trapant::circuit {

void ComponentValue::validate(const char* what) const {
    if (!(nominal > 0.0) || !std::isfinite(nominal))
        throw DomainError(std::string(what) + ": nominal value must be positive");
    if (tol_abs < 0.0 || tol_rel < 0.0)
        throw DomainError(std::string(what) + ": tolerance must be non-negative");
    if (tol_abs > 0.0 && tol_rel > 0.0)
        throw DomainError(std::string(what) + ": specify either an absolute or a relative tolerance");
    if (half_width() >= nominal)
        throw DomainError(std::string(what) + ": tolerance band reaches zero");
}

void TrapSpec::validate() const {
    cap.validate("capacitor");
    ind1.validate("inductor 1");
    ind2.validate("inductor 2");
    if (r_series_ind < 0.0 || r_series_cap < 0.0)
        throw DomainError("series resistance must be non-negative");
}

TrapSpec TrapSpec::reference() {
    return TrapSpec{ComponentValue::absolute(9.1e-12, 0.05e-12), ComponentValue::relative(6.8e-9, 0.02),
                    ComponentValue::relative(6.8e-9, 0.02)};
}

TrapSpec TrapSpec::with_tolerance_scale(double factor) const {
    TrapSpec out = *this;
    for (ComponentValue* v : {&out.cap, &out.ind1, &out.ind2}) {
        v->tol_abs *= factor;
        v->tol_rel *= factor;
    }
    return out;
}

TrapDeviation CornerAssignment::deviation() const {
    return TrapDeviation{double(delta_L), double(delta_L), double(delta_C)};
}

std::string CornerAssignment::name() const {
    if (delta_L == 0 && delta_C == 0) return "nominal";
    auto sign = [](int d) { return d > 0 ? std::string("+") : d < 0 ? std::string("-") : std::string("0"); };
    return sign(delta_L) + "L" + sign(delta_C) + "C";
}

std::array<CornerAssignment, 5> CornerAssignment::canonical() {
    return {CornerAssignment{0, 0}, CornerAssignment{+1, +1}, CornerAssignment{+1, -1},
            CornerAssignment{-1, +1}, CornerAssignment{-1, -1}};
}

CornerAssignment CornerAssignment::parse(const std::string& name) {
    if (name == "nominal") return {};
    auto sign = [&](char c) {
        switch (c) {
            case '+': return 1;
            case '-': return -1;
            case '0': return 0;
        }
        throw DomainError("bad corner name '" + name + "'");
    };
    if (name.size() != 4 || name[1] != 'L' || name[3] != 'C') throw DomainError("bad corner name '" + name + "'");
    return {sign(name[0]), sign(name[2])};
}

double TrapValues::l_eff() const { return parallel_inductance(l1, l2); }

TrapValues realize(const TrapSpec& spec, const TrapDeviation& dev) {
    for (double d : {dev.ind1, dev.ind2, dev.cap})
        if (!(d >= -1.0 && d <= 1.0)) throw DomainError("component deviation outside [-1, 1]");
    return TrapValues{spec.ind1.at(dev.ind1), spec.ind2.at(dev.ind2), spec.cap.at(dev.cap), spec.r_series_ind,
                      spec.r_series_cap};
}

double parallel_inductance(double l1, double l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0)) throw DomainError("parallel_inductance: inductances must be positive");
    return l1 * l2 / (l1 + l2);
}

namespace {

cplx clamp_open(cplx z) {
    const double mag = std::abs(z);
    if (!std::isfinite(mag)) return {0.0, open_circuit_ohms};
    if (mag > open_circuit_ohms) return z * (open_circuit_ohms / mag);
    return z;
}

}  // namespace

cplx trap_impedance(const TrapValues& v, double f) {
    if (!(f > 0.0)) throw DomainError("trap_impedance: frequency must be positive");
    const double w = 2.0 * pi * f;
    if (v.r_ind == 0.0 && v.r_cap == 0.0) {
        const double l = v.l_eff();
        return clamp_open(cplx(0.0, w * l / (1.0 - w * w * l * v.c)));
    }
    const cplx z1(v.r_ind, w * v.l1);
    const cplx z2(v.r_ind, w * v.l2);
    const cplx zl = z1 * z2 / (z1 + z2);
    const cplx zc(v.r_cap, -1.0 / (w * v.c));
    return clamp_open(zl * zc / (zl + zc));
}

cplx trap_impedance(const TrapSpec& spec, double f, const CornerAssignment& corner) {
    return trap_impedance(realize(spec, corner.deviation()), f);
}

double trap_resonance(const TrapValues& v) { return 1.0 / (2.0 * pi * std::sqrt(v.l_eff() * v.c)); }

double trap_resonance(const TrapSpec& spec, const CornerAssignment& corner) {
    return trap_resonance(realize(spec, corner.deviation()));
}

Sensitivity resonance_sensitivity(const TrapSpec& spec) {
    spec.validate();
    const TrapValues hi = realize(spec, TrapDeviation{1.0, 1.0, 0.0});
    const double l_nom = parallel_inductance(spec.ind1.nominal, spec.ind2.nominal);
    const double dl = hi.l_eff() / l_nom - 1.0;
    const double dc = spec.cap.relative_half_width();
    return Sensitivity{-0.5, -0.5, 0.5 * (dl + dc)};
}

SParams series_element_sparams(cplx z, const ReferenceImpedance& ref) {
    if (!(ref.z0 > 0.0)) throw DomainError("reference impedance must be positive");
    const double two_z0 = 2.0 * ref.z0;
    const cplx den = two_z0 + z;
    return SParams{z / den, two_z0 / den};
}

std::vector<TrapSweepPoint> trap_s21_sweep(const TrapSpec& spec, std::span<const double> grid,
                                           std::span<const CornerAssignment> corners,
                                           const ReferenceImpedance& ref) {
    if (grid.empty()) throw DomainError("trap_s21_sweep: empty frequency grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw DomainError("trap_s21_sweep: frequencies must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("trap_s21_sweep: grid must be strictly increasing");
    }
    spec.validate();
    std::vector<TrapSweepPoint> out;
    out.reserve(grid.size() * corners.size());
    for (const auto& corner : corners) {
        const TrapValues v = realize(spec, corner.deviation());
        for (double f : grid) out.push_back({f, corner, series_element_sparams(trap_impedance(v, f), ref)});
    }
    return out;
}

// --- catalogs ----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double unit_factor(const std::string& unit) {
    static const std::pair<const char*, double> table[] = {
        {"F", 1.0}, {"uF", 1e-6}, {"nF", 1e-9}, {"pF", 1e-12}, {"H", 1.0}, {"uH", 1e-6}, {"nH", 1e-9}, {"pH", 1e-12},
    };
    for (const auto& [name, factor] : table)
        if (unit == name) return factor;
    throw DomainError("unknown unit '" + unit + "'");
}

constexpr double kE24[] = {1.0, 1.1, 1.2, 1.3, 1.5, 1.6, 1.8, 2.0, 2.2, 2.4, 2.7, 3.0,
                           3.3, 3.6, 3.9, 4.3, 4.7, 5.1, 5.6, 6.2, 6.8, 7.5, 8.2, 9.1};

}  // namespace

std::vector<CatalogEntry> parse_catalog(std::istream& in) {
    std::vector<CatalogEntry> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string value_s, unit_s, tol_s;
        if (!std::getline(ss, value_s, ',') || !std::getline(ss, unit_s, ',') || !std::getline(ss, tol_s))
            throw DomainError("catalog line " + std::to_string(lineno) + ": expected value,unit,tolerance");
        try {
            const double factor = unit_factor(trim(unit_s));
            CatalogEntry e;
            e.value = std::stod(trim(value_s)) * factor;
            tol_s = trim(tol_s);
            if (!tol_s.empty() && tol_s.back() == '%') {
                e.tol_rel = std::stod(tol_s.substr(0, tol_s.size() - 1)) / 100.0;
            } else {
                std::size_t pos = 0;
                const double t = std::stod(tol_s, &pos);
                const std::string tu = trim(tol_s.substr(pos));
                e.tol_abs = t * (tu.empty() ? factor : unit_factor(tu));
            }
            if (!(e.value > 0.0)) throw DomainError("non-positive value");
            out.push_back(e);
        } catch (const std::logic_error& err) {
            throw DomainError("catalog line " + std::to_string(lineno) + ": " + err.what());
        }
    }
    return out;
}

std::span<const double> e24_series() { return kE24; }

std::vector<CatalogEntry> default_capacitor_catalog() {
    std::vector<CatalogEntry> out;
    for (double decade : {1e-12, 10e-12}) {
        for (double m : kE24) {
            const double v = m * decade;
            if (v <= 9.1e-12 * (1 + 1e-9))
                out.push_back({v, 0.05e-12, 0.0});
            else
                out.push_back({v, 0.0, 0.02});
        }
    }
    return out;
}

std::vector<CatalogEntry> default_inductor_catalog() {
    std::vector<CatalogEntry> out;
    for (double decade : {1e-9, 10e-9})
        for (double m : kE24) out.push_back({m * decade, 0.0, 0.02});
    return out;
}

const CatalogEntry& snap_log_nearest(double value, std::span<const CatalogEntry> catalog) {
    if (catalog.empty()) throw SynthesisError("empty catalog");
    if (!(value > 0.0)) throw DomainError("snap_log_nearest: value must be positive");
    const CatalogEntry* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    const double lv = std::log(value);
    for (const auto& e : catalog) {
        const double d = std::abs(std::log(e.value) - lv);
        // Relative slack absorbs rounding when value sits on a geometric midpoint.
        const double slack = 1e-12;
        if (d < best_dist - slack || (std::abs(d - best_dist) <= slack && best && e.value > best->value)) {
            best = &e;
            best_dist = std::min(d, best_dist);
        }
    }
    return *best;
}

TrapSpec select_trap_components(double target_f0, std::span<const CatalogEntry> cap_catalog,
                                std::span<const CatalogEntry> ind_catalog) {
    if (!(target_f0 > 0.0)) throw DomainError("target resonance must be positive");
    if (cap_catalog.empty()) throw SynthesisError("capacitor catalog is empty");
    if (ind_catalog.empty()) throw SynthesisError("inductor catalog is empty");

    // Tightest absolute class if any entry has one, otherwise tightest relative class.
    const bool any_abs = std::any_of(cap_catalog.begin(), cap_catalog.end(), [](auto& e) { return e.tol_abs > 0; });
    double tightest = std::numeric_limits<double>::infinity();
    for (const auto& e : cap_catalog) {
        const double t = any_abs ? (e.tol_abs > 0 ? e.tol_abs : tightest) : e.tol_rel;
        tightest = std::min(tightest, t);
    }
    const CatalogEntry* cap = nullptr;
    for (const auto& e : cap_catalog) {
        const double t = any_abs ? e.tol_abs : e.tol_rel;
        if (any_abs && e.tol_abs == 0.0) continue;
        if (t == tightest && (!cap || e.value > cap->value)) cap = &e;
    }

    const double w = 2.0 * pi * target_f0;
    const double l_eff = 1.0 / (w * w * cap->value);
    const double per_inductor = 2.0 * l_eff;

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& e : ind_catalog) {
        lo = std::min(lo, e.value);
        hi = std::max(hi, e.value);
    }
    if (per_inductor < lo || per_inductor > hi) {
        std::ostringstream msg;
        msg << "required inductor " << per_inductor * 1e9 << " nH lies outside the catalog range [" << lo * 1e9
            << ", " << hi * 1e9 << "] nH";
        throw SynthesisError(msg.str());
    }
    const CatalogEntry& ind = snap_log_nearest(per_inductor, ind_catalog);
    const ComponentValue l{ind.value, ind.tol_abs, ind.tol_rel};
    return TrapSpec{ComponentValue{cap->value, cap->tol_abs, cap->tol_rel}, l, l};
}

}  // namespace trapant::circuit
