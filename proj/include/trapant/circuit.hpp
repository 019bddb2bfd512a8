#pragma once

// Lumped-element model of the parallel LC band-stop trap: impedance,
// series two-port S-parameters, resonance and component selection.

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trapant/constants.hpp"

namespace trapant::circuit {

/// A component value with a symmetric tolerance band. Exactly one of
/// tol_abs / tol_rel is used (both zero means an exact component).
struct ComponentValue {
    double nominal = 0.0;
    double tol_abs = 0.0;  // same unit as nominal
    double tol_rel = 0.0;  // fraction of nominal

    static ComponentValue absolute(double nominal, double tol) { return {nominal, tol, 0.0}; }
    static ComponentValue relative(double nominal, double tol) { return {nominal, 0.0, tol}; }

    double half_width() const { return tol_abs + tol_rel * nominal; }
    double relative_half_width() const { return half_width() / nominal; }
    /// Value at normalised deviation d in [-1, 1] of the tolerance band.
    double at(double d) const { return nominal + d * half_width(); }

    void validate(const char* what) const;
};

/// One capacitor in parallel with two parallel inductors.
struct TrapSpec {
    ComponentValue cap;
    ComponentValue ind1;
    ComponentValue ind2;
    double r_series_ind = 0.0;  // ohm, per inductor
    double r_series_cap = 0.0;  // ohm

    void validate() const;
    /// The trap used in the dual-band design: 9.1 pF +/- 0.05 pF, 2 x 6.8 nH +/- 2 %.
    static TrapSpec reference();
    /// Same nominal values with all tolerances multiplied by `factor`.
    TrapSpec with_tolerance_scale(double factor) const;
};

/// Normalised deviation of each component, each in [-1, 1].
struct TrapDeviation {
    double ind1 = 0.0;
    double ind2 = 0.0;
    double cap = 0.0;
};

/// Worst-case corner: both inductors move together.
struct CornerAssignment {
    int delta_L = 0;  // -1, 0, +1
    int delta_C = 0;  // -1, 0, +1

    TrapDeviation deviation() const;
    std::string name() const;  // "nominal", "+L+C", "-L+C", ...
    friend bool operator==(const CornerAssignment&, const CornerAssignment&) = default;

    /// Nominal followed by the four extreme corners.
    static std::array<CornerAssignment, 5> canonical();
    static CornerAssignment parse(const std::string& name);
};

struct ReferenceImpedance {
    double z0 = 50.0;
};

/// Realised element values of one trap instance.
struct TrapValues {
    double l1 = 0.0;
    double l2 = 0.0;
    double c = 0.0;
    double r_ind = 0.0;
    double r_cap = 0.0;

    double l_eff() const;
};

TrapValues realize(const TrapSpec& spec, const TrapDeviation& dev);

/// |Z| ceiling reported at exact parallel resonance of an ideal trap.
inline constexpr double open_circuit_ohms = 1.0e9;

double parallel_inductance(double l1, double l2);

cplx trap_impedance(const TrapValues& values, double f);
cplx trap_impedance(const TrapSpec& spec, double f, const CornerAssignment& corner = {});

double trap_resonance(const TrapValues& values);
double trap_resonance(const TrapSpec& spec, const CornerAssignment& corner = {});

struct Sensitivity {
    double wrt_inductance = -0.5;  // (df0/f0) / (dL/L)
    double wrt_capacitance = -0.5;  // (df0/f0) / (dC/C)
    double worst_fractional_shift = 0.0;  // first-order, magnitude
};

Sensitivity resonance_sensitivity(const TrapSpec& spec);

struct SParams {
    cplx s11;
    cplx s21;
};

/// Series impedance between two matched z0 terminations.
SParams series_element_sparams(cplx z, const ReferenceImpedance& ref = {});

struct TrapSweepPoint {
    double f = 0.0;
    CornerAssignment corner;
    SParams s;
};

/// Rows ordered corner-major, frequency-minor.
std::vector<TrapSweepPoint> trap_s21_sweep(const TrapSpec& spec, std::span<const double> grid,
                                           std::span<const CornerAssignment> corners,
                                           const ReferenceImpedance& ref = {});

// --- component selection --------------------------------------------------

struct CatalogEntry {
    double value = 0.0;    // SI (F or H)
    double tol_abs = 0.0;  // SI
    double tol_rel = 0.0;  // fraction
};

/// Parses `value,unit,tolerance` lines. Units: pF, nF, uF, F, nH, uH, H.
/// Tolerance is either a percentage ("2%") or an absolute value in a unit ("0.05pF").
/// Blank lines and lines starting with '#' are ignored.
std::vector<CatalogEntry> parse_catalog(std::istream& in);

/// E24 preferred-number mantissas (1.0 .. 9.1).
std::span<const double> e24_series();

/// Capacitors: +/-0.05 pF class through 9.1 pF, +/-2 % above.
std::vector<CatalogEntry> default_capacitor_catalog();
/// Inductors: E24 values 1 nH .. 91 nH at +/-2 %.
std::vector<CatalogEntry> default_inductor_catalog();

/// Nearest catalog value in log space; ties go to the larger value.
const CatalogEntry& snap_log_nearest(double value, std::span<const CatalogEntry> catalog);

/// Picks the largest capacitor of the tightest absolute-tolerance class,
/// computes the inductance that resonates with it at target_f0 and realises
/// it as two equal parallel inductors snapped to the inductor catalog.
TrapSpec select_trap_components(double target_f0, std::span<const CatalogEntry> cap_catalog,
                                std::span<const CatalogEntry> ind_catalog);

}  // namespace trapant::circuit
