#pragma once

// CSV, Touchstone and pattern writers. Every file starts with comment lines
// carrying the tool version and the hash of the configuration that made it.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trapant/circuit.hpp"
#include "trapant/farfield.hpp"
#include "trapant/solver.hpp"

namespace trapant::io {

inline constexpr const char* tool_version = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::uint64_t h);

struct FileHeader {
    std::string config_hash;          // hex, may be empty
    std::vector<std::string> extra;  // further comment lines

    /// "trapant <version>", "config <hash>", then `extra`, each prefixed.
    std::vector<std::string> lines() const;
};

/// `freq_hz,corner,s21_re,s21_im,s21_db,s11_re,s11_im`
void write_trap_csv(std::ostream& out, const FileHeader& header, std::span<const circuit::TrapSweepPoint> rows);

struct SweepSeries {
    std::string corner;
    std::vector<solver::DriveResult> results;
};

/// `freq_hz,corner,zin_re,zin_im,s11_re,s11_im,rl_db`, corner-major.
void write_sweep_csv(std::ostream& out, const FileHeader& header, std::span<const SweepSeries> series);

struct SweepRow {
    double f = 0.0;
    std::string corner;
    cplx z_in;
    cplx s11;
    double rl_db = 0.0;
};

std::vector<SweepRow> read_sweep_csv(std::istream& in);

/// Touchstone 1.1 one-port file, `# HZ S RI R <z0>`, 9 significant digits.
void write_touchstone(std::ostream& out, const FileHeader& header, std::span<const solver::DriveResult> results,
                      double z0 = 50.0);

struct Touchstone {
    double z0 = 50.0;
    std::vector<double> f;  // Hz
    std::vector<cplx> s11;
};

/// One-port files in RI, MA or DB format with any frequency unit.
Touchstone read_touchstone(std::istream& in);

/// `theta_deg,phi_deg,U_w_per_sr,D_dBi,G_dBi`
void write_pattern_csv(std::ostream& out, const FileHeader& header, const farfield::FarFieldGrid& grid,
                       const farfield::GainSummary& gain);

/// Summary block: frequency, max directivity and gain, efficiency (linear
/// and dB), azimuth-cut spread.
std::string pattern_summary_json(double f, const farfield::GainSummary& gain, double p_in, double p_rad,
                                 double azimuth_spread_db);

}  // namespace trapant::io
