#pragma once

// INI-style run configuration in CLI units (mm, MHz, pF, nH, dB).
//
//   [geometry]  antenna, substrate and ground dimensions, mesh density
//   [trap]      component values and tolerances
//   [design]    component synthesis target and catalogs
//   [sweep]     frequency grid and reference impedance
//   [bands]     name = lo, hi   (replaces the default bands)
//   [analysis]  threshold, Monte Carlo, solver and pattern settings
//   [output]    output file prefix and formats

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trapant/circuit.hpp"
#include "trapant/geometry.hpp"
#include "trapant/solver.hpp"
#include "trapant/tolerance.hpp"

namespace trapant::config {

struct SweepSpec {
    double f_lo = 840e6;
    double f_hi = 950e6;
    double step = 0.25e6;
    double z0 = 50.0;

    /// f_lo, f_lo + step, ... up to and including f_hi.
    std::vector<double> grid() const;
};

struct DesignSpec {
    double target_f0 = 915e6;
    std::string cap_catalog;  // path; empty selects the built-in catalog
    std::string ind_catalog;
};

struct AnalysisSpec {
    double threshold_db = -10.0;
    std::size_t mc_samples = 200;
    std::uint64_t mc_seed = 1;
    tolerance::Distribution mc_distribution = tolerance::Distribution::uniform;
    int quadrature_order = 8;
    double conductivity = 0.0;  // S/m
    unsigned threads = 1;
    double pattern_f = 0.0;  // Hz; 0 selects the first nominal dip
    int n_theta = 40;
    int n_phi = 72;
};

struct OutputSpec {
    std::string prefix = "trapant";
    bool csv = true;
    bool touchstone = true;
};

struct RunConfig {
    std::string source_hash;  // FNV-1a of the file text
    std::string base_dir;     // directory of the file, for relative catalog paths

    geometry::AntennaParams antenna;
    geometry::SubstrateSpec substrate;
    geometry::GroundSpec ground;
    double max_seg_fraction = 1.0 / 20.0;
    double f_max = 1.0e9;

    std::optional<circuit::TrapSpec> trap;
    double tolerance_scale = 1.0;
    DesignSpec design;
    SweepSpec sweep;
    std::vector<tolerance::BandSpec> bands = tolerance::default_bands();
    AnalysisSpec analysis;
    OutputSpec output;

    /// Trap with the tolerance scale applied; ConfigError if the [trap] block is absent.
    circuit::TrapSpec require_trap() const;
    geometry::SegmentMesh build_mesh() const;
    solver::SolverOptions solver_options() const;
};

/// Throws ConfigError with the line number for malformed input, unknown
/// sections or keys, duplicates and missing required fields.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace trapant::config
