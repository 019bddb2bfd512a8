#pragma once

// Band return-loss judgement at trap tolerance corners and Monte Carlo
// samples, and the A/B configuration comparison.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trapant/circuit.hpp"
#include "trapant/geometry.hpp"
#include "trapant/solver.hpp"

namespace trapant::tolerance {

struct BandSpec {
    std::string name;
    double f_lo = 0.0;  // Hz
    double f_hi = 0.0;  // Hz

    void validate() const;
};

/// 865-870 MHz and 902-928 MHz.
std::vector<BandSpec> default_bands();

/// Grid with every band edge inserted as an explicit sample point.
std::vector<double> merge_band_edges(std::span<const double> grid, std::span<const BandSpec> bands);

struct BandResult {
    double worst_rl_db = 0.0;  // max return loss (dB) over the band samples
    double dip_f = 0.0;        // Hz; NaN when the sweep has no minimum
    double dip_rl_db = 0.0;
};

struct CornerRow {
    std::string corner;  // "nominal", "+L+C", ...
    std::vector<BandResult> bands;
};

enum class Distribution { uniform, corner_weighted };

std::string to_string(Distribution d);
Distribution distribution_from_string(const std::string& s);

struct MonteCarloSummary {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    Distribution distribution = Distribution::uniform;
    double pass_rate = 0.0;
    std::vector<double> dip_min;   // per band, Hz
    std::vector<double> dip_max;   // per band, Hz
    std::vector<double> worst_rl;  // per band, dB, max over samples
};

struct ToleranceReport {
    std::vector<BandSpec> bands;
    double threshold_db = -10.0;
    std::vector<CornerRow> corners;  // nominal first, then the four extremes
    std::optional<MonteCarloSummary> monte_carlo;
    bool complete = true;
    std::string failure;  // names the failing corner when incomplete
    bool verdict = false;

    /// Worst return loss of a band over all corners.
    double worst_rl(std::size_t band) const;
    /// threshold - worst in-band return loss over all bands and corners.
    double margin_db() const;
    /// Largest |corner dip - nominal dip| of a band (Hz).
    double max_dip_shift(std::size_t band) const;
};

struct AnalysisOptions {
    double threshold_db = -10.0;
    solver::SolverOptions solver{};
};

/// Sweeps nominal plus the four extreme corners with `trap` replacing the
/// mesh's single trap load.
ToleranceReport corner_analysis(const geometry::SegmentMesh& mesh, const circuit::TrapSpec& trap,
                                std::span<const BandSpec> bands, std::span<const double> grid,
                                const AnalysisOptions& options = {});

/// Corner analysis plus n random draws of L1, L2 and C within tolerance.
ToleranceReport monte_carlo(const geometry::SegmentMesh& mesh, const circuit::TrapSpec& trap,
                            std::span<const BandSpec> bands, std::span<const double> grid, std::size_t n,
                            std::uint64_t seed, Distribution distribution = Distribution::uniform,
                            const AnalysisOptions& options = {});

/// Deviation draws used by monte_carlo, in sampling order.
std::vector<circuit::TrapDeviation> sample_deviations(std::size_t n, std::uint64_t seed, Distribution distribution);

/// True iff every corner's worst in-band return loss is at or below the
/// threshold in every band. Throws ValidationError for an incomplete report.
bool pass_fail(const ToleranceReport& report, double threshold_db = -10.0);

struct Design {
    std::string name;
    geometry::SegmentMesh mesh;
    circuit::TrapSpec trap;
};

enum class Thesis { b_smaller, equal, a_smaller };

std::string to_string(Thesis t);

struct Comparison {
    ToleranceReport a;
    ToleranceReport b;
    std::string name_a, name_b;
    std::vector<double> shift_a;  // per band, Hz
    std::vector<double> shift_b;
    Thesis low_band = Thesis::equal;  // B's low-band shift versus A's
};

/// Corner analysis of both designs. A design whose nominal sweep has no dip
/// inside a band raises SynthesisError naming it as untuned.
Comparison compare_configs(const Design& a, const Design& b, std::span<const BandSpec> bands,
                           std::span<const double> grid, const AnalysisOptions& options = {});

/// Stable-key-order JSON text.
std::string to_json(const ToleranceReport& report);
std::string to_json(const Comparison& comparison);

}  // namespace trapant::tolerance
