#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "horoflow/fuchsian.hpp"
#include "horoflow/hyperbolic.hpp"

// Finite-horizon orbit-density experiments on quotient surfaces. A flow
// orbit of a seed frame is sampled at a fixed parameter step, every frame
// is Dirichlet-reduced into the fundamental domain centered at i, and the
// reduced (base, direction) pairs are scored against a coverage grid over
// the domain's bounding box. Density of an orbit can only be supported or
// left open at a finite budget, never proved, so experiment verdicts are
// three-valued.

namespace horoflow {

enum class FlowKind { HOROCYCLE, GEODESIC, AFFINE };

const char* flow_kind_name(FlowKind kind);

struct ReducedFrame {
    HPoint base;      // Dirichlet-reduced
    double direction; // tangent angle at base, radians in (-pi, pi]
};

struct OrbitSample {
    FlowKind flow = FlowKind::HOROCYCLE;
    double step = 0.0;
    int count = 0; // == frames.size()
    std::vector<ReducedFrame> frames;
};

// Uniform grid over the box [x_min,x_max] x [y_min,y_max] with the
// direction binned on [0, 2pi). Cells are addressed by (x, y, angle) bin
// triples; `hit` is one flag per cell and merges across samples by OR, so
// accumulation order never matters. Bases are clamped into the boundary
// bins, which only matters for points within rounding error of the box.
struct CoverageGrid {
    int x_bins = 1;
    int y_bins = 1;
    int angle_bins = 1;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    std::vector<unsigned char> hit;

    CoverageGrid(int xb, int yb, int ab, double x0, double x1, double y0, double y1);

    std::size_t cell_count() const {
        return static_cast<std::size_t>(x_bins) * static_cast<std::size_t>(y_bins) *
               static_cast<std::size_t>(angle_bins);
    }
    std::size_t cell_id(int xbin, int ybin, int abin) const {
        return (static_cast<std::size_t>(ybin) * static_cast<std::size_t>(x_bins) +
                static_cast<std::size_t>(xbin)) *
                   static_cast<std::size_t>(angle_bins) +
               static_cast<std::size_t>(abin);
    }
    std::size_t cell_index(const HPoint& base, double direction) const;
    void mark(const OrbitSample& sample);
    std::size_t hits() const;
    void clear();
};

// Box of the hyperbolic disk of the given radius about i: the domain of a
// cocompact group fits inside its circumdisk, so this box satisfies the
// grid invariant for any circumradius bound.
CoverageGrid grid_for_disk(int x_bins, int y_bins, int angle_bins, double radius);

// Evaluate the flow at parameters 0, ds, 2ds, ..., s_max and Dirichlet-
// reduce every frame. AFFINE sweeps a rectangular (t, s) parameter grid
// with the same total budget: 33 geodesic rows over t in [-3, 3] (odd
// count, so the t = 0 row is the plain horocycle sweep) and a symmetric
// s-range at the same step ds. Parallel over samples; the serial variant
// is the reference implementation and produces identical output.
OrbitSample sample_orbit(const GroupPresentation& G, const Frame& u, FlowKind flow,
                         double s_max, double ds);
OrbitSample sample_orbit_serial(const GroupPresentation& G, const Frame& u, FlowKind flow,
                                double s_max, double ds);

// Fraction of all grid cells hit by the sample's frames. Marks the grid,
// so nested samples scored into the same grid report monotone fractions.
double coverage_fraction(const OrbitSample& sample, CoverageGrid& grid);

// Number of cells whose (x, y) rectangle meets the reducer's fixed-point
// region (no generator strictly improves the distance to i), estimated on
// a lattice x lattice point grid per cell, corners included. Multiplied
// by angle_bins: reachability does not depend on direction.
std::size_t reachable_cells(const CoverageGrid& grid, const GroupPresentation& G,
                            int lattice = 5);

enum class DichotomyVerdict { DENSE_TREND, RETURN_TIME, INCONCLUSIVE };

const char* verdict_name(DichotomyVerdict v);

struct CoverageRow {
    double budget = 0.0;
    FlowKind flow = FlowKind::HOROCYCLE;
    std::size_t cells_hit = 0;
    std::size_t cells_total = 0;
    double coverage = 0.0;
    DichotomyVerdict verdict = DichotomyVerdict::INCONCLUSIVE;
};

struct DichotomyReport {
    std::vector<CoverageRow> rows;
    DichotomyVerdict verdict = DichotomyVerdict::INCONCLUSIVE; // the last row's
    std::optional<double> return_time;
};

// Horocycle coverage at each budget. A row is DENSE_TREND when its
// coverage exceeds 0.9 and is still rising (first row: nonzero),
// RETURN_TIME when a geodesic return time t0 > 0 is supplied (a
// successful kernel-cover run), INCONCLUSIVE otherwise. The denominator
// cells_total counts reachable cells, plus any cell actually hit at the
// largest budget so coverage never exceeds 1; cells outside the
// fundamental domain can never be reached by a reduced frame.
DichotomyReport dichotomy_experiment(const GroupPresentation& G, const Frame& u,
                                     const std::vector<double>& budgets, double ds,
                                     const CoverageGrid& grid_spec,
                                     const std::optional<double>& return_time);

struct AffineProbeReport {
    CoverageRow horocycle;
    CoverageRow affine;
    // The affine sweep's t = 0 row repeats the horocycle sweep on its own
    // s-range; the horocycle hit-set at those matched parameters is then a
    // subset of the affine hit-set.
    bool matched_hits_contained = false;
    double matched_s_max = 0.0;
};

// Affine-flow coverage next to horocycle coverage at the same budget, on
// fresh copies of the same grid.
AffineProbeReport affine_minimality_probe(const GroupPresentation& G, const Frame& u,
                                          double budget, double ds,
                                          const CoverageGrid& grid_spec);

// CSV rows `budget,flow,cells_hit,cells_total,coverage,verdict`.
void write_coverage_csv(std::ostream& os, const std::vector<CoverageRow>& rows);

} // namespace horoflow
