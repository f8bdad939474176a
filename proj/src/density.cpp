#include "horoflow/density.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <optional>
#include <string>
#include <utility>

#include "horoflow/textio.hpp"

namespace horoflow {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kMembershipTol = 1e-9;

// 33 geodesic rows spread over t in [-3, 3]; odd, so one row is t = 0.
constexpr int kAffineRows = 33;
constexpr double kAffineTRange = 3.0;

int clamp_bin(double frac, int bins) {
    const int b = static_cast<int>(std::floor(frac * bins));
    return std::min(bins - 1, std::max(0, b));
}

int sweep_count(double s_max, double ds) {
    if (!(ds > 0.0) || !std::isfinite(ds))
        throw Error(Err::Validation, "ds must be positive");
    if (!(s_max >= ds) || !std::isfinite(s_max))
        throw Error(Err::Validation, "s_max must be at least ds");
    return static_cast<int>(std::floor(s_max / ds + 1e-9)) + 1;
}

struct AffineLayout {
    int n_t = 1;
    int n_s = 1;
    int half_s = 0; // s indices run over [-half_s, half_s]
    double dt = 0.0;
};

AffineLayout affine_layout(int budget) {
    AffineLayout L;
    L.n_t = std::min(kAffineRows, budget);
    if (L.n_t % 2 == 0)
        --L.n_t;
    L.n_s = std::max(1, budget / L.n_t);
    if (L.n_s % 2 == 0)
        --L.n_s;
    L.half_s = (L.n_s - 1) / 2;
    L.dt = L.n_t > 1 ? 2.0 * kAffineTRange / (L.n_t - 1) : 0.0;
    return L;
}

// Flow parameters for sample k, chosen so the zero parameter is exact.
Frame flow_frame(const Frame& u, FlowKind flow, double ds, const AffineLayout& L, int k) {
    switch (flow) {
    case FlowKind::HOROCYCLE:
        return horocycle_flow(u, k * ds);
    case FlowKind::GEODESIC:
        return geodesic_flow(u, k * ds);
    case FlowKind::AFFINE: {
        const int i = k / L.n_s;
        const int j = k % L.n_s;
        const double t = (i - (L.n_t - 1) / 2) * L.dt;
        const double s = (j - L.half_s) * ds;
        return geodesic_flow(horocycle_flow(u, s), t);
    }
    }
    throw Error(Err::Validation, "unknown flow kind");
}

template <typename Eval>
OrbitSample run_sweep(const GroupPresentation& G, FlowKind flow, double ds, int count,
                      bool parallel, Eval eval) {
    validate_presentation(G);
    OrbitSample sample;
    sample.flow = flow;
    sample.step = ds;
    sample.count = count;
    sample.frames.resize(static_cast<std::size_t>(count));

    std::atomic<bool> failed{false};
    std::optional<Error> error;
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < count; ++k) {
            if (failed.load(std::memory_order_relaxed))
                continue;
            try {
                sample.frames[static_cast<std::size_t>(k)] = eval(k);
            } catch (const Error& e) {
#pragma omp critical
                {
                    failed.store(true, std::memory_order_relaxed);
                    if (!error)
                        error = e;
                }
            }
        }
    } else {
        for (int k = 0; k < count && !failed; ++k) {
            try {
                sample.frames[static_cast<std::size_t>(k)] = eval(k);
            } catch (const Error& e) {
                failed = true;
                error = e;
            }
        }
    }
    if (error)
        throw *error;
    return sample;
}

OrbitSample sample_impl(const GroupPresentation& G, const Frame& u, FlowKind flow,
                        double s_max, double ds, bool parallel) {
    const int budget = sweep_count(s_max, ds);
    const AffineLayout L =
        flow == FlowKind::AFFINE ? affine_layout(budget) : AffineLayout{};
    const int count = flow == FlowKind::AFFINE ? L.n_t * L.n_s : budget;
    return run_sweep(G, flow, ds, count, parallel, [&](int k) {
        const Frame moved = flow_frame(u, flow, ds, L, k);
        const FrameGeometry geo = frame_geometry(dirichlet_reduce(G, moved).reduced);
        return ReducedFrame{geo.base, geo.direction};
    });
}

void mark_range(CoverageGrid& grid, const std::vector<ReducedFrame>& frames,
                std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to; ++k)
        grid.hit[grid.cell_index(frames[k].base, frames[k].direction)] = 1;
}

// Per-(x, y) mask of cells whose rectangle meets the reducer's fixed-point
// region, probed on a corner-inclusive lattice.
std::vector<unsigned char> reachable_xy_mask(const CoverageGrid& grid,
                                             const GroupPresentation& G, int lattice) {
    if (lattice < 1)
        throw Error(Err::Validation, "lattice must be >= 1");
    validate_presentation(G);
    const HPoint center;
    std::vector<HPoint> images;
    for (const MoebiusMap& g : G.generators) {
        images.push_back(moebius_apply(g, center));
        images.push_back(moebius_apply(g.inverse(), center));
    }
    const auto in_domain = [&](const HPoint& z) {
        const double dz = hyp_distance(z, center);
        for (const HPoint& w : images)
            if (hyp_distance(z, w) < dz - kMembershipTol)
                return false;
        return true;
    };

    const double dx = (grid.x_max - grid.x_min) / grid.x_bins;
    const double dy = (grid.y_max - grid.y_min) / grid.y_bins;
    std::vector<unsigned char> mask(
        static_cast<std::size_t>(grid.x_bins) * static_cast<std::size_t>(grid.y_bins), 0);
    for (int yb = 0; yb < grid.y_bins; ++yb) {
        for (int xb = 0; xb < grid.x_bins; ++xb) {
            bool meets = false;
            for (int iy = 0; iy < lattice && !meets; ++iy) {
                const double fy = lattice == 1 ? 0.5 : static_cast<double>(iy) / (lattice - 1);
                const double y = grid.y_min + (yb + fy) * dy;
                if (!(y > 0.0))
                    continue;
                for (int ix = 0; ix < lattice && !meets; ++ix) {
                    const double fx =
                        lattice == 1 ? 0.5 : static_cast<double>(ix) / (lattice - 1);
                    const double x = grid.x_min + (xb + fx) * dx;
                    meets = in_domain(HPoint(x, y));
                }
            }
            if (meets)
                mask[static_cast<std::size_t>(yb) * grid.x_bins + xb] = 1;
        }
    }
    return mask;
}

// Denominator for coverage reports: reachable cells, widened by any cell
// the given hit sets actually touch so a lattice miss on a sliver cell can
// never push coverage past 1.
std::size_t denominator_cells(const CoverageGrid& grid,
                              const std::vector<unsigned char>& xy_mask,
                              const std::vector<const CoverageGrid*>& hit_grids) {
    std::size_t total = 0;
    for (int yb = 0; yb < grid.y_bins; ++yb) {
        for (int xb = 0; xb < grid.x_bins; ++xb) {
            const std::size_t xy = static_cast<std::size_t>(yb) * grid.x_bins + xb;
            if (xy_mask[xy]) {
                total += static_cast<std::size_t>(grid.angle_bins);
                continue;
            }
            for (int ab = 0; ab < grid.angle_bins; ++ab) {
                const std::size_t id = grid.cell_id(xb, yb, ab);
                for (const CoverageGrid* g : hit_grids) {
                    if (g->hit[id]) {
                        ++total;
                        break;
                    }
                }
            }
        }
    }
    return total;
}

DichotomyVerdict row_verdict(double coverage, bool rising,
                             const std::optional<double>& return_time) {
    if (coverage > 0.9 && rising)
        return DichotomyVerdict::DENSE_TREND;
    if (return_time.has_value())
        return DichotomyVerdict::RETURN_TIME;
    return DichotomyVerdict::INCONCLUSIVE;
}

} // namespace

const char* flow_kind_name(FlowKind kind) {
    switch (kind) {
    case FlowKind::HOROCYCLE:
        return "horocycle";
    case FlowKind::GEODESIC:
        return "geodesic";
    case FlowKind::AFFINE:
        return "affine";
    }
    return "unknown";
}

const char* verdict_name(DichotomyVerdict v) {
    switch (v) {
    case DichotomyVerdict::DENSE_TREND:
        return "DENSE_TREND";
    case DichotomyVerdict::RETURN_TIME:
        return "RETURN_TIME";
    case DichotomyVerdict::INCONCLUSIVE:
        return "INCONCLUSIVE";
    }
    return "unknown";
}

CoverageGrid::CoverageGrid(int xb, int yb, int ab, double x0, double x1, double y0,
                           double y1)
    : x_bins(xb), y_bins(yb), angle_bins(ab), x_min(x0), x_max(x1), y_min(y0), y_max(y1) {
    if (xb < 1 || yb < 1 || ab < 1)
        throw Error(Err::Validation, "grid needs at least one bin per axis");
    if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(x0) || !std::isfinite(x1) ||
        !std::isfinite(y0) || !std::isfinite(y1))
        throw Error(Err::Validation, "grid box is empty or not finite");
    hit.assign(cell_count(), 0);
}

std::size_t CoverageGrid::cell_index(const HPoint& base, double direction) const {
    const int xb = clamp_bin((base.re - x_min) / (x_max - x_min), x_bins);
    const int yb = clamp_bin((base.im - y_min) / (y_max - y_min), y_bins);
    double a = wrap_angle(direction);
    if (a < 0.0)
        a += kTwoPi;
    const int ab = clamp_bin(a / kTwoPi, angle_bins);
    return cell_id(xb, yb, ab);
}

void CoverageGrid::mark(const OrbitSample& sample) {
    mark_range(*this, sample.frames, 0, sample.frames.size());
}

std::size_t CoverageGrid::hits() const {
    std::size_t n = 0;
    for (unsigned char h : hit)
        n += h ? 1 : 0;
    return n;
}

void CoverageGrid::clear() { std::fill(hit.begin(), hit.end(), 0); }

CoverageGrid grid_for_disk(int x_bins, int y_bins, int angle_bins, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw Error(Err::Validation, "radius must be positive");
    const double half_width = std::sinh(radius);
    return CoverageGrid(x_bins, y_bins, angle_bins, -half_width, half_width,
                        std::exp(-radius), std::exp(radius));
}

OrbitSample sample_orbit(const GroupPresentation& G, const Frame& u, FlowKind flow,
                         double s_max, double ds) {
    return sample_impl(G, u, flow, s_max, ds, true);
}

OrbitSample sample_orbit_serial(const GroupPresentation& G, const Frame& u, FlowKind flow,
                                double s_max, double ds) {
    return sample_impl(G, u, flow, s_max, ds, false);
}

double coverage_fraction(const OrbitSample& sample, CoverageGrid& grid) {
    grid.mark(sample);
    return static_cast<double>(grid.hits()) / static_cast<double>(grid.cell_count());
}

std::size_t reachable_cells(const CoverageGrid& grid, const GroupPresentation& G,
                            int lattice) {
    const std::vector<unsigned char> mask = reachable_xy_mask(grid, G, lattice);
    std::size_t xy = 0;
    for (unsigned char m : mask)
        xy += m ? 1 : 0;
    return xy * static_cast<std::size_t>(grid.angle_bins);
}

DichotomyReport dichotomy_experiment(const GroupPresentation& G, const Frame& u,
                                     const std::vector<double>& budgets, double ds,
                                     const CoverageGrid& grid_spec,
                                     const std::optional<double>& return_time) {
    if (budgets.empty())
        throw Error(Err::Validation, "at least one budget required");
    for (std::size_t i = 1; i < budgets.size(); ++i)
        if (!(budgets[i] > budgets[i - 1]))
            throw Error(Err::Validation, "budgets must be strictly increasing");
    if (return_time.has_value() && !(*return_time > 0.0))
        throw Error(Err::Validation, "a return time must be positive");

    const OrbitSample all = sample_orbit(G, u, FlowKind::HOROCYCLE, budgets.back(), ds);
    const std::vector<unsigned char> mask = reachable_xy_mask(grid_spec, G, 5);

    CoverageGrid full = grid_spec;
    full.clear();
    full.mark(all);
    const std::size_t total = denominator_cells(grid_spec, mask, {&full});

    DichotomyReport report;
    report.return_time = return_time;
    CoverageGrid acc = grid_spec;
    acc.clear();
    std::size_t done = 0;
    double prev_cov = 0.0;
    for (double budget : budgets) {
        const std::size_t n =
            static_cast<std::size_t>(sweep_count(budget, ds));
        mark_range(acc, all.frames, done, std::min(n, all.frames.size()));
        done = std::min(n, all.frames.size());
        CoverageRow row;
        row.budget = budget;
        row.flow = FlowKind::HOROCYCLE;
        row.cells_hit = acc.hits();
        row.cells_total = total;
        row.coverage = total == 0 ? 0.0
                                  : static_cast<double>(row.cells_hit) /
                                        static_cast<double>(total);
        const bool rising = row.coverage > prev_cov;
        row.verdict = row_verdict(row.coverage, rising, return_time);
        prev_cov = row.coverage;
        report.rows.push_back(row);
    }
    report.verdict = report.rows.back().verdict;
    return report;
}

AffineProbeReport affine_minimality_probe(const GroupPresentation& G, const Frame& u,
                                          double budget, double ds,
                                          const CoverageGrid& grid_spec) {
    const int count = sweep_count(budget, ds);
    const OrbitSample horo = sample_orbit(G, u, FlowKind::HOROCYCLE, budget, ds);
    const OrbitSample aff = sample_orbit(G, u, FlowKind::AFFINE, budget, ds);

    CoverageGrid gh = grid_spec;
    gh.clear();
    gh.mark(horo);
    CoverageGrid ga = grid_spec;
    ga.clear();
    ga.mark(aff);

    const std::vector<unsigned char> mask = reachable_xy_mask(grid_spec, G, 5);
    const std::size_t total = denominator_cells(grid_spec, mask, {&gh, &ga});

    AffineProbeReport report;
    const auto fill = [&](CoverageRow& row, FlowKind flow, std::size_t hits) {
        row.budget = budget;
        row.flow = flow;
        row.cells_hit = hits;
        row.cells_total = total;
        row.coverage =
            total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
        row.verdict = row_verdict(row.coverage, row.coverage > 0.0, std::nullopt);
    };
    fill(report.horocycle, FlowKind::HOROCYCLE, gh.hits());
    fill(report.affine, FlowKind::AFFINE, ga.hits());

    const AffineLayout L = affine_layout(count);
    report.matched_s_max = L.half_s * ds;
    if (L.half_s == 0) {
        // the t = 0 row is the single frame s = 0, which both samples share
        report.matched_hits_contained = true;
        return report;
    }
    const OrbitSample matched =
        sample_orbit(G, u, FlowKind::HOROCYCLE, report.matched_s_max, ds);
    CoverageGrid gm = grid_spec;
    gm.clear();
    gm.mark(matched);
    bool contained = true;
    for (std::size_t id = 0; id < gm.hit.size(); ++id)
        if (gm.hit[id] && !ga.hit[id])
            contained = false;
    report.matched_hits_contained = contained;
    return report;
}

void write_coverage_csv(std::ostream& os, const std::vector<CoverageRow>& rows) {
    os << "budget,flow,cells_hit,cells_total,coverage,verdict\n";
    for (const CoverageRow& row : rows) {
        os << format_real(row.budget) << ',' << flow_kind_name(row.flow) << ','
           << row.cells_hit << ',' << row.cells_total << ',' << format_real(row.coverage)
           << ',' << verdict_name(row.verdict) << '\n';
    }
}

} // namespace horoflow
