#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "horoflow/fuchsian.hpp"
#include "horoflow/hyperbolic.hpp"

// Horoball shadowing along a geodesic ray.
//
// Everything here works in "standardized" coordinates: the reference frame u
// is conjugated to the identity frame, so its orbit r(t) = i*e^t is the
// vertical ray above i and its forward endpoint is infinity. A hyperbolic
// element whose axis meets that ray gives a crossing record; the Busemann
// value at the moved base point of a suitable power of the element is pinned
// between band bounds, and a subsequence of crossings drags a horocycle
// translate of u onto a single geodesic translate g_{t0}(u). The operations
// below compute the crossings, the power, the Busemann bounds, and the
// convergence witnesses, in that order.

namespace horoflow {

// One transverse intersection of a closed geodesic's axis with the
// standardized ray. The stored element is in standardized coordinates
// (conjugated by standardize_frame(u)), oriented so the angle from the
// upward ray direction to the attracting direction is at most pi/2; its
// word is carried over from the input element. The axis meets the ray at
// height e^{t} exactly.
struct CrossingRecord {
    ClosedGeodesicRec geodesic;
    double t = 0.0;     // ray parameter of the crossing, in (0, horizon]
    double angle = 0.0; // intersection angle, in (0, pi/2]
};

// Convergence witness: gamma * h_s(u) approximates g_{t0}(u). The element is
// in the original (unstandardized) coordinates and already raised to the
// power k used for the run.
struct ShadowWitness {
    GroupElement element;
    double s = 0.0;
    double frame_error = 0.0;
};

// Result of a full run: Busemann values (one per crossing, for the k-th
// power of the crossing element), the cluster value t0 they accumulate at,
// the indices of the selected escaping subsequence, and its witnesses with
// non-increasing frame errors.
struct KeyLemmaRun {
    Frame u;
    double band_lo = 0.0;
    double band_hi = 0.0;
    int power = 1;
    std::vector<CrossingRecord> crossings;
    std::vector<double> busemann_values;
    double t0 = 0.0;
    std::vector<std::size_t> selected; // indices into crossings
    std::vector<ShadowWitness> witnesses;
};

struct BusemannBoundResult {
    double value = 0.0;
    bool lower_ok = false;
    bool upper_ok = false;
};

// The conjugator c with c * u.g = identity, so that c moves u to the
// identity frame. Conjugation by c preserves translation lengths.
MoebiusMap standardize_frame(const Frame& u);

// Standardize every element by the frame, keep the hyperbolic ones with
// translation length inside [band_lo, band_hi] whose axis crosses the
// vertical ray strictly between heights 1 and e^{horizon}, and normalize
// the orientation (element replaced by its inverse when the crossing angle
// would exceed pi/2). Axes through the ray's endpoints on the boundary, in
// particular vertical axes, are excluded. Records are sorted by t; records
// agreeing in both t and length to 1e-6 are deduplicated (first kept).
// An empty result is a valid outcome, not an error.
std::vector<CrossingRecord> find_crossings(const std::vector<GroupElement>& elements,
                                           const Frame& u, double band_lo,
                                           double band_hi, double horizon);

// Smallest k >= 1 with k*band_lo - 2*log(2) >= margin. A margin below 1e-12
// is raised to 1e-12 so the bound is strictly positive.
int select_power(double band_lo, double margin);

// Busemann value B at xi = gamma^k(infinity) from i to gamma^k(i), together
// with the band bounds: lower_ok iff B >= k*band_lo - 2*log(2) - 1e-8,
// upper_ok iff B <= k*band_hi + 1e-8. gamma is expected in standardized,
// orientation-normalized coordinates. Throws DegenerateXi when gamma^k
// fixes infinity.
BusemannBoundResult busemann_bound_check(const MoebiusMap& gamma, int k,
                                         double band_lo, double band_hi);

// Assemble the run: Busemann values for the k-th powers, their largest
// cluster under gap eps_b (size >= 3 required, else NoCluster) with t0 the
// cluster mean, the subsequence whose boundary images escape past 1/eps_xi
// (EscapeFail when none does) while staying within eps_b of t0, and for
// each member the horocycle time s minimizing the projective distance of
// gamma * h_s(u) to g_{t0}(u). The subsequence is then thinned so that
// frame_error is non-increasing; selected and witnesses stay parallel.
// Needs at least 5 crossings.
KeyLemmaRun verify_convergence(const Frame& u, const std::vector<CrossingRecord>& crossings,
                               int k, double band_lo, double band_hi,
                               double eps_xi = 1e-3, double eps_b = 0.05);

// Per-depth horoball levels at the forward endpoint of u: entry d holds
// -max B_xi(base, gamma*base) over all elements of word length <= d+1.
// Levels never increase with depth; `entered` reports whether they decrease
// strictly at every step, the finite-horizon stand-in for the orbit entering
// every horoball neighborhood of xi.
struct HoroballProbe {
    std::vector<double> levels;
    bool entered = false;
};

HoroballProbe horocyclic_endpoint_test(const GroupPresentation& group, const Frame& u,
                                       int depth);

// Knobs for run_kernel_cover. The enumeration is pruned to words whose
// orbit point stays within tube_radius of the ray segment between heights
// 1 and e^{tube_length}; radii below the lattice spacing (about 3.06 for
// the octagon group) would discard every word of length one.
struct KernelCoverConfig {
    int max_word_length = 12;
    double tube_radius = 8.0;
    double tube_length = 14.0;
    double horizon = 12.0;
    double band_factor = 4.0; // band = [a0, band_factor * a0]
    double band_lo = 0.0;     // band_hi > 0 fixes the band explicitly and
    double band_hi = 0.0;     // skips the a0 harvest
    double margin = 0.0;
    double eps_xi = 1e-3;
    double eps_b = 0.05;
    std::size_t element_cap = 5000000;
};

// End-to-end driver: enumerate the kernel of the weight functional inside a
// tube around the ray, harvest the shortest length a0, run find_crossings
// over the band [a0, band_factor*a0] (or the explicit band), pick the
// power, and verify convergence. The group must carry kernel weights.
// Starvation (no hyperbolic kernel element, or fewer than 5 crossings)
// throws NoCluster: the outcome is inconclusive rather than invalid.
KeyLemmaRun run_kernel_cover(const GroupPresentation& group, const Frame& u,
                             const KernelCoverConfig& config);

// Structured report (JSON) and a flat table (CSV) with one row per crossing:
// index, t, angle, length, busemann, selected flag, and for selected rows
// the witness columns s and frame_error.
void write_run_json(std::ostream& os, const KeyLemmaRun& run);
void write_crossings_csv(std::ostream& os, const KeyLemmaRun& run);

} // namespace horoflow
