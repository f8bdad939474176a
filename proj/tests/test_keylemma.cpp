#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"

#include "horoflow/fuchsian.hpp"
#include "horoflow/hyperbolic.hpp"
#include "horoflow/keylemma.hpp"

using namespace horoflow;

namespace {

std::mt19937_64 rng_for(const char* tag) {
    std::seed_seq seq(tag, tag + std::char_traits<char>::length(tag));
    return std::mt19937_64(seq);
}

// Maps (0, infinity) to (p, q), so conjugating a diagonal matrix by this
// yields an element with axis endpoints p (repelling) and q (attracting).
MoebiusMap endpoints_map(double p, double q) {
    MoebiusMap m{q, p, 1.0, 1.0};
    return m.normalized();
}

MoebiusMap axis_element(double p, double q, double len) {
    const MoebiusMap a{std::exp(len / 2.0), 0.0, 0.0, std::exp(-len / 2.0)};
    const MoebiusMap r = endpoints_map(p, q);
    return (r * a) * r.inverse();
}

double busemann_inf(const HPoint& x, const HPoint& y) {
    return busemann(BoundaryPoint::infinity(), x, y);
}

GroupPresentation desk_group() {
    GroupPresentation g = genus2_octagon_group();
    g.kernel_weights = {1, 0, 0, 0};
    return g;
}

KernelCoverConfig small_config() {
    KernelCoverConfig cfg;
    cfg.max_word_length = 6;
    cfg.tube_radius = 8.0;
    cfg.tube_length = 10.0;
    cfg.horizon = 10.0;
    return cfg;
}

} // namespace

TEST_CASE("standardize_frame conjugates the frame to the identity") {
    CHECK(projectively_equal(standardize_frame(Frame{}), MoebiusMap::identity()));

    auto rng = rng_for("standardize");
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const GroupPresentation G = genus2_octagon_group();
    for (int trial = 0; trial < 50; ++trial) {
        const HPoint base(3.0 * U(rng), 0.2 + 2.0 * std::fabs(U(rng)));
        const Frame u = frame_at(base, 3.0 * U(rng));
        const MoebiusMap c = standardize_frame(u);
        CHECK(projectively_equal(c * u.g, MoebiusMap::identity()));
        // Standardized frames look down the vertical ray toward infinity.
        const Frame moved{c * u.g};
        CHECK(frame_geometry(moved).forward.infinite);
        // Conjugation preserves translation length.
        const MoebiusMap g = word_matrix(G, {1, 2, -1, 3});
        const MoebiusMap conj = (c * g) * c.inverse();
        CHECK(axis_data(g).translation_length ==
              doctest::Approx(axis_data(conj).translation_length).epsilon(1e-10));
    }
}

TEST_CASE("crossing of the axis with endpoints (-1, 4)") {
    const MoebiusMap g = axis_element(-1.0, 4.0, 2.0);
    const GroupElement elem{g, {}};
    const Frame u;

    auto recs = find_crossings({elem}, u, 1.0, 3.0, 1.0);
    REQUIRE(recs.size() == 1);
    const CrossingRecord& rec = recs[0];
    CHECK(rec.t == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(rec.geodesic.length == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rec.geodesic.attracting.v == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(rec.geodesic.repelling.v == doctest::Approx(-1.0).epsilon(1e-9));
    // Tangent direction at the hit point (h, c0)/r against the vertical.
    CHECK(rec.angle == doctest::Approx(std::atan2(2.0, 1.5)).epsilon(1e-10));
    CHECK(rec.angle > 0.0);
    CHECK(rec.angle <= M_PI / 2.0 + 1e-9);

    // Direct circle/line intersection: semicircle over (p, q) meets the
    // imaginary axis at height sqrt(r^2 - c0^2) = sqrt(-p q).
    const double p = rec.geodesic.repelling.v;
    const double q = rec.geodesic.attracting.v;
    const double c0 = 0.5 * (p + q);
    const double r = 0.5 * (q - p);
    CHECK(std::exp(rec.t) == doctest::Approx(std::sqrt(r * r - c0 * c0)).epsilon(1e-10));

    SUBCASE("horizon below the crossing excludes it") {
        CHECK(find_crossings({elem}, u, 1.0, 3.0, 0.5).empty());
    }
    SUBCASE("band not containing the length excludes it") {
        CHECK(find_crossings({elem}, u, 2.5, 3.0, 1.0).empty());
    }
    SUBCASE("same-sign endpoints never cross the ray") {
        const GroupElement off{axis_element(1.0, 4.0, 2.0), {}};
        CHECK(find_crossings({off}, u, 1.0, 3.0, 1.0).empty());
    }
    SUBCASE("vertical axis is excluded") {
        const GroupElement vert{MoebiusMap{std::exp(1.0), 0.0, 0.0, std::exp(-1.0)}, {}};
        CHECK(find_crossings({vert}, u, 1.0, 3.0, 1.0).empty());
    }
    SUBCASE("empty input is a valid empty result") {
        CHECK(find_crossings({}, u, 1.0, 3.0, 1.0).empty());
    }
    SUBCASE("band and horizon are validated") {
        CHECK_THROWS_AS((void)find_crossings({elem}, u, -1.0, 3.0, 1.0), Error);
        CHECK_THROWS_AS((void)find_crossings({elem}, u, 3.0, 1.0, 1.0), Error);
        CHECK_THROWS_AS((void)find_crossings({elem}, u, 1.0, 3.0, 0.0), Error);
    }
}

TEST_CASE("orientation normalization flips the angle across pi/2") {
    const MoebiusMap g = axis_element(-1.0, 4.0, 2.0);
    const Frame u;
    // Feeding the inverse must produce the same normalized record.
    auto fwd = find_crossings({GroupElement{g, {}}}, u, 1.0, 3.0, 1.0);
    auto inv = find_crossings({GroupElement{g.inverse(), {}}}, u, 1.0, 3.0, 1.0);
    REQUIRE(fwd.size() == 1);
    REQUIRE(inv.size() == 1);
    CHECK(projectively_equal(fwd[0].geodesic.element.matrix, inv[0].geodesic.element.matrix));
    CHECK(fwd[0].angle == doctest::Approx(inv[0].angle).epsilon(1e-12));
    CHECK(fwd[0].geodesic.attracting.v == doctest::Approx(inv[0].geodesic.attracting.v));

    // The raw (unnormalized) angle of the inverse sits at pi minus the
    // normalized one.
    const HPoint hit(0.0, 2.0);
    const double toward_attract =
        std::fabs(wrap_angle(direction_toward(hit, BoundaryPoint::at(4.0)) - M_PI / 2.0));
    const double toward_repel =
        std::fabs(wrap_angle(direction_toward(hit, BoundaryPoint::at(-1.0)) - M_PI / 2.0));
    CHECK(toward_attract + toward_repel == doctest::Approx(M_PI).epsilon(1e-12));
    CHECK(fwd[0].angle == doctest::Approx(toward_attract).epsilon(1e-12));
}

TEST_CASE("find_crossings is equivariant under frame conjugation") {
    const GroupPresentation G = genus2_octagon_group();
    const auto pool = enumerate_elements(G, 4);
    const MoebiusMap h = word_matrix(G, {1, 2});
    const Frame u{h};
    const double lo = 2.0, hi = 9.5, horizon = 6.0;

    const auto under_frame = find_crossings(pool, u, lo, hi, horizon);
    std::vector<GroupElement> conj_pool;
    const MoebiusMap hinv = h.inverse();
    for (const GroupElement& e : pool)
        conj_pool.push_back(GroupElement{(hinv * e.matrix) * h, e.word});
    const auto under_identity = find_crossings(conj_pool, Frame{}, lo, hi, horizon);

    REQUIRE(under_frame.size() == under_identity.size());
    REQUIRE(under_frame.size() >= 3);
    for (std::size_t i = 0; i < under_frame.size(); ++i) {
        CHECK(under_frame[i].t == doctest::Approx(under_identity[i].t).epsilon(1e-9));
        CHECK(under_frame[i].angle == doctest::Approx(under_identity[i].angle).epsilon(1e-9));
        CHECK(under_frame[i].geodesic.length ==
              doctest::Approx(under_identity[i].geodesic.length).epsilon(1e-9));
    }
    // Crossings arrive sorted by t.
    for (std::size_t i = 1; i < under_frame.size(); ++i)
        CHECK(under_frame[i].t >= under_frame[i - 1].t);
}

TEST_CASE("select_power picks the smallest admissible exponent") {
    CHECK(select_power(0.5, 0.1) == 3);
    CHECK(select_power(2.0, 0.0) == 1);
    // Exact boundary: margin 0 is read as "strictly positive", so the
    // k = 1 candidate with k*a - 2 ln 2 = 0 is rejected.
    CHECK(select_power(2.0 * std::log(2.0), 0.0) == 2);
    CHECK(select_power(0.5, 0.0) == 3);
    CHECK(select_power(10.0, 5.0) == 1);
    CHECK(select_power(0.1, 1.0) == 24);
    for (double a : {0.3, 0.7, 1.1, 2.9}) {
        for (double margin : {0.0, 0.2, 1.7}) {
            const int k = select_power(a, margin);
            const double need = std::max(margin, 1e-12);
            CHECK(k * a - 2.0 * std::log(2.0) >= need);
            if (k > 1)
                CHECK((k - 1) * a - 2.0 * std::log(2.0) < need);
        }
    }
    CHECK_THROWS_AS((void)select_power(0.0, 0.0), Error);
    CHECK_THROWS_AS((void)select_power(1.0, -0.1), Error);
}

TEST_CASE("busemann_bound_check pins B between the band bounds") {
    const MoebiusMap g = axis_element(-1.0, 4.0, 2.0);

    SUBCASE("value matches a direct evaluation") {
        const auto res = busemann_bound_check(g, 1, 1.0, 3.0);
        const BoundaryPoint xi = moebius_apply(g, BoundaryPoint::infinity());
        const double direct = busemann(xi, HPoint(0.0, 1.0), moebius_apply(g, HPoint(0.0, 1.0)));
        CHECK(res.value == doctest::Approx(direct).epsilon(1e-12));
        CHECK(res.lower_ok);
        CHECK(res.upper_ok);
        // Per-element band: B lies within [len - 2 ln 2, len].
        CHECK(res.value >= 2.0 - 2.0 * std::log(2.0) - 1e-9);
        CHECK(res.value <= 2.0 + 1e-9);
    }
    SUBCASE("k scaling keeps B below k times the upper bound") {
        for (int k = 1; k <= 8; ++k) {
            const auto res = busemann_bound_check(g, k, 1.0, 3.0);
            CHECK(res.upper_ok);
            CHECK(res.lower_ok);
            CHECK(res.value <= k * 3.0 + 1e-8);
            CHECK(res.value >= k * 1.0 - 2.0 * std::log(2.0) - 1e-8);
        }
    }
    SUBCASE("vertical axis raises DEGENERATE_XI") {
        const MoebiusMap vert{std::exp(1.0), 0.0, 0.0, std::exp(-1.0)};
        CHECK_THROWS_WITH_AS((void)busemann_bound_check(vert, 1, 1.0, 3.0),
                             doctest::Contains("DEGENERATE_XI"), Error);
    }
    SUBCASE("power and band are validated") {
        CHECK_THROWS_AS((void)busemann_bound_check(g, 0, 1.0, 3.0), Error);
        CHECK_THROWS_AS((void)busemann_bound_check(g, 1, 0.0, 3.0), Error);
    }
    SUBCASE("angle swept toward pi/2 still satisfies the bounds") {
        // Rotate the axis around its crossing point so the intersection
        // angle approaches a right angle: endpoints (-q0, q0) give the
        // perpendicular configuration.
        for (double skew : {4.0, 2.5, 1.6, 1.15, 1.01, 1.0001}) {
            const double h = 2.0;
            const MoebiusMap m = axis_element(-h * h / (h * skew), h * skew, 2.0);
            const auto recs = find_crossings({GroupElement{m, {}}}, Frame{}, 1.0, 3.0, 1.0);
            REQUIRE(recs.size() == 1);
            const auto res =
                busemann_bound_check(recs[0].geodesic.element.matrix, 1, 1.0, 3.0);
            CHECK(res.lower_ok);
            CHECK(res.upper_ok);
        }
        // skew -> 1 is the right-angle limit.
        const auto perp =
            find_crossings({GroupElement{axis_element(-2.0, 2.0, 2.0), {}}}, Frame{}, 1.0,
                           3.0, 1.0);
        REQUIRE(perp.size() == 1);
        CHECK(perp[0].angle == doctest::Approx(M_PI / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("three-term cocycle decomposition through the crossing point") {
    const GroupPresentation G = desk_group();
    const Frame u;
    KeyLemmaRun run = run_kernel_cover(G, u, small_config());
    REQUIRE(run.crossings.size() >= 20);

    const double b = run.band_hi;
    for (std::size_t i = 0; i < 20; ++i) {
        const CrossingRecord& rec = run.crossings[i];
        const MoebiusMap g = rec.geodesic.element.matrix;
        const MoebiusMap ginv = g.inverse();
        const HPoint base(0.0, 1.0);
        const HPoint ray_hit(0.0, std::exp(rec.t));
        const HPoint gi_inv = moebius_apply(ginv, base);
        const HPoint gr_inv = moebius_apply(ginv, ray_hit);

        // Moving the configuration by gamma^{-1} turns B at gamma*infinity
        // into B at infinity.
        const double B = busemann_bound_check(g, 1, run.band_lo, b).value;
        CHECK(B == doctest::Approx(busemann_inf(gi_inv, base)).epsilon(1e-8));

        const double term1 = busemann_inf(gi_inv, gr_inv);
        const double term2 = busemann_inf(gr_inv, ray_hit);
        const double term3 = busemann_inf(ray_hit, base);
        CHECK(term1 + term2 + term3 == doctest::Approx(B).epsilon(1e-8));
        // The outer terms are the ray pieces: B_inf along the vertical ray
        // is plus/minus the ray parameter.
        CHECK(term3 == doctest::Approx(-rec.t).epsilon(1e-10));

        // Middle hop stays on the closed geodesic: |B| <= d = length <= b.
        const double hop = hyp_distance(gr_inv, ray_hit);
        CHECK(std::fabs(term2) <= hop + 1e-9);
        CHECK(hop == doctest::Approx(rec.geodesic.length).epsilon(1e-8));
        CHECK(hop <= b + 1e-9);
    }
}

TEST_CASE("verify_convergence on a synthetic crossing family") {
    // Seven nearby conjugates of one hyperbolic element: axes straddle the
    // ray with nearly equal Busemann values (a cluster), boundary images
    // near q, well short of any real escape.
    const Frame u;
    std::vector<CrossingRecord> recs;
    std::vector<GroupElement> elems;
    for (int i = 0; i < 7; ++i) {
        const double p = -1.0 - 0.01 * i;
        const double q = 1.5 + 0.013 * i;
        elems.push_back(GroupElement{axis_element(p, q, 2.0), {}});
    }
    recs = find_crossings(elems, u, 1.0, 3.0, 2.0);
    REQUIRE(recs.size() == 7);

    SUBCASE("happy path: cluster, escape at a loose threshold, witnesses") {
        KeyLemmaRun run = verify_convergence(u, recs, 1, 1.0, 3.0, 1.0, 0.05);
        CHECK(run.t0 > 0.0);
        CHECK(run.busemann_values.size() == 7);
        const double bmin = *std::min_element(run.busemann_values.begin(),
                                              run.busemann_values.end());
        const double bmax = *std::max_element(run.busemann_values.begin(),
                                              run.busemann_values.end());
        CHECK(run.t0 >= bmin);
        CHECK(run.t0 <= bmax);
        REQUIRE(!run.selected.empty());
        REQUIRE(run.selected.size() == run.witnesses.size());

        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < run.witnesses.size(); ++i) {
            const std::size_t idx = run.selected[i];
            CHECK(std::fabs(run.busemann_values[idx] - run.t0) <= 0.05 + 1e-12);
            const double xi =
                std::fabs(moebius_apply(recs[idx].geodesic.element.matrix,
                                        BoundaryPoint::infinity())
                              .v);
            CHECK(xi >= 1.0);
            const ShadowWitness& w = run.witnesses[i];
            // Stored error is exactly the projective frame distance at s.
            const double err = projective_distance(
                w.element.matrix * horocycle_flow(u, w.s).g, geodesic_flow(u, run.t0).g);
            CHECK(w.frame_error == doctest::Approx(err).epsilon(1e-12));
            CHECK(w.frame_error <= prev);
            prev = w.frame_error;
        }

        // The bracketed search beats a dense grid over the same bracket.
        const ShadowWitness& w0 = run.witnesses.front();
        double t_last = 0.0;
        for (const auto& rec : recs)
            t_last = std::max(t_last, rec.t);
        const double bracket = 10.0 * std::exp(t_last);
        double grid_best = std::numeric_limits<double>::infinity();
        for (double s = -bracket; s <= bracket; s += 0.01)
            grid_best = std::min(
                grid_best,
                projective_distance(w0.element.matrix * horocycle_flow(u, s).g,
                                    geodesic_flow(u, run.t0).g));
        CHECK(w0.frame_error <= grid_best + 1e-9);
    }
    SUBCASE("tight cluster gap leaves singletons: NO_CLUSTER") {
        CHECK_THROWS_WITH_AS(
            (void)verify_convergence(u, recs, 1, 1.0, 3.0, 1.0, 1e-9),
            doctest::Contains("NO_CLUSTER"), Error);
    }
    SUBCASE("strict escape threshold fails: ESCAPE_FAIL") {
        CHECK_THROWS_WITH_AS(
            (void)verify_convergence(u, recs, 1, 1.0, 3.0, 1e-3, 0.05),
            doctest::Contains("ESCAPE_FAIL"), Error);
    }
    SUBCASE("fewer than five crossings is a validation error") {
        std::vector<CrossingRecord> four(recs.begin(), recs.begin() + 4);
        CHECK_THROWS_AS((void)verify_convergence(u, four, 1, 1.0, 3.0, 1.0, 0.05), Error);
    }
}

TEST_CASE("cyclic input gives spaced Busemann values and NO_CLUSTER") {
    // Powers of one element all cross at the same t with lengths 2k; the
    // (t, length) dedup keeps them apart provide they differ in length, and
    // their B values are about 2 apart, far beyond the cluster gap.
    const Frame u;
    std::vector<GroupElement> powers;
    for (int k = 1; k <= 5; ++k)
        powers.push_back(GroupElement{axis_element(-1.0, 4.0, 2.0 * k), {}});
    const auto recs = find_crossings(powers, u, 2.0, 10.0, 1.0);
    REQUIRE(recs.size() == 5);
    for (const auto& rec : recs)
        CHECK(rec.t == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK_THROWS_WITH_AS((void)verify_convergence(u, recs, 1, 2.0, 10.0, 1.0, 0.05),
                         doctest::Contains("NO_CLUSTER"), Error);
}

TEST_CASE("kernel cover desk run at reduced tube size") {
    const GroupPresentation G = desk_group();
    const Frame u;
    KernelCoverConfig cfg;
    cfg.max_word_length = 12;
    cfg.tube_radius = 13.0;
    cfg.tube_length = 12.0;
    cfg.horizon = 13.0;
    KeyLemmaRun run = run_kernel_cover(G, u, cfg);

    // Frozen desk numbers for this configuration.
    CHECK(run.crossings.size() == 375);
    CHECK(run.power == 1);
    CHECK(run.band_lo == doctest::Approx(2.256767929932601).epsilon(1e-9));
    CHECK(run.band_hi == doctest::Approx(4.0 * 2.256767929932601).epsilon(1e-9));
    CHECK(run.t0 == doctest::Approx(8.045342926298273).epsilon(1e-9));
    REQUIRE(run.selected.size() == 1);
    CHECK(run.selected[0] == 319);
    CHECK(run.witnesses[0].s == doctest::Approx(274.589855327297).epsilon(1e-6));
    CHECK(run.witnesses[0].frame_error == doctest::Approx(0.386464658195).epsilon(1e-6));
    CHECK(run.witnesses[0].frame_error <= 0.5);

    CHECK(run.busemann_values.size() == run.crossings.size());
    // Every Busemann value obeys the k-scaled band bounds.
    for (const CrossingRecord& rec : run.crossings) {
        const auto res = busemann_bound_check(rec.geodesic.element.matrix, run.power,
                                              run.band_lo, run.band_hi);
        CHECK(res.lower_ok);
        CHECK(res.upper_ok);
        CHECK(rec.t > 0.0);
        CHECK(rec.t <= cfg.horizon);
        CHECK(rec.angle > 0.0);
        CHECK(rec.angle <= M_PI / 2.0 + 1e-9);
        CHECK(rec.geodesic.length >= run.band_lo - 1e-9);
        CHECK(rec.geodesic.length <= run.band_hi + 1e-9);
    }

    // Escape along the ray: boundary images over the deep half of the
    // crossing list dwarf those of the shallow half.
    double shallow = 0.0, deep = 0.0;
    const double mid = 0.5 * (run.crossings.front().t + run.crossings.back().t);
    for (const CrossingRecord& rec : run.crossings) {
        const double xi = std::fabs(
            moebius_apply(rec.geodesic.element.matrix, BoundaryPoint::infinity()).v);
        (rec.t <= mid ? shallow : deep) = std::max(rec.t <= mid ? shallow : deep, xi);
    }
    CHECK(deep > 100.0 * shallow);
    CHECK(deep >= 1e5);

    // The witness element reproduces its word and the crossing matrix.
    const ShadowWitness& w = run.witnesses[0];
    CHECK(w.element.word == run.crossings[319].geodesic.element.word);
    CHECK(projectively_equal(w.element.matrix,
                             run.crossings[319].geodesic.element.matrix, 1e-8));

    SUBCASE("run is deterministic") {
        KeyLemmaRun again = run_kernel_cover(G, u, cfg);
        std::ostringstream a, b;
        write_run_json(a, run);
        write_run_json(b, again);
        CHECK(a.str() == b.str());
    }
    SUBCASE("kernel weights are required") {
        GroupPresentation bare = genus2_octagon_group();
        CHECK_THROWS_AS((void)run_kernel_cover(bare, u, cfg), Error);
    }
    SUBCASE("an explicit band replaces the harvested one") {
        KernelCoverConfig banded = cfg;
        banded.band_lo = run.band_lo;
        banded.band_hi = run.band_hi;
        KeyLemmaRun again = run_kernel_cover(G, u, banded);
        std::ostringstream a, b;
        write_run_json(a, run);
        write_run_json(b, again);
        CHECK(a.str() == b.str());
    }
    SUBCASE("an inverted explicit band is rejected") {
        KernelCoverConfig bad = cfg;
        bad.band_lo = 4.0;
        bad.band_hi = 2.0;
        CHECK_THROWS_WITH_AS((void)run_kernel_cover(G, u, bad),
                             doctest::Contains("VALIDATION"), Error);
    }
}

TEST_CASE("cyclic deck group starves the kernel cover") {
    // All powers of a diagonal generator share the vertical axis, which can
    // never cross the standardized ray transversally, so the run is
    // inconclusive however the budget is raised.
    GroupPresentation C = cylinder_group(HyperbolicCylinder(2.0));
    C.kernel_weights = {0}; // whole group
    KernelCoverConfig cfg;
    cfg.max_word_length = 6;
    cfg.tube_radius = 8.0;
    cfg.tube_length = 10.0;
    cfg.horizon = 10.0;
    CHECK_THROWS_WITH_AS((void)run_kernel_cover(C, Frame{}, cfg),
                         doctest::Contains("NO_CLUSTER"), Error);

    // a trivial kernel has no hyperbolic element at all: same verdict
    C.kernel_weights = {1};
    CHECK_THROWS_WITH_AS((void)run_kernel_cover(C, Frame{}, cfg),
                         doctest::Contains("NO_CLUSTER"), Error);
}

TEST_CASE("horoball levels at the forward endpoint") {
    const GroupPresentation G = genus2_octagon_group();

    SUBCASE("identity frame marches straight into the horoball at infinity") {
        const auto probe = horocyclic_endpoint_test(G, Frame{}, 4);
        REQUIRE(probe.levels.size() == 4);
        const double unit = 2.0 * std::acosh(1.0 + std::sqrt(2.0));
        for (int d = 0; d < 4; ++d)
            CHECK(probe.levels[d] == doctest::Approx(-(d + 1) * unit).epsilon(1e-9));
        CHECK(probe.entered);
    }
    SUBCASE("generic frame still enters every horoball neighborhood") {
        const Frame v = frame_at(HPoint(0.37, 1.21), 0.4);
        const auto probe = horocyclic_endpoint_test(G, v, 5);
        REQUIRE(probe.levels.size() == 5);
        CHECK(probe.entered);
        for (std::size_t d = 1; d < probe.levels.size(); ++d)
            CHECK(probe.levels[d] < probe.levels[d - 1]);
        CHECK(probe.levels[0] < 0.0);
    }
    SUBCASE("deeper search never raises a level") {
        const auto d1 = horocyclic_endpoint_test(G, Frame{}, 1);
        const auto d2 = horocyclic_endpoint_test(G, Frame{}, 2);
        CHECK(d2.levels[0] == doctest::Approx(d1.levels[0]).epsilon(1e-15));
        CHECK(d2.levels[1] <= d2.levels[0]);
    }
    SUBCASE("cyclic group stalls at level zero") {
        const GroupPresentation C = cylinder_group(HyperbolicCylinder(2.0));
        const Frame w = frame_at(HPoint(0.3, 1.0), 0.5);
        REQUIRE(!frame_geometry(w).forward.infinite);
        const auto probe = horocyclic_endpoint_test(C, w, 10);
        CHECK(!probe.entered);
        for (double level : probe.levels) {
            CHECK(level >= -1e-12);
            CHECK(level <= 1e-12);
        }
    }
    SUBCASE("depth is validated") {
        CHECK_THROWS_AS((void)horocyclic_endpoint_test(G, Frame{}, 0), Error);
    }
}

TEST_CASE("run report writers") {
    const GroupPresentation G = desk_group();
    const Frame u;
    KeyLemmaRun run = run_kernel_cover(G, u, small_config());
    REQUIRE(run.crossings.size() == 113);
    REQUIRE(run.selected.size() == 1);

    SUBCASE("csv has one row per crossing with witness columns when selected") {
        std::ostringstream os;
        write_crossings_csv(os, run);
        const std::string text = os.str();
        std::istringstream in(text);
        std::string line;
        REQUIRE(std::getline(in, line));
        CHECK(line == "index,t,angle,length,busemann,selected,s,frame_error");
        std::size_t rows = 0, selected_rows = 0;
        while (std::getline(in, line)) {
            const std::size_t commas =
                static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
            CHECK(commas == 7);
            if (line.find(",1,") != std::string::npos && line.back() != ',') {
                ++selected_rows;
            } else {
                // Unselected rows leave the witness columns empty.
                CHECK(line.substr(line.size() - 2) == ",,");
            }
            ++rows;
        }
        CHECK(rows == run.crossings.size());
        CHECK(selected_rows == run.selected.size());
    }
    SUBCASE("json is parseable, complete, and stable across dumps") {
        std::ostringstream a, b;
        write_run_json(a, run);
        write_run_json(b, run);
        CHECK(a.str() == b.str());
        const auto j = nlohmann::json::parse(a.str());
        CHECK(j.at("band").size() == 2);
        CHECK(j.at("band")[0].get<double>() == doctest::Approx(run.band_lo));
        CHECK(j.at("power").get<int>() == run.power);
        CHECK(j.at("t0").get<double>() == doctest::Approx(run.t0));
        CHECK(j.at("crossings").size() == run.crossings.size());
        CHECK(j.at("busemann").size() == run.busemann_values.size());
        CHECK(j.at("selected").size() == run.selected.size());
        CHECK(j.at("witnesses").size() == run.witnesses.size());
        CHECK(j.at("crossings")[0].at("t").get<double>() ==
              doctest::Approx(run.crossings[0].t));
        CHECK(j.at("witnesses")[0].at("frame_error").get<double>() ==
              doctest::Approx(run.witnesses[0].frame_error));
    }
}
