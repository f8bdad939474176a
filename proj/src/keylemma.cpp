#include "horoflow/keylemma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "json.hpp"

#include "horoflow/error.hpp"
#include "horoflow/textio.hpp"

namespace horoflow {

namespace {

constexpr double kCrossDedupTol = 1e-6; // crossings equal in (t, length)
constexpr double kBoundTol = 1e-8;      // slack on the Busemann band bounds
constexpr double kGoldenTol = 1e-8;     // horocycle-time search resolution
const double kTwoLog2 = 2.0 * std::log(2.0);

std::vector<int> inverse_word(const std::vector<int>& word) {
    std::vector<int> out(word.rbegin(), word.rend());
    for (int& t : out)
        t = -t;
    return out;
}

MoebiusMap matrix_power(const MoebiusMap& m, int k) {
    MoebiusMap out = MoebiusMap::identity();
    for (int i = 0; i < k; ++i)
        out = out * m;
    return out;
}

std::vector<int> repeated_word(const std::vector<int>& word, int k) {
    std::vector<int> out;
    out.reserve(word.size() * static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        out.insert(out.end(), word.begin(), word.end());
    return out;
}

void validate_band(double band_lo, double band_hi) {
    if (!(band_lo > 0.0) || !(band_hi >= band_lo) || !std::isfinite(band_hi))
        throw Error(Err::Validation, "band must satisfy 0 < lo <= hi");
}

// Distance from z to the geodesic segment between i and i*e^length. The
// foot of the perpendicular from z onto the vertical axis is at height |z|,
// so inside the segment's height range the axis distance asinh(|x|/y) is
// exact; otherwise the nearer endpoint realizes the distance.
double tube_distance(const HPoint& z, double length) {
    const double r = std::hypot(z.re, z.im);
    const double hi = std::exp(length);
    if (r >= 1.0 && r <= hi)
        return std::asinh(std::fabs(z.re) / z.im);
    const HPoint end = (r < 1.0) ? HPoint(0.0, 1.0) : HPoint(0.0, hi);
    return hyp_distance(z, end);
}

double frame_error_at(const MoebiusMap& g, const Frame& u, double t0, double s) {
    const MoebiusMap moved = g * horocycle_flow(u, s).g;
    return projective_distance(moved, geodesic_flow(u, t0).g);
}

// The error as a function of s is dominated far from the optimum by the
// linear entries of g * u_s, so a coarse scan localizes the global basin
// and golden-section refinement inside it converges.
std::pair<double, double> best_horocycle_time(const MoebiusMap& g, const Frame& u,
                                              double t0, double bracket) {
    const int kScan = 4096;
    double best_s = 0.0;
    double best_f = std::numeric_limits<double>::infinity();
    const double step = 2.0 * bracket / kScan;
    for (int i = 0; i <= kScan; ++i) {
        const double s = -bracket + step * i;
        const double f = frame_error_at(g, u, t0, s);
        if (f < best_f) {
            best_f = f;
            best_s = s;
        }
    }
    double a = best_s - step;
    double b = best_s + step;
    const double invgr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invgr * (b - a);
    double d = a + invgr * (b - a);
    double fc = frame_error_at(g, u, t0, c);
    double fd = frame_error_at(g, u, t0, d);
    while (b - a > kGoldenTol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invgr * (b - a);
            fc = frame_error_at(g, u, t0, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invgr * (b - a);
            fd = frame_error_at(g, u, t0, d);
        }
    }
    const double s = 0.5 * (a + b);
    return {s, frame_error_at(g, u, t0, s)};
}

} // namespace

MoebiusMap standardize_frame(const Frame& u) { return u.g.inverse(); }

std::vector<CrossingRecord> find_crossings(const std::vector<GroupElement>& elements,
                                           const Frame& u, double band_lo,
                                           double band_hi, double horizon) {
    validate_band(band_lo, band_hi);
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw Error(Err::Validation, "horizon must be positive");
    const MoebiusMap c = standardize_frame(u);
    const MoebiusMap cinv = c.inverse();

    std::vector<CrossingRecord> records;
    for (const GroupElement& elem : elements) {
        const MoebiusMap m = (c * elem.matrix) * cinv;
        if (classify_isometry(m) != IsometryClass::HYPERBOLIC)
            continue;
        const AxisData ax = axis_data(m);
        if (ax.translation_length < band_lo - 1e-12 ||
            ax.translation_length > band_hi + 1e-12)
            continue;
        if (ax.axis.endpoint_minus.infinite || ax.axis.endpoint_plus.infinite)
            continue;
        const double e0 = ax.axis.endpoint_minus.v;
        const double e1 = ax.axis.endpoint_plus.v;
        const double p = std::min(e0, e1);
        const double q = std::max(e0, e1);
        if (!(p < 0.0 && q > 0.0))
            continue;
        const double t = 0.5 * std::log(-p * q);
        if (!(t > 0.0 && t <= horizon))
            continue;

        CrossingRecord rec;
        rec.t = t;
        const HPoint hit(0.0, std::exp(t));
        double ang =
            std::fabs(wrap_angle(direction_toward(hit, ax.axis.endpoint_plus) - M_PI / 2.0));
        if (ang > M_PI / 2.0) {
            ang = M_PI - ang;
            rec.geodesic.element =
                GroupElement{m.inverse(), inverse_word(elem.word)};
            rec.geodesic.repelling = ax.axis.endpoint_plus;
            rec.geodesic.attracting = ax.axis.endpoint_minus;
        } else {
            rec.geodesic.element = GroupElement{m, elem.word};
            rec.geodesic.repelling = ax.axis.endpoint_minus;
            rec.geodesic.attracting = ax.axis.endpoint_plus;
        }
        rec.geodesic.length = ax.translation_length;
        rec.angle = ang;
        records.push_back(std::move(rec));
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const CrossingRecord& lhs, const CrossingRecord& rhs) {
                         return lhs.t < rhs.t;
                     });
    std::vector<CrossingRecord> unique;
    for (CrossingRecord& rec : records) {
        bool dup = false;
        for (auto it = unique.rbegin(); it != unique.rend(); ++it) {
            if (rec.t - it->t > kCrossDedupTol)
                break;
            if (std::fabs(rec.geodesic.length - it->geodesic.length) <= kCrossDedupTol) {
                dup = true;
                break;
            }
        }
        if (!dup)
            unique.push_back(std::move(rec));
    }
    return unique;
}

int select_power(double band_lo, double margin) {
    if (!(band_lo > 0.0) || !std::isfinite(band_lo))
        throw Error(Err::Validation, "band_lo must be positive");
    if (!(margin >= 0.0) || !std::isfinite(margin))
        throw Error(Err::Validation, "margin must be nonnegative");
    const double need = std::max(margin, 1e-12);
    const double guess = (need + kTwoLog2) / band_lo;
    if (guess > 1e6)
        throw Error(Err::Validation, "required power exceeds 1e6");
    int k = std::max(1, static_cast<int>(std::ceil(guess)));
    while (k > 1 && (k - 1) * band_lo - kTwoLog2 >= need)
        --k;
    while (k * band_lo - kTwoLog2 < need)
        ++k;
    return k;
}

BusemannBoundResult busemann_bound_check(const MoebiusMap& gamma, int k,
                                         double band_lo, double band_hi) {
    if (k < 1)
        throw Error(Err::Validation, "power must be >= 1");
    validate_band(band_lo, band_hi);
    const MoebiusMap gk = matrix_power(gamma, k);
    const BoundaryPoint xi = moebius_apply(gk, BoundaryPoint::infinity());
    if (xi.infinite)
        throw Error(Err::DegenerateXi, "gamma^k fixes infinity");
    BusemannBoundResult res;
    res.value = busemann(xi, HPoint(0.0, 1.0), moebius_apply(gk, HPoint(0.0, 1.0)));
    res.lower_ok = res.value >= k * band_lo - kTwoLog2 - kBoundTol;
    res.upper_ok = res.value <= k * band_hi + kBoundTol;
    return res;
}

KeyLemmaRun verify_convergence(const Frame& u, const std::vector<CrossingRecord>& crossings,
                               int k, double band_lo, double band_hi, double eps_xi,
                               double eps_b) {
    if (crossings.size() < 5)
        throw Error(Err::Validation, "need at least 5 crossings");
    if (k < 1)
        throw Error(Err::Validation, "power must be >= 1");
    validate_band(band_lo, band_hi);
    if (!(eps_xi > 0.0) || !(eps_b > 0.0))
        throw Error(Err::Validation, "tolerances must be positive");

    KeyLemmaRun run;
    run.u = u;
    run.band_lo = band_lo;
    run.band_hi = band_hi;
    run.power = k;
    run.crossings = crossings;

    const std::size_t n = crossings.size();
    std::vector<MoebiusMap> powers(n);
    std::vector<double> values(n);
    std::vector<double> xi_abs(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const MoebiusMap gk =
            matrix_power(crossings[static_cast<std::size_t>(i)].geodesic.element.matrix, k);
        powers[static_cast<std::size_t>(i)] = gk;
        const BoundaryPoint xi = moebius_apply(gk, BoundaryPoint::infinity());
        xi_abs[static_cast<std::size_t>(i)] =
            xi.infinite ? std::numeric_limits<double>::infinity() : std::fabs(xi.v);
        values[static_cast<std::size_t>(i)] =
            busemann(xi, HPoint(0.0, 1.0), moebius_apply(gk, HPoint(0.0, 1.0)));
    }
    run.busemann_values = values;

    // Largest cluster of the sorted values under gap eps_b; ties go to the
    // cluster with the smallest values, so the outcome is deterministic.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        if (values[lhs] != values[rhs])
            return values[lhs] < values[rhs];
        return lhs < rhs;
    });
    std::size_t best_begin = 0, best_size = 0;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || values[order[i]] - values[order[i - 1]] > eps_b) {
            if (i - begin > best_size) {
                best_size = i - begin;
                best_begin = begin;
            }
            begin = i;
        }
    }
    if (best_size < 3)
        throw Error(Err::NoCluster, "no Busemann cluster of size >= 3");
    double sum = 0.0;
    for (std::size_t i = best_begin; i < best_begin + best_size; ++i)
        sum += values[order[i]];
    run.t0 = sum / static_cast<double>(best_size);

    const double escape = 1.0 / eps_xi;
    bool any_escape = false;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        const bool escaped = xi_abs[i] >= escape;
        any_escape = any_escape || escaped;
        if (escaped && std::fabs(values[i] - run.t0) <= eps_b)
            candidates.push_back(i);
    }
    if (!any_escape)
        throw Error(Err::EscapeFail, "no boundary image beyond 1/eps_xi");

    double t_last = 0.0;
    for (const CrossingRecord& rec : crossings)
        t_last = std::max(t_last, rec.t);
    const double bracket = 10.0 * std::exp(t_last);
    const MoebiusMap c = standardize_frame(u);
    const MoebiusMap cinv = c.inverse();

    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t idx : candidates) {
        const MoebiusMap g_orig = (cinv * powers[idx]) * c;
        const auto [s, err] = best_horocycle_time(g_orig, u, run.t0, bracket);
        if (err <= best_err) {
            best_err = err;
            run.selected.push_back(idx);
            ShadowWitness w;
            w.element = GroupElement{
                g_orig, repeated_word(crossings[idx].geodesic.element.word, k)};
            w.s = s;
            w.frame_error = err;
            run.witnesses.push_back(std::move(w));
        }
    }
    return run;
}

HoroballProbe horocyclic_endpoint_test(const GroupPresentation& group, const Frame& u,
                                       int depth) {
    if (depth < 1)
        throw Error(Err::Validation, "depth must be >= 1");
    const FrameGeometry geo = frame_geometry(u);
    const std::vector<GroupElement> pool = enumerate_elements(group, depth);

    // BFS order groups the pool by word length already.
    std::size_t j = 0;
    HoroballProbe probe;
    probe.levels.resize(static_cast<std::size_t>(depth));
    double deepest = 0.0; // identity contributes B = 0
    for (int d = 1; d <= depth; ++d) {
        std::size_t begin = j;
        while (j < pool.size() && pool[j].word.size() == static_cast<std::size_t>(d))
            ++j;
        double level_max = -std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(max : level_max)
        for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(begin);
             i < static_cast<std::ptrdiff_t>(j); ++i) {
            const HPoint moved =
                moebius_apply(pool[static_cast<std::size_t>(i)].matrix, geo.base);
            const double b = busemann(geo.forward, geo.base, moved);
            level_max = std::max(level_max, b);
        }
        if (level_max > deepest)
            deepest = level_max;
        // + 0.0 turns a -0.0 level into +0.0 so reports print "0".
        probe.levels[static_cast<std::size_t>(d - 1)] = -deepest + 0.0;
    }
    probe.entered = true;
    double prev = 0.0; // level of the trivial orbit point
    for (double level : probe.levels) {
        if (!(level < prev))
            probe.entered = false;
        prev = level;
    }
    return probe;
}

KeyLemmaRun run_kernel_cover(const GroupPresentation& group, const Frame& u,
                             const KernelCoverConfig& config) {
    if (group.kernel_weights.empty())
        throw Error(Err::Validation, "group carries no kernel weights");
    if (config.max_word_length < 1)
        throw Error(Err::Validation, "max_word_length must be >= 1");
    if (!(config.tube_radius > 0.0) || !(config.tube_length > 0.0))
        throw Error(Err::Validation, "tube dimensions must be positive");
    if (!(config.band_factor >= 1.0))
        throw Error(Err::Validation, "band_factor must be >= 1");

    const MoebiusMap c = standardize_frame(u);
    const HPoint base = frame_geometry(u).base;
    EnumerationOptions opts;
    opts.max_word_length = config.max_word_length;
    opts.element_cap = config.element_cap;
    opts.keep = [c, base, &config](const MoebiusMap& m) {
        const HPoint z = moebius_apply(c, moebius_apply(m, base));
        return tube_distance(z, config.tube_length) <= config.tube_radius;
    };
    const std::vector<GroupElement> pool = enumerate_elements(group, opts);

    const auto in_kernel = kernel_filter(group, group.kernel_weights);
    std::vector<GroupElement> kernel_pool;
    for (const GroupElement& elem : pool)
        if (in_kernel(elem))
            kernel_pool.push_back(elem);

    double band_lo = config.band_lo;
    double band_hi = config.band_hi;
    if (!(band_hi > 0.0)) {
        double a0 = std::numeric_limits<double>::infinity();
        for (const GroupElement& elem : kernel_pool)
            if (classify_isometry(elem.matrix) == IsometryClass::HYPERBOLIC)
                a0 = std::min(a0, axis_data(elem.matrix).translation_length);
        // Starved outcomes are inconclusive, not misuse: a longer word length
        // or a wider tube might still produce the cluster.
        if (!std::isfinite(a0))
            throw Error(Err::NoCluster, "no hyperbolic kernel element found; "
                                        "increase max_word_length or tube_radius");
        band_lo = a0;
        band_hi = config.band_factor * a0;
    }

    const std::vector<CrossingRecord> crossings =
        find_crossings(kernel_pool, u, band_lo, band_hi, config.horizon);
    if (crossings.size() < 5)
        throw Error(Err::NoCluster, "fewer than 5 crossings found; "
                                    "increase max_word_length or tube_radius");
    const int k = select_power(band_lo, config.margin);
    return verify_convergence(u, crossings, k, band_lo, band_hi,
                              config.eps_xi, config.eps_b);
}

void write_run_json(std::ostream& os, const KeyLemmaRun& run) {
    nlohmann::json j;
    j["band"] = {run.band_lo, run.band_hi};
    j["power"] = run.power;
    j["t0"] = run.t0;
    j["busemann"] = run.busemann_values;
    auto crossings = nlohmann::json::array();
    for (const CrossingRecord& rec : run.crossings)
        crossings.push_back({{"t", rec.t},
                             {"angle", rec.angle},
                             {"length", rec.geodesic.length},
                             {"word", rec.geodesic.element.word}});
    j["crossings"] = std::move(crossings);
    j["selected"] = run.selected;
    auto witnesses = nlohmann::json::array();
    for (const ShadowWitness& w : run.witnesses)
        witnesses.push_back(
            {{"s", w.s}, {"frame_error", w.frame_error}, {"word", w.element.word}});
    j["witnesses"] = std::move(witnesses);
    os << j.dump(2) << '\n';
}

void write_crossings_csv(std::ostream& os, const KeyLemmaRun& run) {
    std::vector<std::ptrdiff_t> witness_at(run.crossings.size(), -1);
    for (std::size_t i = 0; i < run.selected.size(); ++i)
        if (run.selected[i] < witness_at.size())
            witness_at[run.selected[i]] = static_cast<std::ptrdiff_t>(i);
    os << "index,t,angle,length,busemann,selected,s,frame_error\n";
    for (std::size_t i = 0; i < run.crossings.size(); ++i) {
        const CrossingRecord& rec = run.crossings[i];
        os << i << ',' << format_real(rec.t) << ',' << format_real(rec.angle) << ','
           << format_real(rec.geodesic.length) << ',';
        if (i < run.busemann_values.size())
            os << format_real(run.busemann_values[i]);
        const std::ptrdiff_t w = witness_at[i];
        os << ',' << (w >= 0 ? 1 : 0) << ',';
        if (w >= 0)
            os << format_real(run.witnesses[static_cast<std::size_t>(w)].s);
        os << ',';
        if (w >= 0)
            os << format_real(run.witnesses[static_cast<std::size_t>(w)].frame_error);
        os << '\n';
    }
}

} // namespace horoflow
