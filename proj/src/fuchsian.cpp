#include "horoflow/fuchsian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "horoflow/error.hpp"

namespace horoflow {
namespace {

// Scale-free representative for hashing: divide by the largest-magnitude
// entry (signed), so entries land in [-1, 1] with the peak entry exactly
// +1. Deep words carry entries of size e^(length) whose determinant-based
// scale is the least reliable digit, so deduplication must not depend on
// the absolute scale at all.
MoebiusMap canonical_direction(const MoebiusMap& m) {
    const double v[4] = {m.a, m.b, m.c, m.d};
    int arg = 0;
    double best = std::fabs(v[0]);
    for (int i = 1; i < 4; ++i) {
        if (std::fabs(v[i]) > best) {
            best = std::fabs(v[i]);
            arg = i;
        }
    }
    const double s = 1.0 / v[arg];
    return {s * m.a, s * m.b, s * m.c, s * m.d};
}

double direction_gap(const MoebiusMap& cl, const MoebiusMap& cr) {
    double d1 = 0.0, d2 = 0.0;
    d1 = std::max(d1, std::fabs(cl.a - cr.a));
    d1 = std::max(d1, std::fabs(cl.b - cr.b));
    d1 = std::max(d1, std::fabs(cl.c - cr.c));
    d1 = std::max(d1, std::fabs(cl.d - cr.d));
    d2 = std::max(d2, std::fabs(cl.a + cr.a));
    d2 = std::max(d2, std::fabs(cl.b + cr.b));
    d2 = std::max(d2, std::fabs(cl.c + cr.c));
    d2 = std::max(d2, std::fabs(cl.d + cr.d));
    return std::min(d1, d2);
}

std::uint64_t mix_key(std::uint64_t h, std::int64_t k) {
    h ^= static_cast<std::uint64_t>(k) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

// Set of matrices up to sign, equality meaning projective_distance <=
// kProjTol. Buckets are keyed by quantized entries; lookups probe every
// cell a tol-ball can touch plus the sign-flipped image, so hashing can
// never split a pair the verifier would merge.
class ProjectiveSet {
public:
    bool contains(const MoebiusMap& m) const {
        const MoebiusMap cm = canonical_direction(m);
        for (double s : {1.0, -1.0}) {
            std::int64_t lo[4], hi[4];
            for (int i = 0; i < 4; ++i) {
                const double v = s * entry(cm, i);
                lo[i] = cell_index(v - kProjTol);
                hi[i] = cell_index(v + kProjTol);
            }
            std::int64_t key[4];
            for (key[0] = lo[0]; key[0] <= hi[0]; ++key[0])
                for (key[1] = lo[1]; key[1] <= hi[1]; ++key[1])
                    for (key[2] = lo[2]; key[2] <= hi[2]; ++key[2])
                        for (key[3] = lo[3]; key[3] <= hi[3]; ++key[3]) {
                            std::uint64_t h = 0;
                            for (int i = 0; i < 4; ++i) h = mix_key(h, key[i]);
                            auto it = buckets_.find(h);
                            if (it == buckets_.end()) continue;
                            for (std::uint32_t idx : it->second)
                                if (direction_gap(items_[idx], cm) <= kProjTol) return true;
                        }
        }
        return false;
    }

    void insert(const MoebiusMap& m) {
        const MoebiusMap cm = canonical_direction(m);
        std::uint64_t h = 0;
        for (int i = 0; i < 4; ++i) h = mix_key(h, cell_index(entry(cm, i)));
        buckets_[h].push_back(static_cast<std::uint32_t>(items_.size()));
        items_.push_back(cm);
    }

private:
    static constexpr double kCell = 1e-6;
    static double entry(const MoebiusMap& m, int i) {
        switch (i) {
            case 0: return m.a;
            case 1: return m.b;
            case 2: return m.c;
            default: return m.d;
        }
    }
    static std::int64_t cell_index(double v) {
        return static_cast<std::int64_t>(std::floor(v / kCell));
    }

    std::vector<MoebiusMap> items_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

MoebiusMap token_matrix(const GroupPresentation& G, int token) {
    const int n = static_cast<int>(G.generators.size());
    if (token == 0 || token > n || token < -n)
        throw Error(Err::Validation, "word token out of range");
    return token > 0 ? G.generators[token - 1] : G.generators[-token - 1].inverse();
}

// Tokens in enumeration order: +1, -1, +2, -2, ...
std::vector<int> token_order(std::size_t n_generators) {
    std::vector<int> tokens;
    tokens.reserve(2 * n_generators);
    for (int k = 1; k <= static_cast<int>(n_generators); ++k) {
        tokens.push_back(k);
        tokens.push_back(-k);
    }
    return tokens;
}

struct Candidate {
    MoebiusMap matrix;
    bool alive = false;
};

}  // namespace

void validate_presentation(const GroupPresentation& G) {
    if (G.generators.empty())
        throw Error(Err::Validation, "presentation needs at least one generator");
    if (G.names.size() != G.generators.size())
        throw Error(Err::Validation, "one name per generator required");
    const MoebiusMap id;
    for (const MoebiusMap& g : G.generators) {
        if (std::fabs(g.det() - 1.0) > kProjTol)
            throw Error(Err::BadDeterminant, "generator determinant must be 1");
        if (projectively_equal(g, id))
            throw Error(Err::Validation, "generator equals +-identity");
    }
    const int n = static_cast<int>(G.generators.size());
    for (const auto& rel : G.relators)
        for (int t : rel)
            if (t == 0 || t > n || t < -n)
                throw Error(Err::Validation, "relator token out of range");
    if (!G.kernel_weights.empty() && G.kernel_weights.size() != G.generators.size())
        throw Error(Err::Validation, "one kernel weight per generator required");
}

MoebiusMap word_matrix(const GroupPresentation& G, const std::vector<int>& word) {
    MoebiusMap m;
    for (int t : word) m = m * token_matrix(G, t);
    return m;
}

GroupElement make_element(const GroupPresentation& G, const std::vector<int>& word) {
    return GroupElement{word_matrix(G, word), word};
}

std::vector<GroupElement> enumerate_elements_serial(const GroupPresentation& G,
                                                    const EnumerationOptions& options) {
    validate_presentation(G);
    if (options.max_word_length < 1)
        throw Error(Err::Validation, "max_word_length must be at least 1");

    const std::vector<int> tokens = token_order(G.generators.size());
    std::vector<MoebiusMap> token_mats;
    for (int t : tokens) token_mats.push_back(token_matrix(G, t));
    const MoebiusMap id;

    std::vector<GroupElement> out;
    ProjectiveSet seen;
    std::size_t level_begin = 0;  // current level = [level_begin, out.size())

    for (int length = 1; length <= options.max_word_length; ++length) {
        const std::size_t level_end = out.size();
        const std::size_t first = length == 1 ? 0 : level_begin;
        const std::size_t last = length == 1 ? 1 : level_end;
        for (std::size_t j = first; j < last; ++j) {
            const MoebiusMap base = length == 1 ? id : out[j].matrix;
            const int last_token = length == 1 ? 0 : out[j].word.back();
            for (std::size_t s = 0; s < tokens.size(); ++s) {
                if (tokens[s] == -last_token) continue;
                const MoebiusMap m = base * token_mats[s];
                if (projectively_equal(m, id)) continue;
                if (options.keep && !options.keep(m)) continue;
                if (seen.contains(m)) continue;
                if (out.size() >= options.element_cap)
                    throw Error(Err::BudgetExceeded, "element cap reached");
                seen.insert(m);
                GroupElement e;
                e.matrix = m;
                if (length > 1) e.word = out[j].word;
                e.word.push_back(tokens[s]);
                out.push_back(std::move(e));
            }
        }
        level_begin = level_end;
        if (level_begin == out.size()) break;  // frontier died out
    }
    return out;
}

std::vector<GroupElement> enumerate_elements(const GroupPresentation& G,
                                             const EnumerationOptions& options) {
    validate_presentation(G);
    if (options.max_word_length < 1)
        throw Error(Err::Validation, "max_word_length must be at least 1");

    const std::vector<int> tokens = token_order(G.generators.size());
    std::vector<MoebiusMap> token_mats;
    for (int t : tokens) token_mats.push_back(token_matrix(G, t));
    const MoebiusMap id;
    const std::size_t n_tokens = tokens.size();
    constexpr std::size_t kBlock = 16384;

    std::vector<GroupElement> out;
    ProjectiveSet seen;
    std::size_t level_begin = 0;
    std::vector<Candidate> cand;

    for (int length = 1; length <= options.max_word_length; ++length) {
        const std::size_t level_end = out.size();
        const std::size_t first = length == 1 ? 0 : level_begin;
        const std::size_t last = length == 1 ? 1 : level_end;
        for (std::size_t block = first; block < last; block += kBlock) {
            const std::size_t block_end = std::min(block + kBlock, last);
            const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(block_end - block);
            cand.assign(static_cast<std::size_t>(rows) * n_tokens, Candidate{});

            // Pure per-candidate work (products, identity check, pruning)
            // runs in parallel; membership and appends stay sequential
            // below, so output order matches the serial reference exactly.
            #pragma omp parallel for schedule(static)
            for (std::ptrdiff_t r = 0; r < rows; ++r) {
                const std::size_t j = block + static_cast<std::size_t>(r);
                const MoebiusMap base = length == 1 ? id : out[j].matrix;
                const int last_token = length == 1 ? 0 : out[j].word.back();
                for (std::size_t s = 0; s < n_tokens; ++s) {
                    Candidate& c = cand[static_cast<std::size_t>(r) * n_tokens + s];
                    if (tokens[s] == -last_token) continue;
                    const MoebiusMap m = base * token_mats[s];
                    if (projectively_equal(m, id)) continue;
                    if (options.keep && !options.keep(m)) continue;
                    c.matrix = m;
                    c.alive = true;
                }
            }

            for (std::ptrdiff_t r = 0; r < rows; ++r) {
                const std::size_t j = block + static_cast<std::size_t>(r);
                for (std::size_t s = 0; s < n_tokens; ++s) {
                    const Candidate& c = cand[static_cast<std::size_t>(r) * n_tokens + s];
                    if (!c.alive) continue;
                    if (seen.contains(c.matrix)) continue;
                    if (out.size() >= options.element_cap)
                        throw Error(Err::BudgetExceeded, "element cap reached");
                    seen.insert(c.matrix);
                    GroupElement e;
                    e.matrix = c.matrix;
                    if (length > 1) e.word = out[j].word;
                    e.word.push_back(tokens[s]);
                    out.push_back(std::move(e));
                }
            }
        }
        level_begin = level_end;
        if (level_begin == out.size()) break;
    }
    return out;
}

std::vector<GroupElement> enumerate_elements(const GroupPresentation& G, int max_word_length) {
    EnumerationOptions options;
    options.max_word_length = max_word_length;
    return enumerate_elements(G, options);
}

namespace {

std::int64_t boundary_key(const BoundaryPoint& p) {
    if (p.infinite) return std::numeric_limits<std::int64_t>::max();
    return std::llround(p.v * 1e6);
}

struct GeodesicKey {
    std::int64_t length;
    std::int64_t fp_low;
    std::int64_t fp_high;
    bool operator==(const GeodesicKey& o) const {
        return length == o.length && fp_low == o.fp_low && fp_high == o.fp_high;
    }
};

struct GeodesicKeyHash {
    std::size_t operator()(const GeodesicKey& k) const {
        std::uint64_t h = 0;
        h = mix_key(h, k.length);
        h = mix_key(h, k.fp_low);
        h = mix_key(h, k.fp_high);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

std::vector<ClosedGeodesicRec> harvest_closed_geodesics(const std::vector<GroupElement>& pool,
                                                        double a, double b) {
    if (!(a > 0.0) || !(a <= b))
        throw Error(Err::Validation, "band must satisfy 0 < a <= b");
    std::vector<ClosedGeodesicRec> out;
    std::unordered_set<GeodesicKey, GeodesicKeyHash> seen;
    for (const GroupElement& e : pool) {
        if (classify_isometry(e.matrix) != IsometryClass::HYPERBOLIC) continue;
        const AxisData ax = axis_data(e.matrix);
        const double len = ax.translation_length;
        if (len < a - 1e-12 || len > b + 1e-12) continue;
        GeodesicKey key{std::llround(len * 1e6), boundary_key(ax.axis.endpoint_minus),
                        boundary_key(ax.axis.endpoint_plus)};
        if (key.fp_low > key.fp_high) std::swap(key.fp_low, key.fp_high);
        if (!seen.insert(key).second) continue;
        out.push_back(
            ClosedGeodesicRec{e, ax.axis.endpoint_minus, ax.axis.endpoint_plus, len});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ClosedGeodesicRec& x, const ClosedGeodesicRec& y) {
                         return x.length < y.length;
                     });
    return out;
}

std::vector<ClosedGeodesicRec> closed_geodesics_in_band(const GroupPresentation& G,
                                                        int max_word_length, double a, double b) {
    return harvest_closed_geodesics(enumerate_elements(G, max_word_length), a, b);
}

namespace {

// Word-matrix accumulation for the Dirichlet descent. A word moving a
// point from distance ~40 back to i has all four entries near e^{20}, and
// ad - bc of the stored entries is then meaningless (entry^2 * eps > 1),
// so det-1 rescaling must not be forced: past that scale the product is
// rescaled by its largest entry instead, which is projectively exact.
MoebiusMap compose_word(const MoebiusMap& lhs, const MoebiusMap& rhs) {
    MoebiusMap m{lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
                 lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
    const double dt = m.det();
    if (dt > 0.0 && std::isfinite(dt))
        return m.normalized();
    const double s = std::max({std::fabs(m.a), std::fabs(m.b), std::fabs(m.c),
                               std::fabs(m.d)});
    if (!(s > 0.0) || !std::isfinite(s))
        throw Error(Err::BadDeterminant, "word product is singular");
    return {m.a / s, m.b / s, m.c / s, m.d / s};
}

} // namespace

ReduceResult dirichlet_reduce(const GroupPresentation& G, const Frame& u) {
    validate_presentation(G);
    const std::vector<int> tokens = token_order(G.generators.size());
    std::vector<MoebiusMap> token_mats;
    for (int t : tokens) token_mats.push_back(token_matrix(G, t));

    const HPoint center;
    MoebiusMap applied;
    // The descent iterates on the frame matrix and reads the base point
    // off the matrix at every step. Keeping a separate point iterate looks
    // cheaper but lets the point and the recomposed frame drift onto
    // different pseudo-orbits for inputs tens of units from i, and then
    // the stall condition certifies the side-car point instead of the
    // returned frame. Evaluating candidates through the matrix makes the
    // no-improvement certificate hold for the frame that is handed back.
    // Each product also stays well conditioned this way: a frame's two
    // columns keep separate scales, so ad - bc never loses its sign.
    MoebiusMap current = u.g;
    std::vector<int> applied_tokens;  // in application order, reversed at the end

    for (long step = 0; step < 100000; ++step) {
        const double d0 = hyp_distance(moebius_apply(current, center), center);
        int best = -1;
        double best_dist = d0 - kImproveTol;
        MoebiusMap best_mat;
        for (std::size_t s = 0; s < tokens.size(); ++s) {
            const MoebiusMap moved = token_mats[s] * current;
            const double d = hyp_distance(moebius_apply(moved, center), center);
            if (d < best_dist) {
                best = static_cast<int>(s);
                best_dist = d;
                best_mat = moved;
            }
        }
        if (best < 0) {
            if (applied_tokens.empty())  // already reduced: hand back the input bitwise
                return ReduceResult{u, GroupElement{applied, {}}};
            std::reverse(applied_tokens.begin(), applied_tokens.end());
            return ReduceResult{Frame{current}, GroupElement{applied, applied_tokens}};
        }
        applied = compose_word(token_mats[static_cast<std::size_t>(best)], applied);
        current = best_mat;
        applied_tokens.push_back(tokens[static_cast<std::size_t>(best)]);
    }
    throw Error(Err::NoConvergence, "Dirichlet descent did not terminate");
}

std::function<bool(const GroupElement&)> kernel_filter(const GroupPresentation& G,
                                                       const std::vector<int>& exponent_weights) {
    if (exponent_weights.size() != G.generators.size())
        throw Error(Err::Validation, "one exponent weight per generator required");
    return [w = exponent_weights](const GroupElement& e) {
        long long sum = 0;
        for (int t : e.word) sum += t > 0 ? w[t - 1] : -w[-t - 1];
        return sum == 0;
    };
}

namespace {

// Orientation-reversing isometry z -> (p*conj(z) + q)/(r*conj(z) + s),
// real entries, negative determinant. The composition of two of them is
// the Moebius map given by the ordinary matrix product.
struct AntiMap {
    double p, q, r, s;
};

MoebiusMap reflect_twice(const AntiMap& second, const AntiMap& first) {
    MoebiusMap m{second.p * first.p + second.q * first.r,
                 second.p * first.q + second.q * first.s,
                 second.r * first.p + second.s * first.r,
                 second.r * first.q + second.s * first.s};
    return m.normalized();
}

// Reflection in the geodesic with real endpoints p < q: inversion in the
// circle |z - c| = r with c = (p+q)/2, r = (q-p)/2.
AntiMap reflection_between(double p, double q) {
    const double c = 0.5 * (p + q);
    const double r = 0.5 * std::fabs(q - p);
    return {c, r * r - c * c, 1.0, -c};
}

// Reflection in the geodesic through two interior points.
AntiMap reflection_through(cplx z1, cplx z2) {
    if (std::fabs(z1.real() - z2.real()) < 1e-13)
        return {1.0, -2.0 * z1.real(), 0.0, -1.0};
    const double c =
        (std::norm(z1) - std::norm(z2)) / (2.0 * (z1.real() - z2.real()));
    const double r2 = std::norm(z1 - cplx(c, 0.0));
    return {c, r2 - c * c, 1.0, -c};
}

cplx disk_to_halfplane(cplx w) { return cplx(0.0, 1.0) * (1.0 + w) / (1.0 - w); }

}  // namespace

GroupPresentation genus2_octagon_group() {
    // Regular octagon with vertex angle pi/4: in the unit disk the
    // vertices sit at Euclidean radius 2^(-1/4), angles (2k+1)*pi/8.
    const double rho = std::pow(2.0, -0.25);
    cplx vertex[8];
    for (int k = 0; k < 8; ++k)
        vertex[k] = disk_to_halfplane(std::polar(rho, (2 * k + 1) * M_PI / 8.0));

    // Pairing of side k onto side k+2: reflect in side k, then in the
    // mirror geodesic bisecting the two sides (the disk diameter through
    // the midpoint of side k+1, mapped to the half-plane).
    auto pair_map = [&](int k) {
        const AntiMap side = reflection_through(vertex[k], vertex[(k + 1) % 8]);
        const cplx dir = std::polar(1.0, (k + 2) * M_PI / 4.0);
        const AntiMap mirror = reflection_between(disk_to_halfplane(dir).real(),
                                                  disk_to_halfplane(-dir).real());
        return reflect_twice(mirror, side);
    };

    GroupPresentation G;
    G.name = "genus2_octagon";
    // The a-generators carry the opposite pairing orientation; this choice
    // makes the commutator relator below evaluate to +-identity.
    G.generators = {pair_map(0).inverse(), pair_map(1), pair_map(4).inverse(), pair_map(5)};
    G.names = {"a1", "b1", "a2", "b2"};
    G.relators = {{1, 2, -1, -2, 3, 4, -3, -4}};
    return G;
}

HyperbolicCylinder::HyperbolicCylinder(double l) : systole_length(l) {
    if (!(l > 0.0) || !std::isfinite(l))
        throw Error(Err::Validation, "cylinder systole length must be positive");
}

GroupPresentation cylinder_group(const HyperbolicCylinder& C) {
    GroupPresentation G;
    G.name = "cylinder";
    const double h = 0.5 * C.systole_length;
    G.generators = {MoebiusMap{std::exp(h), 0.0, 0.0, std::exp(-h)}};
    G.names = {"g"};
    return G;
}

double hypercycle_length(const HyperbolicCylinder& C, double w) {
    if (w < 0.0) throw Error(Err::Validation, "hypercycle distance must be nonnegative");
    return C.systole_length * std::cosh(w);
}

double octagon_circumradius() { return std::acosh(3.0 + 2.0 * std::sqrt(2.0)); }

}  // namespace horoflow
