#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "horoflow/error.hpp"

// Combinatorics of a foliation suspended over the circle-doubling map.
// Leaves are towers of pairs of pants glued along cuffs; the tower of a
// base angle theta follows the two preimages of theta under doubling at
// every level, and the leaf topology is decided by whether theta is a
// periodic point. All angle arithmetic is exact on rationals.

namespace horoflow {

// Reduced rational angle p/q in [0, 1). The constructor normalizes p into
// [0, q) and divides out the gcd.
struct AngleParam {
    long long p = 0;
    long long q = 1;

    AngleParam() = default;
    AngleParam(long long p_, long long q_);

    // One doubling step 2*theta mod 1, exact.
    AngleParam doubled() const;
    // The two preimages under doubling: theta/2 and (theta+1)/2.
    std::array<AngleParam, 2> halved() const;
    // Leading binary digit: 1 iff theta >= 1/2.
    int first_digit() const { return 2 * p >= q ? 1 : 0; }

    friend bool operator==(const AngleParam& a, const AngleParam& b) {
        return a.p == b.p && a.q == b.q;
    }
};

struct DoublingOrbit {
    std::vector<AngleParam> orbit; // start through the last new value
    int preperiod = 0;
    std::optional<int> period; // unset when max_iter stopped the search
};

// Iterate theta under doubling until a value repeats or max_iter steps
// elapse. Rationals always close up within q steps: preperiod + period <= q.
DoublingOrbit doubling_orbit(const AngleParam& theta, int max_iter);

enum class LeafKind { GENUS_ONE_CANTOR_ENDS, CANTOR_TREE };

const char* leaf_kind_name(LeafKind kind);

struct LeafDescriptor {
    LeafKind kind = LeafKind::CANTOR_TREE;
    std::optional<int> period; // eventual cycle length
    int preperiod = 0;
};

// Genus-one leaf with Cantor ends iff theta is genuinely periodic
// (preperiod zero); every other rational gives a Cantor tree.
LeafDescriptor leaf_type(const AngleParam& theta);

// The gluing map h(Z, z) = (Z*z/4 + 1/2, z^2). The base coordinate z must
// lie on the unit circle (1e-9), else BaseOffCircle. When |Z| = 1 the
// image satisfies |Z2 - 1/2| = 1/4: the outer pants boundary lands on the
// inner one, and the base circle is wrapped twice.
struct GlueImage {
    std::complex<double> Z2;
    std::complex<double> z2;
};

GlueImage hirsch_glue(const std::complex<double>& Z, const std::complex<double>& z);

// Full binary tree of pants. Node ids index `nodes`; the root is id 0.
// Each node's two children carry the preimage angles of its label, in the
// order [label/2, (label+1)/2], swapped when the label's leading binary
// digit is 1 (the combinatorial form of the involution Z -> -Z). When
// theta is periodic with period m, the unique root path whose labels stay
// on the cycle is the periodic spine, and spine nodes at depths divisible
// by m are marked as handle closures.
struct PantsNode {
    AngleParam label;
    int depth = 0;
    int parent = -1;
    std::array<int, 2> child = {-1, -1};
    bool handle = false;
};

struct PantsTree {
    std::vector<PantsNode> nodes;
    double cuff_length = 1.0;
    int depth = 1; // number of levels; node count 2^depth - 1
};

PantsTree pants_tree(const AngleParam& theta, int depth, double cuff_length);

// Node ids of the periodic spine from the root to the deepest level, or
// empty when theta is not periodic.
std::vector<int> periodic_spine(const PantsTree& tree);

struct PathCrossing {
    int cuffs_crossed = 0;
    bool all_in_band = false;
};

// Count the cuffs a root path crosses. `path` must start at the root and
// step parent-to-child; an empty list stands for the root-only path. Every
// cuff has the tree's uniform length, so all_in_band is true whenever the
// path is valid. Throws NotAPath otherwise.
PathCrossing coarse_tameness_graph_check(const PantsTree& tree, const std::vector<int>& path);

// One line per edge: `parent_id child_id cuff_length handle_flag`, the
// flag marking edges into handle-closure nodes.
void write_tree_edges(std::ostream& os, const PantsTree& tree);

// One row per reduced p/q with q <= max_q: `p,q,preperiod,period,kind`.
void write_leaf_classification_csv(std::ostream& os, int max_q);

} // namespace horoflow
