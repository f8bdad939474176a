#pragma once

// Finitely generated subgroups of PSL(2,R): presentations, breadth-first
// word enumeration with geometric deduplication, closed-geodesic
// harvesting, Dirichlet point reduction, and exponent-sum subgroup
// filters, plus builders for the two desk-scale example groups.
//
// Word convention: a word is a list of signed 1-based generator indices;
// token +k denotes generators[k-1] and token -k its inverse. The matrix
// of a word is the left-to-right product, so appending a token multiplies
// on the right. Enumeration is breadth-first by word length with tokens
// ordered +1, -1, +2, -2, ... inside each extension, which fixes the
// output order completely; the parallel expansion path merges worker
// buffers sequentially so the order is identical for any thread count.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "horoflow/hyperbolic.hpp"

namespace horoflow {

struct GroupPresentation {
    std::string name;
    std::vector<MoebiusMap> generators;
    std::vector<std::string> names;          // one symbol per generator
    std::vector<std::vector<int>> relators;  // verification only, never used to reduce words
    std::vector<int> kernel_weights;         // optional, empty when unset
};

// Throws Validation unless every generator has determinant 1 within 1e-9,
// no generator is projectively +-identity, names match generators
// one-to-one, and relator/kernel_weights entries reference valid
// generators.
void validate_presentation(const GroupPresentation& G);

struct GroupElement {
    MoebiusMap matrix;  // equals the word's product projectively (1e-9)
    std::vector<int> word;
};

// One closed geodesic on the quotient: a hyperbolic element together with
// its axis endpoints and translation length 2*arccosh(|trace|/2).
struct ClosedGeodesicRec {
    GroupElement element;
    BoundaryPoint repelling;
    BoundaryPoint attracting;
    double length = 0.0;
};

// Quotient of the upper half-plane by the cyclic group generated by
// diag(e^{l/2}, e^{-l/2}); l is the length of its unique closed geodesic.
struct HyperbolicCylinder {
    double systole_length;
    explicit HyperbolicCylinder(double l);
};

struct EnumerationOptions {
    int max_word_length = 1;
    std::size_t element_cap = 5000000;
    // Optional frontier pruning: a candidate failing the predicate is
    // dropped entirely (not reported, not extended). Must be pure; it is
    // evaluated from worker threads.
    std::function<bool(const MoebiusMap&)> keep;
};

// All products of at most max_word_length generator tokens, freely
// reduced, deduplicated projectively, identity excluded. Deterministic
// order: breadth-first, lexicographic within each length. Throws
// BudgetExceeded when the element count would pass options.element_cap.
std::vector<GroupElement> enumerate_elements(const GroupPresentation& G, int max_word_length);
std::vector<GroupElement> enumerate_elements(const GroupPresentation& G,
                                             const EnumerationOptions& options);

// Plain single-loop reference for the buffered expansion above; identical
// output, kept for tests and benchmarks.
std::vector<GroupElement> enumerate_elements_serial(const GroupPresentation& G,
                                                    const EnumerationOptions& options);

// Hyperbolic elements of the pool with translation length in [a, b], one
// record per (axis, length) pair: the key collapses an element with its
// inverse and any pool-mate sharing axis and length. Sorted by length,
// ties kept in pool order. An empty result is the in-band-empty signal,
// not an error.
std::vector<ClosedGeodesicRec> harvest_closed_geodesics(const std::vector<GroupElement>& pool,
                                                        double a, double b);
std::vector<ClosedGeodesicRec> closed_geodesics_in_band(const GroupPresentation& G,
                                                        int max_word_length, double a, double b);

struct ReduceResult {
    Frame reduced;
    GroupElement applied;  // reduced.g == applied.matrix * input.g
};

// Greedy descent toward the Dirichlet domain centered at i: while some
// generator or inverse moves the base point strictly closer to i (by more
// than 1e-12), apply the best such move. Throws NoConvergence after 1e5
// steps, which signals a non-discrete input group.
ReduceResult dirichlet_reduce(const GroupPresentation& G, const Frame& u);

// Predicate accepting elements whose weighted exponent sum vanishes; the
// accepted set is the kernel of the induced homomorphism to the integers
// (all-zero weights accept everything). Throws Validation unless one
// weight per generator is supplied.
std::function<bool(const GroupElement&)> kernel_filter(const GroupPresentation& G,
                                                       const std::vector<int>& exponent_weights);

// Cocompact genus-2 group: the regular hyperbolic octagon with vertex
// angle pi/4 centered at i, sides paired by reflection products, with
// generators a1, b1, a2, b2 oriented so the surface relator
// [a1,b1][a2,b2] is +-identity. Quotient area 4*pi.
GroupPresentation genus2_octagon_group();

// Rank-one presentation of the cylinder's deck group.
GroupPresentation cylinder_group(const HyperbolicCylinder& C);

// Length of the equidistant curve at distance w >= 0 from the cylinder's
// closed geodesic: systole_length * cosh(w).
double hypercycle_length(const HyperbolicCylinder& C, double w);

// Hyperbolic distance from the octagon's center to its vertices,
// arccosh(3 + 2*sqrt(2)); every Dirichlet-domain point is within this
// distance of i.
double octagon_circumradius();

// Left-to-right product of the word's tokens (empty word -> identity).
// Throws Validation on a token that is 0 or out of range.
MoebiusMap word_matrix(const GroupPresentation& G, const std::vector<int>& word);
GroupElement make_element(const GroupPresentation& G, const std::vector<int>& word);

}  // namespace horoflow
