#include "horoflow/hirsch.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "horoflow/textio.hpp"

namespace horoflow {

AngleParam::AngleParam(long long p_, long long q_) {
    if (q_ < 1)
        throw Error(Err::Validation, "denominator must be >= 1");
    p = p_ % q_;
    if (p < 0)
        p += q_;
    const long long g = std::gcd(p, q_);
    p /= g;
    q = q_ / g;
}

AngleParam AngleParam::doubled() const { return AngleParam(2 * p, q); }

std::array<AngleParam, 2> AngleParam::halved() const {
    return {AngleParam(p, 2 * q), AngleParam(p + q, 2 * q)};
}

DoublingOrbit doubling_orbit(const AngleParam& theta, int max_iter) {
    if (max_iter < 1)
        throw Error(Err::Validation, "max_iter must be >= 1");
    DoublingOrbit out;
    out.orbit.push_back(theta);
    AngleParam cur = theta;
    for (int step = 0; step < max_iter; ++step) {
        cur = cur.doubled();
        for (std::size_t i = 0; i < out.orbit.size(); ++i) {
            if (out.orbit[i] == cur) {
                out.preperiod = static_cast<int>(i);
                out.period = static_cast<int>(out.orbit.size() - i);
                return out;
            }
        }
        out.orbit.push_back(cur);
    }
    return out; // cycle not closed within max_iter; period stays unset
}

const char* leaf_kind_name(LeafKind kind) {
    return kind == LeafKind::GENUS_ONE_CANTOR_ENDS ? "GENUS_ONE_CANTOR_ENDS"
                                                   : "CANTOR_TREE";
}

LeafDescriptor leaf_type(const AngleParam& theta) {
    // preperiod + period <= q, so q + 1 iterations always close the cycle.
    const DoublingOrbit orb = doubling_orbit(theta, static_cast<int>(theta.q) + 1);
    LeafDescriptor d;
    d.period = orb.period;
    d.preperiod = orb.preperiod;
    d.kind = (orb.period.has_value() && orb.preperiod == 0)
                 ? LeafKind::GENUS_ONE_CANTOR_ENDS
                 : LeafKind::CANTOR_TREE;
    return d;
}

GlueImage hirsch_glue(const std::complex<double>& Z, const std::complex<double>& z) {
    if (std::fabs(std::abs(z) - 1.0) > 1e-9)
        throw Error(Err::BaseOffCircle, "|z| must be 1 within 1e-9");
    return {Z * z / 4.0 + 0.5, z * z};
}

PantsTree pants_tree(const AngleParam& theta, int depth, double cuff_length) {
    if (depth < 1)
        throw Error(Err::Validation, "depth must be >= 1");
    if (!(cuff_length > 0.0) || !std::isfinite(cuff_length))
        throw Error(Err::Validation, "cuff_length must be positive");

    PantsTree tree;
    tree.cuff_length = cuff_length;
    tree.depth = depth;
    tree.nodes.reserve((static_cast<std::size_t>(1) << depth) - 1);
    tree.nodes.push_back(PantsNode{theta, 0, -1, {-1, -1}, false});
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].depth + 1 >= depth)
            continue;
        const AngleParam label = tree.nodes[i].label;
        auto kids = label.halved();
        if (label.first_digit() == 1)
            std::swap(kids[0], kids[1]);
        for (int side = 0; side < 2; ++side) {
            const int id = static_cast<int>(tree.nodes.size());
            tree.nodes[i].child[side] = id;
            tree.nodes.push_back(
                PantsNode{kids[side], tree.nodes[i].depth + 1, static_cast<int>(i),
                          {-1, -1}, false});
        }
    }

    // Handle closures sit on the periodic spine at multiples of the period.
    const LeafDescriptor leaf = leaf_type(theta);
    if (leaf.kind == LeafKind::GENUS_ONE_CANTOR_ENDS) {
        const int m = *leaf.period;
        int id = 0;
        while (id >= 0) {
            PantsNode& node = tree.nodes[static_cast<std::size_t>(id)];
            if (node.depth % m == 0)
                node.handle = true;
            int next = -1;
            for (int side = 0; side < 2; ++side) {
                const int c = node.child[side];
                if (c < 0)
                    continue;
                // The cycle predecessor is the unique periodic preimage.
                if (leaf_type(tree.nodes[static_cast<std::size_t>(c)].label).preperiod == 0)
                    next = c;
            }
            id = next;
        }
    }
    return tree;
}

std::vector<int> periodic_spine(const PantsTree& tree) {
    std::vector<int> spine;
    if (tree.nodes.empty() || leaf_type(tree.nodes[0].label).preperiod != 0)
        return spine;
    int id = 0;
    while (id >= 0) {
        spine.push_back(id);
        const PantsNode& node = tree.nodes[static_cast<std::size_t>(id)];
        int next = -1;
        for (int side = 0; side < 2; ++side) {
            const int c = node.child[side];
            if (c >= 0 &&
                leaf_type(tree.nodes[static_cast<std::size_t>(c)].label).preperiod == 0)
                next = c;
        }
        id = next;
    }
    return spine;
}

PathCrossing coarse_tameness_graph_check(const PantsTree& tree,
                                         const std::vector<int>& path) {
    if (path.empty())
        return {0, true}; // root-only path crosses nothing
    if (path.front() != 0)
        throw Error(Err::NotAPath, "path must start at the root");
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (path[i] < 0 || path[i] >= static_cast<int>(tree.nodes.size()))
            throw Error(Err::NotAPath, "node id out of range");
        if (i == 0)
            continue;
        const PantsNode& prev = tree.nodes[static_cast<std::size_t>(path[i - 1])];
        if (path[i] != prev.child[0] && path[i] != prev.child[1])
            throw Error(Err::NotAPath, "consecutive ids are not parent and child");
    }
    return {static_cast<int>(path.size()) - 1, true};
}

void write_tree_edges(std::ostream& os, const PantsTree& tree) {
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        for (int side = 0; side < 2; ++side) {
            const int c = tree.nodes[i].child[side];
            if (c < 0)
                continue;
            os << i << ' ' << c << ' ' << format_real(tree.cuff_length) << ' '
               << (tree.nodes[static_cast<std::size_t>(c)].handle ? 1 : 0) << '\n';
        }
    }
}

void write_leaf_classification_csv(std::ostream& os, int max_q) {
    if (max_q < 1)
        throw Error(Err::Validation, "max_q must be >= 1");
    os << "p,q,preperiod,period,kind\n";
    for (long long q = 1; q <= max_q; ++q) {
        for (long long p = 0; p < q; ++p) {
            if (std::gcd(p, q) != 1)
                continue;
            const AngleParam theta(p, q);
            const LeafDescriptor d = leaf_type(theta);
            os << p << ',' << q << ',' << d.preperiod << ',';
            if (d.period)
                os << *d.period;
            os << ',' << leaf_kind_name(d.kind) << '\n';
        }
    }
}

} // namespace horoflow
