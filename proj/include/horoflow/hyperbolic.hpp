#pragma once

#include <cmath>
#include <complex>

#include "horoflow/error.hpp"

// Upper half-plane model of the hyperbolic plane.
//
// Conventions used throughout:
//  * points z = re + i*im with im > 0; the boundary is R u {infinity};
//  * isometries are real 2x2 matrices with det 1, identified up to sign
//    (PSL(2,R)), acting by z -> (az+b)/(cz+d);
//  * a frame is a matrix g standing for the unit tangent vector obtained by
//    pushing the upward vector at i with g; flows act on the right:
//    geodesic a_t = diag(e^{t/2}, e^{-t/2}), horocycle u_s = [[1,s],[0,1]],
//    affine [[alpha,beta],[0,1/alpha]];
//  * the Busemann cocycle is B_xi(x,y) = lim_{z->xi} [d(x,z) - d(y,z)], so
//    B_xi(x,y) >= 0 exactly when y lies in the closed horoball centered at
//    xi through x, and B_inf(x,y) = log(im y) - log(im x).

namespace horoflow {

using cplx = std::complex<double>;

// Tolerances shared across modules.
inline constexpr double kProjTol = 1e-9;    // projective matrix equality
inline constexpr double kTraceTol = 1e-9;   // |trace|-2 classification wall
inline constexpr double kImproveTol = 1e-12; // strict-improvement threshold

struct HPoint {
    double re;
    double im; // > 0

    HPoint() : re(0.0), im(1.0) {}
    HPoint(double re_, double im_) : re(re_), im(im_) {
        if (!(im > 0.0))
            throw Error(Err::InvalidPoint, "im must be > 0");
    }

    cplx z() const { return {re, im}; }
};

struct BoundaryPoint {
    double v = 0.0;
    bool infinite = false;

    static BoundaryPoint at(double x) { return {x, false}; }
    static BoundaryPoint infinity() { return {0.0, true}; }
};

struct MoebiusMap {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static MoebiusMap identity() { return {}; }

    // Compensated 2x2 determinant: ad and bc cancel almost completely for
    // long products of unit-determinant factors, and a naive a*d - b*c
    // would lose the result in rounding noise of the large terms. The fma
    // form stays accurate to a couple of ulp of the true determinant.
    double det() const {
        const double w = b * c;
        const double e = std::fma(b, c, -w);
        const double f = std::fma(a, d, -w);
        return f - e;
    }
    double trace() const { return a + d; }

    // Rescale to det 1. Rejects det <= 0 (orientation-reversing or singular).
    MoebiusMap normalized() const;

    MoebiusMap inverse() const { return {d, -b, -c, a}; }
};

// Composition with renormalization, so long products keep |det - 1| small.
MoebiusMap operator*(const MoebiusMap& lhs, const MoebiusMap& rhs);

// min(max-norm(A-B), max-norm(A+B)): distance up to the PSL sign ambiguity.
double projective_distance(const MoebiusMap& lhs, const MoebiusMap& rhs);
bool projectively_equal(const MoebiusMap& lhs, const MoebiusMap& rhs,
                        double tol = kProjTol);

struct Frame {
    MoebiusMap g;
};

struct GeodesicLine {
    BoundaryPoint endpoint_minus; // repelling end when oriented by an isometry
    BoundaryPoint endpoint_plus;
};

enum class IsometryClass { IDENTITY, ELLIPTIC, PARABOLIC, HYPERBOLIC };

struct AxisData {
    GeodesicLine axis; // endpoint_minus repelling, endpoint_plus attracting
    double translation_length;
};

struct FrameGeometry {
    HPoint base;
    double direction; // tangent angle at base, radians in (-pi, pi]
    BoundaryPoint forward;
};

HPoint moebius_apply(const MoebiusMap& m, const HPoint& p);
BoundaryPoint moebius_apply(const MoebiusMap& m, const BoundaryPoint& p);

double hyp_distance(const HPoint& p, const HPoint& q);

IsometryClass classify_isometry(const MoebiusMap& m, double tol = kTraceTol);

// Fixed points and translation length 2*arccosh(|trace|/2) of a hyperbolic
// element. Throws NotHyperbolic otherwise.
AxisData axis_data(const MoebiusMap& m);

Frame geodesic_flow(const Frame& u, double t);
Frame horocycle_flow(const Frame& u, double s);
Frame affine_act(const Frame& u, double alpha, double beta);

double busemann(const BoundaryPoint& xi, const HPoint& x, const HPoint& y);

// Angle at vertex between the geodesic segments toward p and toward q,
// in (0, pi]. Throws Degenerate if p or q coincides with vertex.
double hyp_angle(const HPoint& vertex, const HPoint& p, const HPoint& q);

FrameGeometry frame_geometry(const Frame& u);

// Euclidean tangent angle at `from` of the geodesic toward the target.
double direction_toward(const HPoint& from, const HPoint& to);
double direction_toward(const HPoint& from, const BoundaryPoint& xi);

// The unique frame with the given base point and tangent direction.
Frame frame_at(const HPoint& base, double direction);

double wrap_angle(double a); // into (-pi, pi]

} // namespace horoflow
