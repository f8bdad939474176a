#include "horoflow/hyperbolic.hpp"

#include <algorithm>
#include <cmath>

namespace horoflow {

const char* err_name(Err e) {
    switch (e) {
    case Err::InvalidPoint: return "INVALID_POINT";
    case Err::BadDeterminant: return "BAD_DETERMINANT";
    case Err::NotHyperbolic: return "NOT_HYPERBOLIC";
    case Err::NonpositiveScale: return "NONPOSITIVE_SCALE";
    case Err::Degenerate: return "DEGENERATE";
    case Err::DegenerateXi: return "DEGENERATE_XI";
    case Err::BudgetExceeded: return "BUDGET_EXCEEDED";
    case Err::NoConvergence: return "NO_CONVERGENCE";
    case Err::NoCluster: return "NO_CLUSTER";
    case Err::EscapeFail: return "ESCAPE_FAIL";
    case Err::BaseOffCircle: return "BASE_OFF_CIRCLE";
    case Err::NotAPath: return "NOT_A_PATH";
    case Err::Parse: return "PARSE";
    case Err::Validation: return "VALIDATION";
    }
    return "UNKNOWN";
}

MoebiusMap MoebiusMap::normalized() const {
    double dt = det();
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw Error(Err::BadDeterminant, "determinant must be positive");
    double s = std::sqrt(dt);
    return {a / s, b / s, c / s, d / s};
}

MoebiusMap operator*(const MoebiusMap& lhs, const MoebiusMap& rhs) {
    MoebiusMap m{lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
                 lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
    return m.normalized();
}

double projective_distance(const MoebiusMap& lhs, const MoebiusMap& rhs) {
    double diff = std::max({std::fabs(lhs.a - rhs.a), std::fabs(lhs.b - rhs.b),
                            std::fabs(lhs.c - rhs.c), std::fabs(lhs.d - rhs.d)});
    double sum = std::max({std::fabs(lhs.a + rhs.a), std::fabs(lhs.b + rhs.b),
                           std::fabs(lhs.c + rhs.c), std::fabs(lhs.d + rhs.d)});
    return std::min(diff, sum);
}

bool projectively_equal(const MoebiusMap& lhs, const MoebiusMap& rhs, double tol) {
    return projective_distance(lhs, rhs) <= tol;
}

HPoint moebius_apply(const MoebiusMap& m, const HPoint& p) {
    // im(m z) = det * im z / |cz+d|^2, so positivity is preserved exactly.
    cplx w = m.c * p.z() + cplx(m.d, 0.0);
    double n2 = std::norm(w);
    cplx num = (m.a * p.z() + cplx(m.b, 0.0)) * std::conj(w);
    return {num.real() / n2, m.det() * p.im / n2};
}

BoundaryPoint moebius_apply(const MoebiusMap& m, const BoundaryPoint& p) {
    if (p.infinite)
        return m.c == 0.0 ? BoundaryPoint::infinity() : BoundaryPoint::at(m.a / m.c);
    double den = m.c * p.v + m.d;
    if (den == 0.0)
        return BoundaryPoint::infinity();
    return BoundaryPoint::at((m.a * p.v + m.b) / den);
}

double hyp_distance(const HPoint& p, const HPoint& q) {
    double dx = p.re - q.re;
    double dy = p.im - q.im;
    double arg = 1.0 + (dx * dx + dy * dy) / (2.0 * p.im * q.im);
    return std::acosh(std::max(1.0, arg));
}

IsometryClass classify_isometry(const MoebiusMap& m, double tol) {
    if (projectively_equal(m, MoebiusMap::identity(), tol))
        return IsometryClass::IDENTITY;
    double tr = std::fabs(m.trace());
    if (tr > 2.0 + tol)
        return IsometryClass::HYPERBOLIC;
    if (tr < 2.0 - tol)
        return IsometryClass::ELLIPTIC;
    return IsometryClass::PARABOLIC;
}

AxisData axis_data(const MoebiusMap& m) {
    if (classify_isometry(m) != IsometryClass::HYPERBOLIC)
        throw Error(Err::NotHyperbolic, "axis requested for a non-hyperbolic element");
    double tr = m.trace();
    double length = 2.0 * std::acosh(std::fabs(tr) / 2.0);
    BoundaryPoint attracting, repelling;
    if (m.c != 0.0) {
        double s = std::sqrt(tr * tr - 4.0);
        double z1 = (m.a - m.d + s) / (2.0 * m.c);
        double z2 = (m.a - m.d - s) / (2.0 * m.c);
        // |cz+d| > 1 at the attracting fixed point (derivative 1/(cz+d)^2).
        bool first_attracts = std::fabs(m.c * z1 + m.d) > 1.0;
        attracting = BoundaryPoint::at(first_attracts ? z1 : z2);
        repelling = BoundaryPoint::at(first_attracts ? z2 : z1);
    } else {
        BoundaryPoint finite = BoundaryPoint::at(m.b / (m.d - m.a));
        if (std::fabs(m.a) > 1.0) {
            attracting = BoundaryPoint::infinity();
            repelling = finite;
        } else {
            attracting = finite;
            repelling = BoundaryPoint::infinity();
        }
    }
    return {{repelling, attracting}, length};
}

Frame geodesic_flow(const Frame& u, double t) {
    double e = std::exp(t / 2.0);
    return {u.g * MoebiusMap{e, 0.0, 0.0, 1.0 / e}};
}

Frame horocycle_flow(const Frame& u, double s) {
    return {u.g * MoebiusMap{1.0, s, 0.0, 1.0}};
}

Frame affine_act(const Frame& u, double alpha, double beta) {
    if (!(alpha > 0.0))
        throw Error(Err::NonpositiveScale, "affine scale must be > 0");
    return {u.g * MoebiusMap{alpha, beta, 0.0, 1.0 / alpha}};
}

double busemann(const BoundaryPoint& xi, const HPoint& x, const HPoint& y) {
    if (xi.infinite)
        return std::log(y.im) - std::log(x.im);
    // Poisson kernel transport: B_xi(x,y) = log P(y,xi) - log P(x,xi) with
    // P(z,xi) = im z / |z - xi|^2.
    double dx2 = (x.re - xi.v) * (x.re - xi.v) + x.im * x.im;
    double dy2 = (y.re - xi.v) * (y.re - xi.v) + y.im * y.im;
    return std::log(y.im) - std::log(x.im) + std::log(dx2) - std::log(dy2);
}

double wrap_angle(double a) {
    return std::atan2(std::sin(a), std::cos(a));
}

double direction_toward(const HPoint& from, const HPoint& to) {
    double scale = std::max({1.0, std::fabs(from.re), std::fabs(to.re)});
    if (std::fabs(from.re - to.re) <= 1e-14 * scale)
        return to.im > from.im ? M_PI / 2.0 : -M_PI / 2.0;
    double center = (std::norm(from.z()) - std::norm(to.z())) /
                    (2.0 * (from.re - to.re));
    double phi_from = std::atan2(from.im, from.re - center);
    double phi_to = std::atan2(to.im, to.re - center);
    // Tangent of c + R e^{i phi} is +-i e^{i phi}; pick the sign heading to `to`.
    double sign = phi_to > phi_from ? 1.0 : -1.0;
    return std::atan2(sign * std::cos(phi_from), -sign * std::sin(phi_from));
}

double direction_toward(const HPoint& from, const BoundaryPoint& xi) {
    if (xi.infinite)
        return M_PI / 2.0;
    double scale = std::max({1.0, std::fabs(from.re), std::fabs(xi.v)});
    if (std::fabs(from.re - xi.v) <= 1e-14 * scale)
        return -M_PI / 2.0;
    double center = (std::norm(from.z()) - xi.v * xi.v) / (2.0 * (from.re - xi.v));
    double phi_from = std::atan2(from.im, from.re - center);
    double phi_xi = xi.v > center ? 0.0 : M_PI;
    double sign = phi_xi > phi_from ? 1.0 : -1.0;
    return std::atan2(sign * std::cos(phi_from), -sign * std::sin(phi_from));
}

double hyp_angle(const HPoint& vertex, const HPoint& p, const HPoint& q) {
    if (hyp_distance(vertex, p) < 1e-13 || hyp_distance(vertex, q) < 1e-13)
        throw Error(Err::Degenerate, "angle endpoint coincides with vertex");
    double dp = direction_toward(vertex, p);
    double dq = direction_toward(vertex, q);
    return std::fabs(wrap_angle(dp - dq));
}

FrameGeometry frame_geometry(const Frame& u) {
    HPoint base = moebius_apply(u.g, HPoint{0.0, 1.0});
    BoundaryPoint forward = moebius_apply(u.g, BoundaryPoint::infinity());
    // The differential at i multiplies tangent vectors by 1/(ci+d)^2; applying
    // it to the upward vector gives direction pi/2 - 2*arg(ci+d).
    double direction = wrap_angle(M_PI / 2.0 - 2.0 * std::atan2(u.g.c, u.g.d));
    return {base, direction, forward};
}

Frame frame_at(const HPoint& base, double direction) {
    double theta = (direction - M_PI / 2.0) / 2.0;
    MoebiusMap rot{std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta)};
    double r = std::sqrt(base.im);
    MoebiusMap translate{r, base.re / r, 0.0, 1.0 / r};
    return {translate * rot};
}

} // namespace horoflow
