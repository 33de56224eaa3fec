#include "morseflow/geometry.hpp"

#include <cmath>

#include "morseflow/errors.hpp"

namespace morseflow {

using Eigen::Vector3d;

ImplicitSurface::ImplicitSurface(Expression phi, Eigen::AlignedBox3d box, int expected_euler,
                                 GeometryTols tols)
    : phi_(std::move(phi)), box_(std::move(box)), expected_euler_(expected_euler), tols_(tols) {
    diameter_ = box_.diagonal().norm();
}

SurfacePoint ImplicitSurface::project(Vector3d q) const {
    if (!inside_box(q))
        raise(ErrorCode::LeftBoundingBox, "projection seed outside bounding box");
    for (int it = 0; it < tols_.newton_max_iter; ++it) {
        Jet1 j = phi_.jet1(q);
        double gn2 = j.g.squaredNorm();
        if (std::sqrt(gn2) < tols_.reg_tol)
            raise(ErrorCode::Degenerate, "|grad Phi| below reg_tol during projection");
        if (std::abs(j.v) <= tols_.on_surface_tol) return point_at(q);
        q -= (j.v / gn2) * j.g;  // step parallel to ∇Φ
    }
    raise(ErrorCode::NoConvergence, "surface projection did not converge");
}

void ImplicitSurface::reproject(Vector3d& q) const {
    for (int it = 0; it < tols_.newton_max_iter; ++it) {
        Jet1 j = phi_.jet1(q);
        double gn2 = j.g.squaredNorm();
        if (std::sqrt(gn2) < tols_.reg_tol)
            raise(ErrorCode::Degenerate, "|grad Phi| below reg_tol during reprojection");
        if (std::abs(j.v) <= tols_.on_surface_tol) return;
        q -= (j.v / gn2) * j.g;
    }
    raise(ErrorCode::NoConvergence, "surface reprojection did not converge");
}

SurfacePoint ImplicitSurface::point_at(const Vector3d& q) const {
    Jet1 j = phi_.jet1(q);
    if (std::abs(j.v) > tols_.on_surface_tol)
        raise(ErrorCode::NoConvergence, "point is not on the surface");
    double gn = j.g.norm();
    if (gn < tols_.reg_tol)
        raise(ErrorCode::Degenerate, "|grad Phi| below reg_tol at surface point");
    return SurfacePoint{q, j.g / gn};
}

Vector3d ImplicitSurface::unit_normal(const Vector3d& q) const {
    Jet1 j = phi_.jet1(q);
    double gn = j.g.norm();
    if (gn < tols_.reg_tol)
        raise(ErrorCode::Degenerate, "|grad Phi| below reg_tol");
    return j.g / gn;
}

TangentVector tangent_project(const SurfacePoint& p, const Vector3d& v) {
    return TangentVector{p, v - p.normal.dot(v) * p.normal};
}

TangentFrame orientation_frame(const SurfacePoint& p) {
    const Vector3d& n = p.normal;
    // At most one ambient axis can have |n_k| > 0.9; take the first that does not.
    int axis = 0;
    for (; axis < 3; ++axis)
        if (std::abs(n[axis]) <= 0.9) break;
    Vector3d e1 = Vector3d::Unit(axis) - n[axis] * n;
    e1.normalize();
    Vector3d e2 = n.cross(e1);
    return TangentFrame{e1, e2};
}

TangentVector restricted_gradient(const Expression& f, const SurfacePoint& p) {
    Jet1 j = f.jet1(p.coords);
    return tangent_project(p, j.g);
}

Eigen::Matrix2d restricted_hessian(const Expression& f, const ImplicitSurface& S,
                                   const SurfacePoint& p, double crit_tol) {
    if (restricted_gradient(f, p).vec.norm() > crit_tol)
        raise(ErrorCode::NotCritical, "restricted gradient exceeds crit_tol");
    Jet2 jf = f.jet2(p.coords);
    Jet2 jp = S.phi().jet2(p.coords);
    double lambda = jf.g.dot(jp.g) / jp.g.squaredNorm();
    Eigen::Matrix3d H = jf.h - lambda * jp.h;
    TangentFrame fr = orientation_frame(p);
    Eigen::Matrix2d M;
    M(0, 0) = fr.e1.dot(H * fr.e1);
    M(0, 1) = fr.e1.dot(H * fr.e2);
    M(1, 0) = M(0, 1);
    M(1, 1) = fr.e2.dot(H * fr.e2);
    return M;
}

}  // namespace morseflow
