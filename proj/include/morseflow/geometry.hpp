#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "morseflow/expression.hpp"

namespace morseflow {

// Point of the level set {Φ = 0} with its unit normal ∇Φ/|∇Φ| cached.
struct SurfacePoint {
    Eigen::Vector3d coords = Eigen::Vector3d::Zero();
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};

struct TangentVector {
    SurfacePoint base;
    Eigen::Vector3d vec = Eigen::Vector3d::Zero();
};

// Ordered orthonormal tangent basis; (e1, e2, normal) is right-handed.
struct TangentFrame {
    Eigen::Vector3d e1, e2;
};

struct GeometryTols {
    double on_surface_tol = 1e-10;
    double reg_tol = 1e-6;
    int newton_max_iter = 50;
};

// Compact regular level set {Φ = 0} inside a bounding box, carrying the
// induced Euclidean metric and the ambient orientation.
class ImplicitSurface {
public:
    ImplicitSurface(Expression phi, Eigen::AlignedBox3d box, int expected_euler,
                    GeometryTols tols = {});

    const Expression& phi() const { return phi_; }
    const Eigen::AlignedBox3d& box() const { return box_; }
    int expected_euler() const { return expected_euler_; }
    const GeometryTols& tols() const { return tols_; }
    double diameter() const { return diameter_; }

    bool inside_box(const Eigen::Vector3d& q) const { return box_.contains(q); }

    // Newton iteration along ∇Φ. Throws NoConvergence / Degenerate / LeftBoundingBox.
    SurfacePoint project(Eigen::Vector3d q) const;

    // Cheap in-place reprojection for integrator steps (same Newton, no
    // SurfacePoint construction).
    void reproject(Eigen::Vector3d& q) const;

    // Validates an already on-surface point and caches its normal.
    SurfacePoint point_at(const Eigen::Vector3d& q) const;

    Eigen::Vector3d unit_normal(const Eigen::Vector3d& q) const;

private:
    Expression phi_;
    Eigen::AlignedBox3d box_;
    int expected_euler_;
    GeometryTols tols_;
    double diameter_;
};

// v minus its normal component; linear in v and idempotent.
TangentVector tangent_project(const SurfacePoint& p, const Eigen::Vector3d& v);

// Deterministic right-handed orthonormal frame built from the smallest-index
// ambient axis not parallel to the normal.
TangentFrame orientation_frame(const SurfacePoint& p);

// Gradient of f|Σ at p: tangent projection of the ambient gradient.
TangentVector restricted_gradient(const Expression& f, const SurfacePoint& p);

// Hessian of f|Σ at a critical point of the restriction, expressed on
// orientation_frame(p): M_ij = e_iᵀ (H_f − λ H_Φ) e_j, λ = ⟨∇f,∇Φ⟩/|∇Φ|².
// Throws NotCritical when the restricted gradient exceeds crit_tol.
Eigen::Matrix2d restricted_hessian(const Expression& f, const ImplicitSurface& S,
                                   const SurfacePoint& p, double crit_tol = 1e-8);

}  // namespace morseflow
